mod commands;
mod config;
mod error;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{
    BasisKind, FieldAction, FieldArgs, LaplacianArgs, LaplacianMode, Outcome, PointArgs, SpectrumArgs, SpectrumKind,
    VariantArg,
};
use config::{Config, Lambda, LevelRange, Params};
use error::CliError;
use output::{emit, Format, RunManifest};

/// Numerics for SU(2,2), its Bergman domain SU(2,2)/S(U(2)×U(2)), and the oscillator realization.
///
/// Exit status: 0 on success, 2 on invalid input, 3 when a computed quantity misses its tolerance.
#[derive(Debug, Parser)]
#[command(name = "bergman", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// key=value file with parameter defaults; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long = "out", value_enum, default_value = "csv", global = true)]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Manifest path; defaults to <output>.manifest.json, or stderr without --output.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Point {
    /// λ₁,λ₂ with λ₁ ≥ λ₂ ≥ 0.
    #[arg(long)]
    lambda: Option<Lambda>,
    /// 2×2 matrix file for k′.
    #[arg(long)]
    kp: Option<PathBuf>,
    /// 2×2 matrix file for k″.
    #[arg(long)]
    kpp: Option<PathBuf>,
    /// Draw k′, k″ from the seed instead.
    #[arg(long)]
    random_k: bool,
}

impl From<Point> for PointArgs {
    fn from(p: Point) -> Self {
        PointArgs { lambda: p.lambda, kp: p.kp, kpp: p.kpp, random_k: p.random_k }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Residuals of the SU(2,2) relations for a 4×4 matrix.
    CheckGroup {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// g = k·δ_Λ·q for a group element read from file.
    Kak {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Structure constants computed from the generator matrices.
    Algebra {
        #[arg(long, value_enum, default_value = "corrected")]
        basis: BasisKind,
    },
    /// Radial Haar density on the open chamber.
    Haar {
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Monte Carlo estimate of ∫_D dμ_N.
    MeasureNorm {
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        z_max: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// ω(g, x) in closed form, with z and z† exchanged, and from the block product.
    Omega {
        #[arg(long = "N")]
        n: Option<u32>,
        /// Group element file; without it g = exp(ξ) for a seeded random ξ.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        xi_norm: Option<f64>,
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// The fifteen coordinates ξ_AB(x).
    Coords {
        #[arg(long = "N")]
        n: Option<u32>,
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fitted A_N, B_N over a level range such as 4..8 (inclusive).
    StarCoeffs {
        #[arg(long = "N")]
        n: Option<LevelRange>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Discrete labels with both eigenvalue readings, or the continuous branch on a τ grid.
    Spectrum {
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long, value_enum, default_value = "discrete")]
        kind: SpectrumKind,
        #[arg(long)]
        tau_max: Option<f64>,
        #[arg(long)]
        tau_points: Option<usize>,
        #[arg(long)]
        m2: Option<f64>,
    },
    /// Invariance residuals of Δ_N, or its radial restriction.
    LaplacianCheck {
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long, value_enum, default_value = "invariance")]
        mode: LaplacianMode,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Free field: mode table, one sample, or the Monte Carlo two-point check.
    Field {
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long)]
        m2: Option<f64>,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long, value_enum, default_value = "modes")]
        action: FieldAction,
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long)]
        tau_max: Option<f64>,
        #[arg(long)]
        tau_points: Option<usize>,
        #[arg(long)]
        z_max: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckGroup { .. } => "check-group",
            Command::Kak { .. } => "kak",
            Command::Algebra { .. } => "algebra",
            Command::Haar { .. } => "haar",
            Command::MeasureNorm { .. } => "measure-norm",
            Command::Omega { .. } => "omega",
            Command::Coords { .. } => "coords",
            Command::StarCoeffs { .. } => "star-coeffs",
            Command::Spectrum { .. } => "spectrum",
            Command::LaplacianCheck { .. } => "laplacian-check",
            Command::Field { .. } => "field",
        }
    }
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn dispatch(command: Command, p: &mut Params) -> Result<Outcome, CliError> {
    match command {
        Command::CheckGroup { input, tol } => commands::check_group(p, input, tol),
        Command::Kak { input, tol } => commands::kak(p, input, tol),
        Command::Algebra { basis } => {
            p.resolved.insert("basis".into(), value_name(basis));
            commands::algebra(basis)
        }
        Command::Haar { lambda_max, points } => commands::haar(p, lambda_max, points),
        Command::MeasureNorm { n, samples, z_max, seed } => commands::measure_norm(p, n, samples, z_max, seed),
        Command::Omega { n, input, xi_norm, point, seed, tol } => {
            commands::omega_cmd(p, n, input, xi_norm, point.into(), seed, tol)
        }
        Command::Coords { n, point, seed } => commands::coords(p, n, point.into(), seed),
        Command::StarCoeffs { n, points, tol } => commands::star_coeffs(p, n, points, tol),
        Command::Spectrum { n, variant, kind, tau_max, tau_points, m2 } => {
            p.resolved.insert("kind".into(), value_name(kind));
            commands::spectrum(p, SpectrumArgs { n, variant, kind, tau_max, tau_points, m2 })
        }
        Command::LaplacianCheck { n, mode, count, h, tol, seed } => {
            p.resolved.insert("mode".into(), value_name(mode));
            commands::laplacian_check(p, LaplacianArgs { n, mode, count, h, tol, seed })
        }
        Command::Field { n, m2, variant, action, draws, tau_max, tau_points, z_max, seed } => {
            p.resolved.insert("action".into(), value_name(action));
            commands::field(p, FieldArgs { n, m2, variant, action, draws, tau_max, tau_points, z_max, seed })
        }
    }
}

fn run(cli: Cli) -> Result<Option<String>, CliError> {
    let config = match &cli.common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let mut params = Params::new(config);
    let name = cli.command.name();
    let outcome = dispatch(cli.command, &mut params)?;
    let status = if outcome.failure.is_some() { "tolerance_failure" } else { "ok" };
    let manifest = RunManifest::new(name, params.resolved, outcome.notes, status);
    emit(
        &outcome.table,
        cli.common.format,
        &manifest,
        cli.common.output.as_deref(),
        cli.common.manifest.as_deref(),
    )?;
    Ok(outcome.failure)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("bergman: tolerance failure: {failure}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("bergman: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
