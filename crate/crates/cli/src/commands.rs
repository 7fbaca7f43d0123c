//! One function per subcommand; each returns a table plus an optional tolerance failure.

use std::path::PathBuf;

use bergman::algebra::{GeneratorBasis, StructureConstants, PAIRS};
use bergman::coherent::{
    coordinate, fit_star_coeffs, omega, omega_direct, omega_printed, sample_points, CoherentParam,
};
use bergman::field::{mode_table, sample_free_field, two_point_check, ModelParams, SpectrumVariant};
use bergman::group::{
    exp_generator, haar_radial_density, is_member, kak_decompose, mc_normalization, random_algebra_element,
    random_compact_pair, random_domain_point, GroupElement,
};
use bergman::laplacian::{
    continuous_floor, discrete_spectrum, eigenvalue, full_apply, invariance_residual, radial_apply, radial_part,
    ModeLabel, RadialPoint,
};
use bergman::{c, Mat2, C64};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Lambda, LevelRange, Params};
use crate::error::CliError;
use crate::input::{read_mat2, read_mat4};
use crate::output::{Cell, Table};

pub struct Outcome {
    pub table: Table,
    pub notes: Vec<String>,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Self { table, notes: Vec::new(), failure: None }
    }

    fn check(mut self, pass: bool, message: impl FnOnce() -> String) -> Self {
        if !pass && self.failure.is_none() {
            self.failure = Some(message());
        }
        self
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pair_label(p: usize) -> String {
    let (a, b) = PAIRS[p];
    format!("{a}{b}")
}

pub fn check_group(params: &mut Params, input: PathBuf, tol: Option<f64>) -> Result<Outcome, CliError> {
    let tol = params.get("tol", tol, 1e-10)?;
    params.resolved.insert("in".into(), input.display().to_string());
    let r = is_member(&read_mat4(&input)?);
    let mut t = Table::new(&["relation", "residual"]);
    let named = [
        ("gamma", r.gamma_residual),
        ("det", r.det_residual),
        ("a*a=E+c*c", r.set_a[0]),
        ("d*d=E+b*b", r.set_a[1]),
        ("a*b=c*d", r.set_a[2]),
        ("aa*=E+bb*", r.set_b[0]),
        ("dd*=E+cc*", r.set_b[1]),
        ("ac*=bd*", r.set_b[2]),
    ];
    for (name, v) in named {
        t.push(vec![name.into(), v.into()]);
    }
    let worst = named.iter().map(|x| x.1).fold(0.0, f64::max);
    let mut out = Outcome::ok(t);
    out.notes.push(format!("printed c*d = E + b*b residual {:.3e}", r.printed_cd_residual));
    Ok(out.check(worst <= tol, || format!("not in the group: max residual {worst:.3e} > {tol:e}")))
}

pub fn kak(params: &mut Params, input: PathBuf, tol: Option<f64>) -> Result<Outcome, CliError> {
    let tol = params.get("tol", tol, 1e-8)?;
    params.resolved.insert("in".into(), input.display().to_string());
    let g = GroupElement::new(read_mat4(&input)?)?;
    let f = kak_decompose(&g);
    let mut t = Table::new(&["factor", "row", "col", "re", "im"]);
    for (name, m) in [("k", f.k.matrix()), ("q", f.q.matrix())] {
        for i in 0..4 {
            for j in 0..4 {
                t.push(vec![name.into(), i.into(), j.into(), m[(i, j)].re.into(), m[(i, j)].im.into()]);
            }
        }
    }
    let mut out = Outcome::ok(t);
    out.notes.push(format!("lambda = ({}, {})", f.lambda.0, f.lambda.1));
    out.notes.push(format!("residual = {:e}", f.residual));
    if f.degenerate {
        out.notes.push("lambda1 = lambda2: k and q are not unique".into());
    }
    Ok(out.check(f.residual <= tol, || format!("KAK residual {:.3e} > {tol:e}", f.residual)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BasisKind {
    Corrected,
    Printed,
}

pub fn algebra(basis: BasisKind) -> Result<Outcome, CliError> {
    let b = match basis {
        BasisKind::Corrected => GeneratorBasis::new(),
        BasisKind::Printed => GeneratorBasis::printed(),
    };
    let table = b.structure_constants().map_err(|e| CliError::Usage(e.to_string()))?;
    let formula = StructureConstants::from_formula();
    let mut t = Table::new(&["p", "q", "r", "f", "formula"]);
    for (a, bb, cc, d, e, f, v) in table.rows() {
        let p = PAIRS.iter().position(|&x| x == (a, bb)).unwrap_or_default();
        let q = PAIRS.iter().position(|&x| x == (cc, d)).unwrap_or_default();
        let r = PAIRS.iter().position(|&x| x == (e, f)).unwrap_or_default();
        t.push(vec![format!("{a}{bb}").into(), format!("{cc}{d}").into(), format!("{e}{f}").into(), v.into(), formula.get(p, q)[r].into()]);
    }
    let diff = table.max_difference(&formula);
    let mut out = Outcome::ok(t);
    out.notes.push(format!("max difference from the bracket formula {diff:.3e}"));
    Ok(out)
}

pub fn haar(params: &mut Params, lambda_max: Option<f64>, points: Option<usize>) -> Result<Outcome, CliError> {
    let lmax = params.get("lambda_max", lambda_max, 2.0)?;
    let points = params.get("points", points, 20)?;
    if points < 2 || lmax <= 0.0 {
        return Err(CliError::Usage("need points >= 2 and lambda_max > 0".into()));
    }
    let mut t = Table::new(&["l1", "l2", "density"]);
    let step = lmax / points as f64;
    for i in 1..=points {
        for j in 1..i {
            let (l1, l2) = (step * i as f64, step * j as f64);
            t.push(vec![l1.into(), l2.into(), haar_radial_density(l1, l2).into()]);
        }
    }
    Ok(Outcome::ok(t))
}

pub fn measure_norm(
    params: &mut Params,
    n: Option<u32>,
    samples: Option<u64>,
    z_max: Option<f64>,
    seed: Option<u64>,
) -> Result<Outcome, CliError> {
    let n = params.get("N", n, 4)?;
    let samples = params.get("samples", samples, 1_000_000)?;
    let z_max = params.get("z_max", z_max, 3.0)?;
    let seed = params.seed(seed)?;
    let est = mc_normalization(n, samples, seed)?;
    let z = (est.estimate - 1.0) / est.std_error;
    let mut t = Table::new(&["N", "samples", "estimate", "std_error", "acceptance", "z"]);
    t.push(vec![n.into(), Cell::Int(samples as i64), est.estimate.into(), est.std_error.into(), est.acceptance.into(), z.into()]);
    Ok(Outcome::ok(t).check(z.abs() < z_max, || format!("normalization off by {z:.2} standard errors")))
}

/// Coherent point from λ and either explicit k′, k″ files or a seeded random pair.
pub struct PointArgs {
    pub lambda: Option<Lambda>,
    pub kp: Option<PathBuf>,
    pub kpp: Option<PathBuf>,
    pub random_k: bool,
}

fn coherent_point(params: &mut Params, args: PointArgs, seed: u64) -> Result<CoherentParam, CliError> {
    let Lambda(l1, l2) = params.get("lambda", args.lambda, Lambda(0.3, 0.1))?;
    let (kp, kpp) = match (args.kp, args.kpp) {
        (Some(a), Some(b)) => {
            params.resolved.insert("kp".into(), a.display().to_string());
            params.resolved.insert("kpp".into(), b.display().to_string());
            (read_mat2(&a)?, read_mat2(&b)?)
        }
        (None, None) if args.random_k => {
            params.resolved.insert("random_k".into(), "true".into());
            random_compact_pair(&mut rng(seed ^ 0x6b))
        }
        (None, None) => (Mat2::identity(), Mat2::identity()),
        _ => return Err(CliError::Usage("--kp and --kpp go together".into())),
    };
    CoherentParam::new(kp, kpp, (l1, l2)).map_err(CliError::from)
}

pub fn omega_cmd(
    params: &mut Params,
    n: Option<u32>,
    input: Option<PathBuf>,
    xi_norm: Option<f64>,
    point: PointArgs,
    seed: Option<u64>,
    tol: Option<f64>,
) -> Result<Outcome, CliError> {
    let n = params.get("N", n, 4)?;
    let tol = params.get("tol", tol, 1e-9)?;
    let seed = params.seed(seed)?;
    let g = match input {
        Some(p) => {
            params.resolved.insert("in".into(), p.display().to_string());
            GroupElement::new(read_mat4(&p)?)?
        }
        None => {
            let norm = params.get("xi_norm", xi_norm, 1.0)?;
            exp_generator(&GeneratorBasis::new(), &random_algebra_element(&mut rng(seed), norm))
        }
    };
    let x = coherent_point(params, point, seed)?;
    let w = omega(&g, &x, n)?;
    let printed = omega_printed(&g, &x, n)?;
    let direct = omega_direct(&g, &x, n)?;
    let mut t = Table::new(&["kernel", "re", "im"]);
    for (name, v) in [("omega", w), ("omega_exchanged", printed), ("omega_block_product", direct)] {
        t.push(vec![name.into(), v.re.into(), v.im.into()]);
    }
    let dev = (w - direct).norm() / w.norm().max(1.0);
    Ok(Outcome::ok(t).check(dev <= tol, || format!("closed form and block product differ by {dev:.3e}")))
}

pub fn coords(params: &mut Params, n: Option<u32>, point: PointArgs, seed: Option<u64>) -> Result<Outcome, CliError> {
    let n = params.get("N", n, 4)?;
    let seed = params.seed(seed)?;
    let x = coherent_point(params, point, seed)?;
    let basis = GeneratorBasis::new();
    let mut t = Table::new(&["pair", "xi_re", "xi_im", "hermitian"]);
    for p in 0..PAIRS.len() {
        let xi = coordinate(&basis, p, &x, n)?;
        t.push(vec![pair_label(p).into(), xi.re.into(), xi.im.into(), (xi * c(0.0, 1.0)).re.into()]);
    }
    Ok(Outcome::ok(t))
}

pub fn star_coeffs(
    params: &mut Params,
    levels: Option<LevelRange>,
    points: Option<usize>,
    tol: Option<f64>,
) -> Result<Outcome, CliError> {
    let levels = params.get("N", levels, LevelRange { start: 4, end: 8 })?;
    let points = params.get("points", points, 30)?;
    let tol = params.get("tol", tol, 1e-5)?;
    if levels.start < 2 {
        return Err(CliError::Usage("levels start at N = 2".into()));
    }
    let basis = GeneratorBasis::new();
    let sc = StructureConstants::from_formula();
    let sample = sample_points(points);
    let mut t = Table::new(&[
        "N",
        "A_N",
        "B_N",
        "N_A_N",
        "N_B_N",
        "fit_residual",
        "max_misfit",
        "antisymmetry_residual",
    ]);
    let (mut worst_fit, mut worst_anti): (f64, f64) = (0.0, 0.0);
    for n in levels.start..=levels.end {
        let s = fit_star_coeffs(&basis, &sc, n, &sample)?;
        let nf = n as f64;
        t.push(vec![
            n.into(),
            s.a_n.into(),
            s.b_n.into(),
            (nf * s.a_n).into(),
            (nf * s.b_n).into(),
            s.fit_residual.into(),
            s.max_misfit.into(),
            s.antisymmetry_residual.into(),
        ]);
        worst_fit = worst_fit.max(s.fit_residual);
        worst_anti = worst_anti.max(s.antisymmetry_residual);
    }
    Ok(Outcome::ok(t)
        .check(worst_anti <= tol, || format!("antisymmetric part off by {worst_anti:.3e} > {tol:e}"))
        .check(worst_fit <= tol, || format!("symmetric fit residual {worst_fit:.3e} > {tol:e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SpectrumKind {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum VariantArg {
    Printed,
    Substituted,
}

impl std::str::FromStr for VariantArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, true)
    }
}

impl std::fmt::Display for VariantArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VariantArg::Printed => "printed",
            VariantArg::Substituted => "substituted",
        })
    }
}

impl From<VariantArg> for SpectrumVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Printed => SpectrumVariant::Printed,
            VariantArg::Substituted => SpectrumVariant::Substituted,
        }
    }
}

pub struct SpectrumArgs {
    pub n: Option<u32>,
    pub variant: Option<VariantArg>,
    pub kind: SpectrumKind,
    pub tau_max: Option<f64>,
    pub tau_points: Option<usize>,
    pub m2: Option<f64>,
}

pub fn spectrum(params: &mut Params, a: SpectrumArgs) -> Result<Outcome, CliError> {
    let n = params.get("N", a.n, 5)?;
    if n < 2 {
        return Err(CliError::Usage("N must be at least 2".into()));
    }
    match a.kind {
        SpectrumKind::Discrete => {
            let variant = params.get("variant", a.variant, VariantArg::Substituted)?;
            let s = discrete_spectrum(n);
            let mut t = Table::new(&["N", "l1", "l2", "eig_printed", "eig_substituted", "eig", "tau1_im", "tau2_im"]);
            for e in &s.entries {
                let ModeLabel::Discrete { l1, l2 } = e.kind else { continue };
                let eig = match variant {
                    VariantArg::Printed => e.eig_printed,
                    VariantArg::Substituted => e.eig_substituted,
                };
                t.push(vec![
                    n.into(),
                    l1.into(),
                    l2.into(),
                    e.eig_printed.into(),
                    e.eig_substituted.into(),
                    eig.into(),
                    e.tau_im.0.into(),
                    e.tau_im.1.into(),
                ]);
            }
            let mut out = Outcome::ok(t);
            out.notes.push(format!(
                "enumerated {} labels; half k(k-1) with k = {} gives {}",
                s.enumerated_count,
                (n - 1) / 2,
                s.formula_count
            ));
            out.notes.push(format!("continuous floor {}", continuous_floor(n)));
            Ok(out)
        }
        SpectrumKind::Continuous => {
            let tau_max = params.get("tau_max", a.tau_max, 10.0)?;
            let points = params.get("tau_points", a.tau_points, 11)?;
            let m2 = params.get("m2", a.m2, 1.0)?;
            let p = ModelParams::new(n, m2, SpectrumVariant::Substituted);
            let grid: Vec<f64> = match points {
                0 => Vec::new(),
                1 => vec![0.0],
                k => (0..k).map(|i| -tau_max + 2.0 * tau_max * i as f64 / (k - 1) as f64).collect(),
            };
            let mut t = Table::new(&["N", "tau1", "tau2", "eig", "propagator"]);
            for &t1 in &grid {
                for &t2 in &grid {
                    let eig = -eigenvalue(n, (c(t1, 0.0), c(t2, 0.0))).re;
                    let prop = bergman::field::propagator(&p, (t1, t2))?;
                    t.push(vec![n.into(), t1.into(), t2.into(), eig.into(), prop.into()]);
                }
            }
            Ok(Outcome::ok(t))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum LaplacianMode {
    /// Δ_N commutes with T_g on random (g, Z).
    Invariance,
    /// Full Δ_N on a K-bi-invariant function against both radial formulas.
    Radial,
}

/// K-bi-invariant test function: a symmetric polynomial in the eigenvalues of Z†Z.
fn invariant_test_function(z: &Mat2) -> C64 {
    let h = z.adjoint() * z;
    let (tr, det) = (h.trace().re, h.determinant().re);
    c(tr + 0.3 * tr * tr + det - 0.2 * tr * det, 0.0)
}

fn radial_test_function(l1: f64, l2: f64) -> f64 {
    let (a, b) = (l1.tanh().powi(2), l2.tanh().powi(2));
    let (tr, det) = (a + b, a * b);
    tr + 0.3 * tr * tr + det - 0.2 * tr * det
}

pub struct LaplacianArgs {
    pub n: Option<u32>,
    pub mode: LaplacianMode,
    pub count: Option<usize>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

pub fn laplacian_check(params: &mut Params, a: LaplacianArgs) -> Result<Outcome, CliError> {
    let n = params.get("N", a.n, 5)?;
    let h = params.get("h", a.h, 1e-2)?;
    let tol = params.get("tol", a.tol, 1e-3)?;
    match a.mode {
        LaplacianMode::Invariance => {
            let count = params.get("count", a.count, 20)?;
            let seed = params.seed(a.seed)?;
            let basis = GeneratorBasis::new();
            let mut r = rng(seed);
            let f = |w: &Mat2| (w[(0, 1)] * c(0.7, 0.2) + w[(1, 0)].conj() * w[(0, 0)]).exp() + w[(1, 1)].conj().powi(2);
            let mut t = Table::new(&["case", "N", "residual"]);
            let mut worst: f64 = 0.0;
            for case in 0..count {
                let g = exp_generator(&basis, &random_algebra_element(&mut r, 0.5));
                let z = random_domain_point(&mut r, 0.5);
                let res = invariance_residual(n, &g, f, &z, h)?;
                worst = worst.max(res);
                t.push(vec![case.into(), n.into(), res.into()]);
            }
            Ok(Outcome::ok(t).check(worst < tol, || format!("invariance residual {worst:.3e} >= {tol:e}")))
        }
        LaplacianMode::Radial => {
            let mut t = Table::new(&["l1", "l2", "full", "radial_apply", "radial_part", "dev_radial_apply", "dev_radial_part"]);
            let (mut lit, mut der): (f64, f64) = (0.0, 0.0);
            for l1 in [0.3, 0.5, 0.7, 0.9, 1.1] {
                for frac in [0.2, 0.4, 0.6, 0.8] {
                    let p = RadialPoint::new(l1, frac * l1)?;
                    let full = full_apply(n, invariant_test_function, &p.domain_point(), h)?;
                    let ra = radial_apply(n, radial_test_function, &p, h / 10.0)?;
                    let rp = radial_part(n, radial_test_function, &p, h / 10.0)?;
                    let (d1, d2) = ((full - ra).norm(), (full - rp).norm());
                    lit = lit.max(d1);
                    der = der.max(d2);
                    t.push(vec![l1.into(), (frac * l1).into(), full.re.into(), ra.into(), rp.into(), d1.into(), d2.into()]);
                }
            }
            let mut out = Outcome::ok(t);
            out.notes.push(format!("max deviation: radial_apply {lit:.3e}, radial_part {der:.3e}"));
            Ok(out.check(lit < tol, || format!("full Laplacian and radial_apply differ by {lit:.3e}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FieldAction {
    Modes,
    Sample,
    TwoPoint,
}

pub struct FieldArgs {
    pub n: Option<u32>,
    pub m2: Option<f64>,
    pub variant: Option<VariantArg>,
    pub action: FieldAction,
    pub draws: Option<usize>,
    pub tau_max: Option<f64>,
    pub tau_points: Option<usize>,
    pub z_max: Option<f64>,
    pub seed: Option<u64>,
}

fn label_cells(kind: ModeLabel) -> Vec<Cell> {
    match kind {
        ModeLabel::Discrete { l1, l2 } => vec!["discrete".into(), l1.into(), l2.into(), Cell::Empty, Cell::Empty],
        ModeLabel::Continuous { tau1, tau2 } => {
            vec!["continuous".into(), Cell::Empty, Cell::Empty, tau1.into(), tau2.into()]
        }
    }
}

pub fn field(params: &mut Params, a: FieldArgs) -> Result<Outcome, CliError> {
    let n = params.get("N", a.n, 5)?;
    let m2 = params.get("m2", a.m2, 1.0)?;
    let variant = params.get("variant", a.variant, VariantArg::Substituted)?;
    let mut model = ModelParams::new(n, m2, variant.into());
    model.tau_max = params.get("tau_max", a.tau_max, model.tau_max)?;
    model.tau_points = params.get("tau_points", a.tau_points, model.tau_points)?;
    let modes = mode_table(&model)?;
    let label = ["kind", "l1", "l2", "tau1", "tau2"];
    let with = |extra: &[&'static str]| Table::new(&[&label[..], extra].concat());
    match a.action {
        FieldAction::Modes => {
            let mut t = with(&["eig", "kappa", "quad_weight", "weight"]);
            for m in &modes {
                let eig = m.kappa - m2;
                let mut row = label_cells(m.entry.kind);
                row.extend([eig.into(), m.kappa.into(), m.quad_weight.into(), m.weight.into()]);
                t.push(row);
            }
            Ok(Outcome::ok(t))
        }
        FieldAction::Sample => {
            let seed = params.seed(a.seed)?;
            let coeffs = sample_free_field(&model, seed)?;
            let mut t = with(&["coefficient"]);
            for (m, v) in modes.iter().zip(coeffs.values()) {
                let mut row = label_cells(m.entry.kind);
                row.push(v.into());
                t.push(row);
            }
            let mut out = Outcome::ok(t);
            out.notes.push(format!("free action {}", bergman::field::free_action(&model, &coeffs)?));
            Ok(out)
        }
        FieldAction::TwoPoint => {
            let seed = params.seed(a.seed)?;
            let draws = params.get("draws", a.draws, 100_000)?;
            let z_max = params.get("z_max", a.z_max, 4.0)?;
            let table = two_point_check(&model, draws, seed)?;
            let mut t = with(&["empirical", "analytic", "z"]);
            let mut worst: f64 = 0.0;
            for r in &table.rows {
                let mut row = label_cells(r.label);
                row.extend([r.empirical.into(), r.analytic.into(), r.z.into()]);
                t.push(row);
                worst = worst.max(r.z.abs());
            }
            let mut out = Outcome::ok(t);
            out.notes.push(format!("off-diagonal max |z| {:.3}", table.offdiag_max_z));
            out.notes.push(format!("mean free action {} over {} modes", table.mean_action, table.rows.len()));
            Ok(out.check(worst < z_max, || format!("second moment off by {worst:.2} standard errors")))
        }
    }
}
