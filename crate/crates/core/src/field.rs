//! Free scalar field over the Laplacian spectrum: modes, action, propagator and Gaussian sampling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::laplacian::{discrete_spectrum, ModeLabel, SpectrumEntry};
use crate::{c, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("non-positive quadratic form coefficient {0}")]
    NonPositiveDenominator(f64),
    #[error("expected {expected} coefficients, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
}

/// Which discrete eigenvalue reading feeds the mode weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumVariant {
    Printed,
    Substituted,
}

impl std::str::FromStr for SpectrumVariant {
    type Err = FieldError;
    fn from_str(s: &str) -> Result<Self, FieldError> {
        match s {
            "printed" => Ok(Self::Printed),
            "substituted" => Ok(Self::Substituted),
            other => Err(FieldError::InvalidParams(format!("unknown variant {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub n: u32,
    pub m2: f64,
    pub variant: SpectrumVariant,
    /// Continuous grid covers |τ_j| ≤ tau_max.
    pub tau_max: f64,
    /// Grid points per τ axis; 0 drops the continuous sector.
    pub tau_points: usize,
    /// Interaction coefficients; carried along, not used by the free sector.
    pub potential: Vec<f64>,
}

impl ModelParams {
    pub fn new(n: u32, m2: f64, variant: SpectrumVariant) -> Self {
        Self { n, m2, variant, tau_max: 10.0, tau_points: 5, potential: Vec::new() }
    }

    pub fn discrete_only(self) -> Self {
        Self { tau_points: 0, ..self }
    }
}

/// 1 / (m² + ¼[2(N−1)² + τ₁² + τ₂²]) for real τ.
pub fn propagator(params: &ModelParams, tau: (f64, f64)) -> Result<f64, FieldError> {
    let m = params.n as f64 - 1.0;
    let den = params.m2 + 0.25 * (2.0 * m * m + tau.0 * tau.0 + tau.1 * tau.1);
    if den <= 0.0 {
        return Err(FieldError::NonPositiveDenominator(den));
    }
    Ok(1.0 / den)
}

/// The same display at complex τ (discrete labels sit at imaginary τ).
pub fn propagator_complex(params: &ModelParams, tau: (C64, C64)) -> Result<C64, FieldError> {
    let m = params.n as f64 - 1.0;
    let den = c(params.m2, 0.0) + (tau.0 * tau.0 + tau.1 * tau.1 + 2.0 * m * m) * 0.25;
    if den.re <= 0.0 {
        return Err(FieldError::NonPositiveDenominator(den.re));
    }
    Ok(den.inv())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub entry: SpectrumEntry,
    /// m² + eigenvalue of −Δ_N.
    pub kappa: f64,
    /// 1 for discrete modes, the trapezoid weight for grid modes.
    pub quad_weight: f64,
    /// kappa·quad_weight, the coefficient in the action.
    pub weight: f64,
}

fn trapezoid(points: usize, half_width: f64) -> Vec<(f64, f64)> {
    if points == 0 {
        return Vec::new();
    }
    if points == 1 {
        return vec![(0.0, 2.0 * half_width)];
    }
    let step = 2.0 * half_width / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let w = if i == 0 || i == points - 1 { step / 2.0 } else { step };
            (-half_width + step * i as f64, w)
        })
        .collect()
}

/// Discrete modes followed by the continuous τ-grid.
pub fn mode_table(params: &ModelParams) -> Result<Vec<Mode>, FieldError> {
    if params.n < 2 {
        return Err(FieldError::InvalidParams("N must be at least 2".into()));
    }
    let mut modes = Vec::new();
    for entry in discrete_spectrum(params.n).entries {
        let eig = match params.variant {
            SpectrumVariant::Printed => entry.eig_printed,
            SpectrumVariant::Substituted => entry.eig_substituted,
        };
        let kappa = params.m2 + eig;
        if kappa <= 0.0 {
            return Err(FieldError::NonPositiveDenominator(kappa));
        }
        modes.push(Mode { entry, kappa, quad_weight: 1.0, weight: kappa });
    }
    let grid = trapezoid(params.tau_points, params.tau_max);
    let m = params.n as f64 - 1.0;
    for &(t1, w1) in &grid {
        for &(t2, w2) in &grid {
            let eig = 0.25 * (2.0 * m * m + t1 * t1 + t2 * t2);
            let kappa = params.m2 + eig;
            if kappa <= 0.0 {
                return Err(FieldError::NonPositiveDenominator(kappa));
            }
            let entry = SpectrumEntry {
                kind: ModeLabel::Continuous { tau1: t1, tau2: t2 },
                eig_printed: eig,
                eig_substituted: eig,
                tau_im: (0.0, 0.0),
                degeneracy_note: "continuous grid point".into(),
            };
            modes.push(Mode { entry, kappa, quad_weight: w1 * w2, weight: kappa * w1 * w2 });
        }
    }
    Ok(modes)
}

/// Real coefficients, one per mode of the table, in table order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldCoefficients {
    pub discrete: Vec<((u32, u32), f64)>,
    /// ((τ₁, τ₂), quadrature weight, C).
    pub continuous: Vec<((f64, f64), f64, f64)>,
}

impl FieldCoefficients {
    pub fn from_values(modes: &[Mode], values: &[f64]) -> Result<Self, FieldError> {
        if modes.len() != values.len() {
            return Err(FieldError::DimensionMismatch { expected: modes.len(), got: values.len() });
        }
        let mut out = Self { discrete: Vec::new(), continuous: Vec::new() };
        for (m, &v) in modes.iter().zip(values) {
            match m.entry.kind {
                ModeLabel::Discrete { l1, l2 } => out.discrete.push(((l1, l2), v)),
                ModeLabel::Continuous { tau1, tau2 } => out.continuous.push(((tau1, tau2), m.quad_weight, v)),
            }
        }
        Ok(out)
    }

    pub fn values(&self) -> Vec<f64> {
        self.discrete.iter().map(|d| d.1).chain(self.continuous.iter().map(|c| c.2)).collect()
    }

    pub fn len(&self) -> usize {
        self.discrete.len() + self.continuous.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// ½·Σ weight·C².
pub fn free_action(params: &ModelParams, coeffs: &FieldCoefficients) -> Result<f64, FieldError> {
    let modes = mode_table(params)?;
    let values = coeffs.values();
    if values.len() != modes.len() {
        return Err(FieldError::DimensionMismatch { expected: modes.len(), got: values.len() });
    }
    Ok(0.5 * modes.iter().zip(&values).map(|(m, v)| m.weight * v * v).sum::<f64>())
}

fn draw(modes: &[Mode], rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for (o, m) in out.iter_mut().zip(modes) {
        let z: f64 = rng.sample(StandardNormal);
        *o = z / m.weight.sqrt();
    }
}

/// One draw of independent centred Gaussians with variance 1/weight.
pub fn sample_free_field(params: &ModelParams, seed: u64) -> Result<FieldCoefficients, FieldError> {
    let modes = mode_table(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![0.0; modes.len()];
    draw(&modes, &mut rng, &mut v);
    FieldCoefficients::from_values(&modes, &v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointRow {
    pub label: ModeLabel,
    /// quad_weight·⟨C²⟩.
    pub empirical: f64,
    pub analytic: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointTable {
    pub rows: Vec<TwoPointRow>,
    /// max |z| of ⟨C_iC_j⟩, i ≠ j, against 0.
    pub offdiag_max_z: f64,
    /// Mean of the free action over the draws.
    pub mean_action: f64,
    pub draws: usize,
}

/// Empirical second moments of `draws` samples against the propagator display.
pub fn two_point_check(params: &ModelParams, draws: usize, seed: u64) -> Result<TwoPointTable, FieldError> {
    if draws < 2 {
        return Err(FieldError::InvalidParams("need at least two draws".into()));
    }
    let modes = mode_table(params)?;
    let k = modes.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![0.0; k];
    let (mut s2, mut s4) = (vec![0.0; k], vec![0.0; k]);
    let (mut cross, mut cross2) = (vec![0.0; k * k], vec![0.0; k * k]);
    let mut action = 0.0;
    for _ in 0..draws {
        draw(&modes, &mut rng, &mut v);
        for i in 0..k {
            let x2 = v[i] * v[i];
            s2[i] += x2;
            s4[i] += x2 * x2;
            action += 0.5 * modes[i].weight * x2;
            for j in (i + 1)..k {
                let p = v[i] * v[j];
                cross[i * k + j] += p;
                cross2[i * k + j] += p * p;
            }
        }
    }
    let nd = draws as f64;
    let mut rows = Vec::with_capacity(k);
    for (i, m) in modes.iter().enumerate() {
        let tau = match m.entry.kind {
            ModeLabel::Discrete { .. } => (c(0.0, m.entry.tau_im.0), c(0.0, m.entry.tau_im.1)),
            ModeLabel::Continuous { tau1, tau2 } => (c(tau1, 0.0), c(tau2, 0.0)),
        };
        let analytic = propagator_complex(params, tau)?.re;
        let mean2 = s2[i] / nd;
        let se = ((s4[i] / nd - mean2 * mean2).max(0.0) / nd).sqrt();
        let empirical = mean2 * m.quad_weight;
        rows.push(TwoPointRow {
            label: m.entry.kind,
            empirical,
            analytic,
            z: (empirical - analytic) / (se * m.quad_weight),
        });
    }
    let mut offdiag_max_z: f64 = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            let mean = cross[i * k + j] / nd;
            let se = ((cross2[i * k + j] / nd - mean * mean).max(0.0) / nd).sqrt();
            offdiag_max_z = offdiag_max_z.max((mean / se).abs());
        }
    }
    Ok(TwoPointTable { rows, offdiag_max_z, mean_action: action / nd, draws })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_weights_sum_to_width() {
        let s: f64 = trapezoid(7, 3.0).iter().map(|p| p.1).sum();
        assert!((s - 6.0).abs() < 1e-12);
    }

    #[test]
    fn variant_parses() {
        assert_eq!("printed".parse::<SpectrumVariant>().unwrap(), SpectrumVariant::Printed);
        assert!("other".parse::<SpectrumVariant>().is_err());
    }
}
