//! The invariant Laplacian Δ_N on D, its radial part, and the spectrum bookkeeping.

use thiserror::Error;

use crate::algebra::root_data;
use crate::diff::richardson_mixed;
use crate::group::{mobius_action, DomainPoint, GroupElement, GroupError};
use crate::{c, Mat2, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LaplacianError {
    #[error("radial point within 2h of a chamber wall (distance {0:.3e})")]
    ChamberWallTooClose(f64),
    #[error("point within 2h of the boundary of D (margin {0:.3e})")]
    BoundaryTooClose(f64),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// (λ₁, λ₂) in the open chamber λ₁ > λ₂ > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub lambda: (f64, f64),
}

impl RadialPoint {
    pub fn new(l1: f64, l2: f64) -> Result<Self, LaplacianError> {
        let p = Self { lambda: (l1, l2) };
        if p.wall_distance() <= 0.0 {
            return Err(LaplacianError::ChamberWallTooClose(p.wall_distance()));
        }
        Ok(p)
    }

    fn wall_distance(&self) -> f64 {
        self.lambda.1.min(self.lambda.0 - self.lambda.1)
    }

    /// Z = diag(th λ₁, th λ₂).
    pub fn domain_point(&self) -> DomainPoint {
        DomainPoint { z: Mat2::new(c(self.lambda.0.tanh(), 0.0), C64::default(), C64::default(), c(self.lambda.1.tanh(), 0.0)) }
    }
}

/// ω(λ) = 2(ch 2λ₁ − ch 2λ₂).
pub fn radial_omega(l1: f64, l2: f64) -> f64 {
    2.0 * ((2.0 * l1).cosh() - (2.0 * l2).cosh())
}

/// ∂_i and ∂_i² of f at (l1, l2), central differences with one Richardson level.
fn partials<F: Fn(f64, f64) -> f64>(f: &F, l: (f64, f64), h: f64) -> ([f64; 2], [f64; 2]) {
    let first = |i: usize, s: f64| {
        let (a, b) = if i == 0 { (f(l.0 + s, l.1), f(l.0 - s, l.1)) } else { (f(l.0, l.1 + s), f(l.0, l.1 - s)) };
        (a - b) / (2.0 * s)
    };
    let second = |i: usize, s: f64| {
        let (a, b) = if i == 0 { (f(l.0 + s, l.1), f(l.0 - s, l.1)) } else { (f(l.0, l.1 + s), f(l.0, l.1 - s)) };
        (a - 2.0 * f(l.0, l.1) + b) / (s * s)
    };
    let rich = |g: &dyn Fn(usize, f64) -> f64, i: usize| (4.0 * g(i, h / 2.0) - g(i, h)) / 3.0;
    ([rich(&first, 0), rich(&first, 1)], [rich(&second, 0), rich(&second, 1)])
}

fn check_chamber(p: &RadialPoint, h: f64) -> Result<(), LaplacianError> {
    if p.wall_distance() < 2.0 * h {
        return Err(LaplacianError::ChamberWallTooClose(p.wall_distance()));
    }
    Ok(())
}

/// ω⁻¹·Σᵢ(¼Lᵢ − (N/2) th λᵢ ∂ᵢ)(ωφ) with Lᵢ = ∂ᵢ² + 2 cth(2λᵢ) ∂ᵢ.
pub fn radial_apply<F: Fn(f64, f64) -> f64>(n: u32, phi: F, p: &RadialPoint, h: f64) -> Result<f64, LaplacianError> {
    check_chamber(p, h)?;
    let psi = |a: f64, b: f64| radial_omega(a, b) * phi(a, b);
    let (d1, d2) = partials(&psi, p.lambda, h);
    let l = [p.lambda.0, p.lambda.1];
    let sum: f64 = (0..2)
        .map(|i| 0.25 * (d2[i] + 2.0 * d1[i] / (2.0 * l[i]).tanh()) - 0.5 * n as f64 * l[i].tanh() * d1[i])
        .sum();
    Ok(sum / radial_omega(l[0], l[1]))
}

/// Radial part of full_apply: ¼(Σ∂ᵢ² + Σ_{α>0} m_α cth α(λ) ∂_α)φ − (N/2) Σ th λᵢ ∂ᵢφ.
pub fn radial_part<F: Fn(f64, f64) -> f64>(n: u32, phi: F, p: &RadialPoint, h: f64) -> Result<f64, LaplacianError> {
    check_chamber(p, h)?;
    let (d1, d2) = partials(&phi, p.lambda, h);
    let l = [p.lambda.0, p.lambda.1];
    let mut lb = d2[0] + d2[1];
    for r in root_data().positive_roots {
        let (a, b) = (r.coeffs.0 as f64, r.coeffs.1 as f64);
        lb += r.multiplicity as f64 / (a * l[0] + b * l[1]).tanh() * (a * d1[0] + b * d1[1]);
    }
    let drift: f64 = (0..2).map(|i| l[i].tanh() * d1[i]).sum();
    Ok(0.25 * lb - 0.5 * n as f64 * drift)
}

fn unit(k: usize, v: C64) -> Mat2 {
    let mut e = Mat2::zeros();
    e[(k / 2, k % 2)] = v;
    e
}

/// Δ_N f(Z) = Σ P_{ia}Q_{bc}[∂_{ic}∂̄_{ab} f + N (∂_{ic} log det Q)(∂̄_{ab} f)], P = E − ZZ†, Q = E − Z†Z.
///
/// Equivalently tr[P·M̄·Q·Mᵀ] with M_{ij} = ∂/∂z_{ij}; P and Q are frozen at Z.
pub fn full_apply<F: Fn(&Mat2) -> C64>(n: u32, f: F, z: &DomainPoint, h: f64) -> Result<C64, LaplacianError> {
    let margin = z.margin();
    if margin < 2.0 * h {
        return Err(LaplacianError::BoundaryTooClose(margin));
    }
    let zz = z.z;
    let e = Mat2::identity();
    let p = e - zz * zz.adjoint();
    let q = e - zz.adjoint() * zz;
    let dlog = -(q.try_inverse().ok_or(LaplacianError::BoundaryTooClose(margin))? * zz.adjoint()).transpose();
    let (one, i) = (c(1.0, 0.0), c(0.0, 1.0));

    let mixed = |du: Mat2, dv: Mat2| {
        let g = |x: &[f64]| f(&(zz + du * c(x[0], 0.0) + dv * c(x[1], 0.0)));
        richardson_mixed(&g, 2, h).value
    };
    let first = |dv: Mat2| {
        let g = |x: &[f64]| f(&(zz + dv * c(x[0], 0.0)));
        richardson_mixed(&g, 1, h).value
    };

    let mut dbar = [C64::default(); 4];
    for (v, d) in dbar.iter_mut().enumerate() {
        *d = (first(unit(v, one)) + first(unit(v, i)) * i) * 0.5;
    }

    let mut total = C64::default();
    for u in 0..4 {
        let (ii, cc) = (u / 2, u % 2);
        for v in 0..4 {
            let (a, b) = (v / 2, v % 2);
            let w = p[(ii, a)] * q[(b, cc)];
            if w == C64::default() {
                continue;
            }
            let xx = mixed(unit(u, one), unit(v, one));
            let xy = mixed(unit(u, one), unit(v, i));
            let yx = mixed(unit(u, i), unit(v, one));
            let yy = mixed(unit(u, i), unit(v, i));
            let dd = (xx + xy * i - yx * i + yy) * 0.25;
            total += w * (dd + dlog[(ii, cc)] * dbar[v] * n as f64);
        }
    }
    Ok(total)
}

/// |Δ_N(T_g f)(Z) − (T_g Δ_N f)(Z)| with T_g f(Z) = det(cZ+d)^{−N} f(gZ).
pub fn invariance_residual<F: Fn(&Mat2) -> C64>(
    n: u32,
    g: &GroupElement,
    f: F,
    z: &DomainPoint,
    h: f64,
) -> Result<f64, LaplacianError> {
    let tg = |w: &Mat2| -> C64 {
        let den = g.c() * w + g.d();
        match den.try_inverse() {
            Some(inv) => den.determinant().powi(-(n as i32)) * f(&((g.a() * w + g.b()) * inv)),
            None => c(f64::NAN, f64::NAN),
        }
    };
    let lhs = full_apply(n, tg, z, h)?;
    let gz = mobius_action(g, z)?;
    let rhs = (g.c() * z.z + g.d()).determinant().powi(-(n as i32)) * full_apply(n, &f, &gz, h)?;
    Ok((lhs - rhs).norm())
}

/// −¼[2(N−1)² + τ₁² + τ₂²].
pub fn eigenvalue(n: u32, tau: (C64, C64)) -> C64 {
    let m = n as f64 - 1.0;
    -(tau.0 * tau.0 + tau.1 * tau.1 + 2.0 * m * m) * 0.25
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeLabel {
    Discrete { l1: u32, l2: u32 },
    Continuous { tau1: f64, tau2: f64 },
}

/// A spectral label with both discrete eigenvalue readings.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub kind: ModeLabel,
    /// (N−1)(l₁+l₂) + l₁² + l₂².
    pub eig_printed: f64,
    /// −eigenvalue(N, τ) at τ_j = −i(N−1−2l_j).
    pub eig_substituted: f64,
    /// Imaginary parts of (τ₁, τ₂).
    pub tau_im: (f64, f64),
    pub degeneracy_note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectrum {
    pub n: u32,
    pub entries: Vec<SpectrumEntry>,
    pub enumerated_count: usize,
    /// ½k(k−1) with k = [(N−1)/2].
    pub formula_count: usize,
}

/// All (l₁, l₂) with 0 ≤ l_j ≤ [(N−1)/2].
pub fn discrete_spectrum(n: u32) -> DiscreteSpectrum {
    let k = (n.saturating_sub(1) / 2) as usize;
    let m = n as f64 - 1.0;
    let mut entries = Vec::new();
    for l1 in 0..=k as u32 {
        for l2 in 0..=k as u32 {
            let tau_im = (2.0 * l1 as f64 - m, 2.0 * l2 as f64 - m);
            let sub = -eigenvalue(n, (c(0.0, tau_im.0), c(0.0, tau_im.1)));
            let (a, b) = (l1 as f64, l2 as f64);
            let note = if l1 == l2 { "symmetric label" } else { "paired with the swapped label" };
            entries.push(SpectrumEntry {
                kind: ModeLabel::Discrete { l1, l2 },
                eig_printed: m * (a + b) + a * a + b * b,
                eig_substituted: sub.re,
                tau_im,
                degeneracy_note: note.to_string(),
            });
        }
    }
    DiscreteSpectrum { n, enumerated_count: entries.len(), formula_count: k * k.saturating_sub(1) / 2, entries }
}

/// ½(N−1)², the infimum of −eigenvalue over real τ.
pub fn continuous_floor(n: u32) -> f64 {
    0.5 * (n as f64 - 1.0).powi(2)
}
