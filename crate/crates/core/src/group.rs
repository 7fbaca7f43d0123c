//! SU(2,2): membership, exponential map, Möbius action on D, KAK decomposition,
//! Haar radial density, Bergman kernel, the measure dμ_N and the holomorphic representation.

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix4, Vector2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{gamma, AlgebraElement, GeneratorBasis, DIM};
use crate::diff::richardson_mixed;
use crate::{block, blocks, c, max_abs, Mat2, Mat4, C64};

const MEMBER_TOL: f64 = 1e-10;
const SINGULAR_TOL: f64 = 1e-14;
const MC_SHARDS: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("matrix is not in SU(2,2): Γ residual {gamma:.3e}, det residual {det:.3e}")]
    NotMember { gamma: f64, det: f64 },
    #[error("det(cZ+d) = {0:.3e} is numerically singular")]
    SingularDenominator(f64),
    #[error("point is outside the domain (spectral norm {0})")]
    OutsideDomain(f64),
    #[error("level N = {0} is below 4; the measure is not normalizable")]
    InvalidLevel(u32),
    #[error("point too close to the boundary (margin {0:.3e})")]
    BoundaryTooClose(f64),
}

/// Residuals of the defining relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipReport {
    /// max |g†Γg − Γ|.
    pub gamma_residual: f64,
    /// |det g − 1|.
    pub det_residual: f64,
    /// a†a = E + c†c, d†d = E + b†b, a†b = c†d.
    pub set_a: [f64; 3],
    /// aa† = E + bb†, dd† = E + cc†, ac† = bd†.
    pub set_b: [f64; 3],
    /// The middle relation of the first set as printed, c†d = E + b†b.
    pub printed_cd_residual: f64,
    pub member: bool,
}

pub fn is_member(m: &Mat4) -> MembershipReport {
    let gm = gamma();
    let gamma_residual = max_abs(&(m.adjoint() * gm * m - gm));
    let det_residual = (m.determinant() - c(1.0, 0.0)).norm();
    let (a, b, cc, d) = (block(m, 0, 0), block(m, 0, 1), block(m, 1, 0), block(m, 1, 1));
    let e = Mat2::identity();
    let set_a = [
        max_abs(&(a.adjoint() * a - e - cc.adjoint() * cc)),
        max_abs(&(d.adjoint() * d - e - b.adjoint() * b)),
        max_abs(&(a.adjoint() * b - cc.adjoint() * d)),
    ];
    let set_b = [
        max_abs(&(a * a.adjoint() - e - b * b.adjoint())),
        max_abs(&(d * d.adjoint() - e - cc * cc.adjoint())),
        max_abs(&(a * cc.adjoint() - b * d.adjoint())),
    ];
    let printed_cd_residual = max_abs(&(cc.adjoint() * d - e - b.adjoint() * b));
    MembershipReport {
        gamma_residual,
        det_residual,
        set_a,
        set_b,
        printed_cd_residual,
        member: gamma_residual < MEMBER_TOL && det_residual < MEMBER_TOL,
    }
}

/// A 4×4 matrix in SU(2,2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    m: Mat4,
}

impl GroupElement {
    pub fn new(m: Mat4) -> Result<Self, GroupError> {
        let r = is_member(&m);
        if !r.member {
            return Err(GroupError::NotMember { gamma: r.gamma_residual, det: r.det_residual });
        }
        Ok(Self { m })
    }

    /// Wraps a matrix known to be in the group by construction.
    pub fn from_matrix_unchecked(m: Mat4) -> Self {
        Self { m }
    }

    pub fn identity() -> Self {
        Self { m: Mat4::identity() }
    }

    /// Block-diagonal element diag(k′, k″).
    pub fn compact(kp: &Mat2, kpp: &Mat2) -> Self {
        Self { m: blocks(kp, &Mat2::zeros(), &Mat2::zeros(), kpp) }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn a(&self) -> Mat2 {
        block(&self.m, 0, 0)
    }

    pub fn b(&self) -> Mat2 {
        block(&self.m, 0, 1)
    }

    pub fn c(&self) -> Mat2 {
        block(&self.m, 1, 0)
    }

    pub fn d(&self) -> Mat2 {
        block(&self.m, 1, 1)
    }

    /// g⁻¹ = Γ g† Γ.
    pub fn inverse(&self) -> Self {
        let gm = gamma();
        Self { m: gm * self.m.adjoint() * gm }
    }

    pub fn report(&self) -> MembershipReport {
        is_member(&self.m)
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, o: GroupElement) -> GroupElement {
        GroupElement { m: self.m * o.m }
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;
    fn mul(self, o: &GroupElement) -> GroupElement {
        GroupElement { m: self.m * o.m }
    }
}

/// e^{Σ ξ X}.
pub fn exp_generator(basis: &GeneratorBasis, xi: &AlgebraElement) -> GroupElement {
    GroupElement { m: basis.matrix(xi).exp() }
}

/// The boost δ_Λ = [[C, S], [S, C]], C = diag(ch λᵢ), S = diag(sh λᵢ).
pub fn boost(l1: f64, l2: f64) -> GroupElement {
    let ch = Mat2::from_diagonal(&Vector2::new(c(l1.cosh(), 0.0), c(l2.cosh(), 0.0)));
    let sh = Mat2::from_diagonal(&Vector2::new(c(l1.sinh(), 0.0), c(l2.sinh(), 0.0)));
    GroupElement { m: blocks(&ch, &sh, &sh, &ch) }
}

/// Gauss factors (t₊, t₀, t₋) with δ_Λ = t₊·t₀·t₋.
pub fn gauss_factors(l1: f64, l2: f64) -> [Mat4; 3] {
    let e = Mat2::identity();
    let z = Mat2::zeros();
    let t = Mat2::from_diagonal(&Vector2::new(c(l1.tanh(), 0.0), c(l2.tanh(), 0.0)));
    let ch = Mat2::from_diagonal(&Vector2::new(c(l1.cosh(), 0.0), c(l2.cosh(), 0.0)));
    let ch_inv = Mat2::from_diagonal(&Vector2::new(c(1.0 / l1.cosh(), 0.0), c(1.0 / l2.cosh(), 0.0)));
    [blocks(&e, &z, &t, &e), blocks(&ch, &z, &z, &ch_inv), blocks(&e, &t, &z, &e)]
}

/// Largest singular value of a 2×2 matrix.
pub fn spectral_norm(z: &Mat2) -> f64 {
    z.singular_values().max()
}

/// A point Z of D = {Z : Z†Z < E}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainPoint {
    pub z: Mat2,
}

impl DomainPoint {
    pub fn new(z: Mat2) -> Result<Self, GroupError> {
        let n = spectral_norm(&z);
        if n >= 1.0 || !n.is_finite() {
            return Err(GroupError::OutsideDomain(n));
        }
        Ok(Self { z })
    }

    pub fn origin() -> Self {
        Self { z: Mat2::zeros() }
    }

    /// Distance of the spectral norm from 1.
    pub fn margin(&self) -> f64 {
        1.0 - spectral_norm(&self.z)
    }
}

fn denominator(g: &GroupElement, z: &Mat2) -> Result<Mat2, GroupError> {
    let den = g.c() * z + g.d();
    let det = den.determinant().norm();
    if det < SINGULAR_TOL {
        return Err(GroupError::SingularDenominator(det));
    }
    Ok(den)
}

/// Z′ = (aZ + b)(cZ + d)⁻¹.
pub fn mobius_action(g: &GroupElement, z: &DomainPoint) -> Result<DomainPoint, GroupError> {
    let den = denominator(g, &z.z)?;
    let inv = den.try_inverse().ok_or(GroupError::SingularDenominator(0.0))?;
    DomainPoint::new((g.a() * z.z + g.b()) * inv)
}

/// Cartan factors g = k·δ_Λ·q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KakFactors {
    pub k: GroupElement,
    pub lambda: (f64, f64),
    pub q: GroupElement,
    /// λ₁ = λ₂ within 1e-10; k and q are then not unique.
    pub degenerate: bool,
    /// max |k δ q − g|.
    pub residual: f64,
}

impl KakFactors {
    pub fn delta(&self) -> GroupElement {
        boost(self.lambda.0, self.lambda.1)
    }
}

pub fn kak_decompose(g: &GroupElement) -> KakFactors {
    let m = g.matrix();
    let eig = (m * m.adjoint()).symmetric_eigen();
    let sqrt_vals = eig.eigenvalues.map(|e| c(e.max(0.0).sqrt(), 0.0));
    let p = &eig.eigenvectors * Matrix4::from_diagonal(&sqrt_vals) * eig.eigenvectors.adjoint();

    let svd = block(&p, 0, 1).svd(true, true);
    let mut u = svd.u.expect("left singular vectors requested");
    let mut w = svd.v_t.expect("right singular vectors requested").adjoint();
    let mut sigma = [svd.singular_values[0], svd.singular_values[1]];
    if sigma[0] < sigma[1] {
        sigma.swap(0, 1);
        u.swap_columns(0, 1);
        w.swap_columns(0, 1);
    }
    let phase = -(u.determinant() * w.determinant()).arg() / 2.0;
    let fix = Mat2::from_diagonal(&Vector2::new(C64::from_polar(1.0, phase), c(1.0, 0.0)));
    u *= fix;
    w *= fix;

    let lambda = (sigma[0].asinh(), sigma[1].asinh());
    let k = GroupElement::compact(&u, &w);
    let q = GroupElement { m: boost(-lambda.0, -lambda.1).m * k.m.adjoint() * m };
    let residual = max_abs(&(k.m * boost(lambda.0, lambda.1).m * q.m - m));
    KakFactors { k, lambda, q, degenerate: (lambda.0 - lambda.1).abs() < 1e-10, residual }
}

/// sh²(λ₁+λ₂)·sh²(λ₁−λ₂)·sh(2λ₁)·sh(2λ₂).
pub fn haar_radial_density(l1: f64, l2: f64) -> f64 {
    (l1 + l2).sinh().powi(2) * (l1 - l2).sinh().powi(2) * (2.0 * l1).sinh() * (2.0 * l2).sinh()
}

/// det(E − ZW†)^{−N}.
pub fn bergman_kernel(z: &DomainPoint, w: &DomainPoint, n: u32) -> C64 {
    (Mat2::identity() - z.z * w.z.adjoint()).determinant().powi(-(n as i32))
}

/// c_N = π⁻⁴(N−1)(N−2)²(N−3).
pub fn c_n(n: u32) -> f64 {
    let n = n as f64;
    (n - 1.0) * (n - 2.0).powi(2) * (n - 3.0) / PI.powi(4)
}

/// c_N·det(E − Z†Z)^{N−4}.
pub fn measure_density(z: &DomainPoint, n: u32) -> Result<f64, GroupError> {
    if n < 4 {
        return Err(GroupError::InvalidLevel(n));
    }
    let h = (Mat2::identity() - z.z.adjoint() * z.z).determinant().re;
    Ok(c_n(n) * h.powi(n as i32 - 4))
}

/// Hessian ∂_i ∂̄_j log K(Z, Z) over (z₁₁, z₁₂, z₂₁, z₂₂), from real central differences.
pub fn kahler_metric(z: &DomainPoint, n: u32, step: f64) -> Result<Matrix4<C64>, GroupError> {
    let margin = z.margin();
    if margin < 2.0 * step {
        return Err(GroupError::BoundaryTooClose(margin));
    }
    let logk = |zz: &Mat2| -(n as f64) * (Mat2::identity() - zz * zz.adjoint()).determinant().re.ln();
    let unit = |k: usize, v: C64| {
        let mut e = Mat2::zeros();
        e[(k / 2, k % 2)] = v;
        e
    };
    let second = |di: Mat2, dj: Mat2| {
        let f = |x: &[f64]| c(logk(&(z.z + di * c(x[0], 0.0) + dj * c(x[1], 0.0))), 0.0);
        richardson_mixed(&f, 2, step).value.re
    };
    let (one, i) = (c(1.0, 0.0), c(0.0, 1.0));
    Ok(Matrix4::from_fn(|a, b| {
        let xx = second(unit(a, one), unit(b, one));
        let xy = second(unit(a, one), unit(b, i));
        let yx = second(unit(a, i), unit(b, one));
        let yy = second(unit(a, i), unit(b, i));
        c(xx + yy, xy - yx) * 0.25
    }))
}

/// det(cZ+d)^{−N}·f(gZ).
pub fn rep_apply<F>(g: &GroupElement, n: u32, f: F, z: &DomainPoint) -> Result<C64, GroupError>
where
    F: Fn(&DomainPoint) -> C64,
{
    let den = denominator(g, &z.z)?;
    let gz = mobius_action(g, z)?;
    Ok(den.determinant().powi(-(n as i32)) * f(&gz))
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub acceptance: f64,
}

/// Uniform sample from the unit disc.
pub fn unit_disc<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>())
}

/// MC estimate of ∫_D f dμ_N from per-entry unit-disc proposals with spectral-norm rejection.
pub fn mc_integrate<F>(n: u32, samples: u64, seed: u64, f: F) -> Result<McEstimate, GroupError>
where
    F: Fn(&DomainPoint) -> f64 + Sync,
{
    if n < 4 {
        return Err(GroupError::InvalidLevel(n));
    }
    let scale = c_n(n) * PI.powi(4);
    let per = samples / MC_SHARDS;
    let sums: Vec<(f64, f64, u64)> = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let count = per + if shard == 0 { samples % MC_SHARDS } else { 0 };
            let (mut s1, mut s2, mut acc) = (0.0, 0.0, 0u64);
            for _ in 0..count {
                let z = Mat2::from_fn(|_, _| unit_disc(&mut rng));
                if let Ok(p) = DomainPoint::new(z) {
                    let h = (Mat2::identity() - z.adjoint() * z).determinant().re;
                    let w = scale * h.powi(n as i32 - 4) * f(&p);
                    s1 += w;
                    s2 += w * w;
                    acc += 1;
                }
            }
            (s1, s2, acc)
        })
        .collect();
    let (s1, s2, acc) = sums.iter().fold((0.0, 0.0, 0), |(a, b, k), &(x, y, z)| (a + x, b + y, k + z));
    let total = samples as f64;
    let mean = s1 / total;
    let var = (s2 / total - mean * mean).max(0.0);
    Ok(McEstimate { estimate: mean, std_error: (var / total).sqrt(), acceptance: acc as f64 / total })
}

/// MC estimate of ∫_D dμ_N.
pub fn mc_normalization(n: u32, samples: u64, seed: u64) -> Result<McEstimate, GroupError> {
    mc_integrate(n, samples, seed, |_| 1.0)
}

/// Algebra element with uniformly random direction and norm uniform in [0, max_norm].
pub fn random_algebra_element<R: Rng + ?Sized>(rng: &mut R, max_norm: f64) -> AlgebraElement {
    let v = AlgebraElement(std::array::from_fn(|_| rng.random::<f64>() * 2.0 - 1.0));
    let n = v.norm();
    if n == 0.0 {
        return AlgebraElement([0.0; DIM]);
    }
    v * (max_norm * rng.random::<f64>() / n)
}

/// Uniformly random SU(2) matrix.
pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    su2_from_unit_cube(u1, u2, u3)
}

/// Maps a point of [0,1)³ to SU(2) (uniform image of the uniform measure).
pub fn su2_from_unit_cube(u1: f64, u2: f64, u3: f64) -> Mat2 {
    let (r1, r2) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (t1, t2) = (2.0 * PI * u2, 2.0 * PI * u3);
    let alpha = C64::from_polar(r1, t1);
    let beta = C64::from_polar(r2, t2);
    Mat2::new(alpha, -beta.conj(), beta, alpha.conj())
}

/// Random (k′, k″) with det k′·det k″ = 1.
pub fn random_compact_pair<R: Rng + ?Sized>(rng: &mut R) -> (Mat2, Mat2) {
    let theta = 2.0 * PI * rng.random::<f64>();
    let ph = C64::from_polar(1.0, theta);
    (random_su2(rng) * ph, random_su2(rng) * ph.conj())
}

/// Random point of D with singular values below max_norm.
pub fn random_domain_point<R: Rng + ?Sized>(rng: &mut R, max_norm: f64) -> DomainPoint {
    let s = Mat2::from_diagonal(&Vector2::new(
        c(max_norm * rng.random::<f64>(), 0.0),
        c(max_norm * rng.random::<f64>(), 0.0),
    ));
    let (u, v) = random_compact_pair(rng);
    DomainPoint { z: u * s * v }
}
