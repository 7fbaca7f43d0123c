//! Coherent states, the symbol kernel ω(g, x), coordinate functions and the star product.
//!
//! With g_x = kδk† and z = k′·diag(th λ)·k″†, the kernel is
//! ω(g, x) = det(E − z†z)^N · det(d + cz − z†b − z†az)^{−N}.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector2};
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{GeneratorBasis, StructureConstants, DIM};
use crate::diff::{richardson_first, richardson_mixed, Estimate};
use crate::group::{boost, su2_from_unit_cube, GroupElement};
use crate::{block, blocks, c, max_abs, Mat2, Mat4, C64};

const SINGULAR_TOL: f64 = 1e-14;
const UNITARY_TOL: f64 = 1e-10;
/// Base step and noise budget per derivative order 1..=4.
const STEPS: [f64; 4] = [1e-3, 1e-3, 4e-3, 1e-2];
const BUDGETS: [f64; 4] = [1e-8, 1e-4, 1e-3, 1e-2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoherentError {
    #[error("invalid coherent parameter: {0}")]
    InvalidParam(String),
    #[error("symbol denominator is singular (|det| = {0:.3e})")]
    SingularSymbol(f64),
    #[error("symbol has imaginary part {0:.3e}")]
    NonRealSymbol(f64),
    #[error("order-{order} derivative: Richardson levels disagree by {error:.3e}")]
    NoiseBudgetExceeded { order: usize, error: f64 },
    #[error("at most 4 indices are supported, got {0}")]
    TooManyIndices(usize),
    #[error("design matrix is rank deficient")]
    RankDeficientFit,
}

/// Point x of D given by (k′, k″, λ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParam {
    pub kp: Mat2,
    pub kpp: Mat2,
    pub lambda: (f64, f64),
}

fn is_unitary(u: &Mat2) -> bool {
    max_abs(&(u * u.adjoint() - Mat2::identity())) < UNITARY_TOL
}

impl CoherentParam {
    pub fn new(kp: Mat2, kpp: Mat2, lambda: (f64, f64)) -> Result<Self, CoherentError> {
        if !is_unitary(&kp) || !is_unitary(&kpp) {
            return Err(CoherentError::InvalidParam("k′ and k″ must be unitary".into()));
        }
        if (kp.determinant() * kpp.determinant() - c(1.0, 0.0)).norm() > UNITARY_TOL {
            return Err(CoherentError::InvalidParam("det k′·det k″ must be 1".into()));
        }
        if !(lambda.0 >= lambda.1 && lambda.1 >= 0.0 && lambda.0.is_finite()) {
            return Err(CoherentError::InvalidParam(format!("need λ₁ ≥ λ₂ ≥ 0, got {lambda:?}")));
        }
        Ok(Self { kp, kpp, lambda })
    }

    /// x₀.
    pub fn origin() -> Self {
        Self { kp: Mat2::identity(), kpp: Mat2::identity(), lambda: (0.0, 0.0) }
    }

    pub fn from_boost(l1: f64, l2: f64) -> Result<Self, CoherentError> {
        Self::new(Mat2::identity(), Mat2::identity(), (l1, l2))
    }

    pub fn k(&self) -> GroupElement {
        GroupElement::compact(&self.kp, &self.kpp)
    }

    /// z = k′·diag(th λ₁, th λ₂)·k″†.
    pub fn z(&self) -> Mat2 {
        let t = Mat2::from_diagonal(&Vector2::new(c(self.lambda.0.tanh(), 0.0), c(self.lambda.1.tanh(), 0.0)));
        self.kp * t * self.kpp.adjoint()
    }

    /// H_x with g_x = exp(H_x) = k·exp([[0,Λ],[Λ,0]])·k†.
    pub fn generator(&self) -> Mat4 {
        let l = Mat2::new(c(self.lambda.0, 0.0), C64::default(), C64::default(), c(self.lambda.1, 0.0));
        let k = self.k();
        k.matrix() * blocks(&Mat2::zeros(), &l, &l, &Mat2::zeros()) * k.matrix().adjoint()
    }

    /// The point k₀·x, i.e. (k₀′k′, k₀″k″, λ).
    pub fn transported(&self, k0: &GroupElement) -> Self {
        Self { kp: k0.a() * self.kp, kpp: k0.d() * self.kpp, lambda: self.lambda }
    }
}

/// g_x = k·δ_Λ·k†.
pub fn coherent_group_element(x: &CoherentParam) -> GroupElement {
    let k = x.k();
    GroupElement::from_matrix_unchecked(k.matrix() * boost(x.lambda.0, x.lambda.1).matrix() * k.matrix().adjoint())
}

fn power_ratio(h: C64, den: Mat2, weight: u32) -> Result<C64, CoherentError> {
    let det = den.determinant();
    if det.norm() < SINGULAR_TOL {
        return Err(CoherentError::SingularSymbol(det.norm()));
    }
    Ok((h / det).powi(weight as i32))
}

/// ω(g, x) = det(E − z†z)^N·det(d + cz − z†b − z†az)^{−N}.
pub fn omega(g: &GroupElement, x: &CoherentParam, weight: u32) -> Result<C64, CoherentError> {
    let z = x.z();
    let zd = z.adjoint();
    let h = (Mat2::identity() - zd * z).determinant();
    power_ratio(h, g.d() + g.c() * z - zd * g.b() - zd * g.a() * z, weight)
}

/// The kernel with z and z† exchanged: det(E − z†z)^N·det(d + cz† − zb − zaz†)^{−N}.
pub fn omega_printed(g: &GroupElement, x: &CoherentParam, weight: u32) -> Result<C64, CoherentError> {
    let z = x.z();
    let zd = z.adjoint();
    let h = (Mat2::identity() - zd * z).determinant();
    power_ratio(h, g.d() + g.c() * zd - z * g.b() - z * g.a() * zd, weight)
}

/// det(d-block of g_x⁻¹·g·g_x)^{−N}, computed from the 4×4 product.
pub fn omega_direct(g: &GroupElement, x: &CoherentParam, weight: u32) -> Result<C64, CoherentError> {
    let gx = coherent_group_element(x);
    let m = gx.inverse().matrix() * g.matrix() * gx.matrix();
    power_ratio(c(1.0, 0.0), block(&m, 1, 1), weight)
}

fn check_budget(order: usize, e: Estimate) -> Result<C64, CoherentError> {
    let budget = BUDGETS[order - 1] * e.value.norm().max(1.0);
    if e.error > budget || !e.value.is_finite() {
        return Err(CoherentError::NoiseBudgetExceeded { order, error: e.error });
    }
    Ok(e.value)
}

fn exp_sum(basis: &GeneratorBasis, pairs: &[usize], t: &[f64]) -> GroupElement {
    let m = pairs.iter().zip(t).fold(Mat4::zeros(), |acc, (&p, &s)| acc + basis.matrices[p] * c(s, 0.0));
    GroupElement::from_matrix_unchecked(m.exp())
}

fn exp_product(basis: &GeneratorBasis, pairs: &[usize], t: &[f64]) -> GroupElement {
    let m = pairs
        .iter()
        .zip(t)
        .fold(Mat4::identity(), |acc, (&p, &s)| acc * (basis.matrices[p] * c(s, 0.0)).exp());
    GroupElement::from_matrix_unchecked(m)
}

fn omega_or_nan(g: &GroupElement, x: &CoherentParam, n: u32) -> C64 {
    omega(g, x, n).unwrap_or(c(f64::NAN, f64::NAN))
}

/// ξ_p(x) = (1/N)·d/dt ω(e^{tX_p}, x) at t = 0 (purely imaginary).
pub fn coordinate(basis: &GeneratorBasis, p: usize, x: &CoherentParam, n: u32) -> Result<C64, CoherentError> {
    let est = richardson_first(|t| omega_or_nan(&exp_sum(basis, &[p], &[t]), x, n), STEPS[0]);
    Ok(check_budget(1, est)? / n as f64)
}

/// ξ_p(x) as a real number; fails with NonRealSymbol when the imaginary part exceeds 1e-6.
pub fn coordinate_fn(basis: &GeneratorBasis, p: usize, x: &CoherentParam, n: u32) -> Result<f64, CoherentError> {
    real_part(coordinate(basis, p, x, n)?)
}

/// i·ξ_p(x), the real coordinate of the hermitian operator iX̂_p.
pub fn hermitian_coordinate(
    basis: &GeneratorBasis,
    p: usize,
    x: &CoherentParam,
    n: u32,
) -> Result<f64, CoherentError> {
    real_part(coordinate(basis, p, x, n)? * c(0.0, 1.0))
}

fn real_part(v: C64) -> Result<f64, CoherentError> {
    if v.im.abs() > 1e-6 {
        return Err(CoherentError::NonRealSymbol(v.im));
    }
    Ok(v.re)
}

/// All 15 coordinates ξ_p(x).
pub fn coordinates(basis: &GeneratorBasis, x: &CoherentParam, n: u32) -> Result<[C64; DIM], CoherentError> {
    let mut out = [C64::default(); DIM];
    for (p, o) in out.iter_mut().enumerate() {
        *o = coordinate(basis, p, x, n)?;
    }
    Ok(out)
}

/// (−1)ⁿ·∂ⁿ/∂ξ₁…∂ξₙ ω(e^{Σξ_i X_{p_i}}, x) at ξ = 0.
pub fn sym_moment(basis: &GeneratorBasis, x: &CoherentParam, pairs: &[usize], n: u32) -> Result<C64, CoherentError> {
    let order = pairs.len();
    if order > 4 {
        return Err(CoherentError::TooManyIndices(order));
    }
    if order == 0 {
        return omega(&GroupElement::identity(), x, n);
    }
    let f = |t: &[f64]| omega_or_nan(&exp_sum(basis, pairs, t), x, n);
    let v = check_budget(order, richardson_mixed(&f, order, STEPS[order - 1]))?;
    Ok(if order % 2 == 1 { -v } else { v })
}

/// (ξ_p ⋆ ξ_q)(x) = (1/N²)·∂_s∂_t ω(e^{sX_p}e^{tX_q}, x) at 0.
pub fn star_product_coords(
    basis: &GeneratorBasis,
    p: usize,
    q: usize,
    x: &CoherentParam,
    n: u32,
) -> Result<C64, CoherentError> {
    let f = |t: &[f64]| omega_or_nan(&exp_product(basis, &[p, q], t), x, n);
    Ok(check_budget(2, richardson_mixed(&f, 2, STEPS[1]))? / (n as f64).powi(2))
}

/// All (ξ_p ⋆ ξ_q)(x).
pub fn star_matrix(basis: &GeneratorBasis, x: &CoherentParam, n: u32) -> Result<Vec<[C64; DIM]>, CoherentError> {
    (0..DIM)
        .map(|p| {
            let mut row = [C64::default(); DIM];
            for (q, r) in row.iter_mut().enumerate() {
                *r = star_product_coords(basis, p, q, x, n)?;
            }
            Ok(row)
        })
        .collect()
}

/// Max over (p,q) of |½(ξ_p⋆ξ_q − ξ_q⋆ξ_p) − (1/2N)Σ f^r_{pq} ξ_r|.
pub fn antisymmetry_residual(
    sc: &StructureConstants,
    xi: &[C64; DIM],
    star: &[[C64; DIM]],
    n: u32,
) -> f64 {
    let mut worst: f64 = 0.0;
    for p in 0..DIM {
        for q in 0..DIM {
            let anti = (star[p][q] - star[q][p]) * 0.5;
            let model: C64 = sc.get(p, q).iter().zip(xi).map(|(f, x)| x * *f).sum::<C64>() / (2.0 * n as f64);
            worst = worst.max((anti - model).norm());
        }
    }
    worst
}

/// Fitted deformation coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarCoeffs {
    pub n: u32,
    pub a_n: f64,
    pub b_n: f64,
    /// RMS misfit of the symmetric part.
    pub fit_residual: f64,
    /// Max misfit of the symmetric part.
    pub max_misfit: f64,
    /// Max antisymmetric-part residual over all points and pairs.
    pub antisymmetry_residual: f64,
}

/// Least-squares fit of ½(ξ_p⋆ξ_q + ξ_q⋆ξ_p) to (1+A_N)ξ_pξ_q + B_N·δ_{pq,rs}.
pub fn fit_star_coeffs(
    basis: &GeneratorBasis,
    sc: &StructureConstants,
    n: u32,
    points: &[CoherentParam],
) -> Result<StarCoeffs, CoherentError> {
    let data: Vec<([C64; DIM], Vec<[C64; DIM]>)> = points
        .par_iter()
        .map(|x| Ok((coordinates(basis, x, n)?, star_matrix(basis, x, n)?)))
        .collect::<Result<_, CoherentError>>()?;

    let mut design = Vec::new();
    let mut target = Vec::new();
    let mut anti: f64 = 0.0;
    for (xi, star) in &data {
        anti = anti.max(antisymmetry_residual(sc, xi, star, n));
        for p in 0..DIM {
            for q in p..DIM {
                let sym = (star[p][q] + star[q][p]) * 0.5;
                let prod = xi[p] * xi[q];
                let delta = if p == q { 0.5 } else { 0.0 };
                let rhs = sym - prod;
                design.push([prod.re, delta]);
                target.push(rhs.re);
                design.push([prod.im, 0.0]);
                target.push(rhs.im);
            }
        }
    }
    let a = DMatrix::from_fn(design.len(), 2, |i, j| design[i][j]);
    let b = DVector::from_vec(target);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() <= 1e-12 * sv.max() {
        return Err(CoherentError::RankDeficientFit);
    }
    let sol = svd.solve(&b, 0.0).map_err(|_| CoherentError::RankDeficientFit)?;
    let misfit = &a * &sol - &b;
    Ok(StarCoeffs {
        n,
        a_n: sol[0],
        b_n: sol[1],
        fit_residual: (misfit.norm_squared() / (misfit.len() / 2) as f64).sqrt(),
        max_misfit: misfit.amax(),
        antisymmetry_residual: anti,
    })
}

/// |((ξ_a⋆ξ_b)⋆ξ_c − ξ_a⋆(ξ_b⋆ξ_c))(x)|, differentiating the two groupings separately.
pub fn associativity_check(
    basis: &GeneratorBasis,
    n: u32,
    triple: [usize; 3],
    x: &CoherentParam,
) -> Result<f64, CoherentError> {
    let [pa, pb, pc] = triple;
    let ex = |p: usize, s: f64| (basis.matrices[p] * c(s, 0.0)).exp();
    let w = |m: Mat4| omega_or_nan(&GroupElement::from_matrix_unchecked(m), x, n);
    let (h_in, h_out) = (STEPS[1], STEPS[2]);

    let inner_err = std::cell::Cell::new(0.0f64);
    let track = |e: Estimate| {
        inner_err.set(inner_err.get().max(e.error));
        e.value
    };
    let left = richardson_first(
        |u| track(richardson_mixed(&|t: &[f64]| w((ex(pa, t[0]) * ex(pb, t[1])) * ex(pc, u)), 2, h_in)),
        h_out,
    );
    let right = richardson_first(
        |s| track(richardson_mixed(&|t: &[f64]| w(ex(pa, s) * (ex(pb, t[0]) * ex(pc, t[1]))), 2, h_in)),
        h_out,
    );
    let value = left.value.norm().max(right.value.norm()).max(1.0);
    let err = left.error.max(right.error).max(inner_err.get());
    if err > BUDGETS[2] * value {
        return Err(CoherentError::NoiseBudgetExceeded { order: 3, error: err });
    }
    Ok((left.value - right.value).norm() / (n as f64).powi(3))
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let (mut inv, mut f) = (0.0, 1.0 / base as f64);
    while i > 0 {
        inv += f * (i % base) as f64;
        i /= base;
        f /= base as f64;
    }
    inv
}

/// Deterministic sample points: λ on {0.1, 0.25, 0.4}², k from a Halton sequence on SU(2)×SU(2)×U(1).
pub fn sample_points(count: usize) -> Vec<CoherentParam> {
    const GRID: [f64; 3] = [0.1, 0.25, 0.4];
    const BASES: [u64; 7] = [2, 3, 5, 7, 11, 13, 17];
    (0..count)
        .map(|i| {
            let h: [f64; 7] = std::array::from_fn(|d| radical_inverse(i as u64 + 1, BASES[d]));
            let (a, b) = (GRID[i % 3], GRID[(i / 3) % 3]);
            let ph = C64::from_polar(1.0, 2.0 * PI * h[6]);
            CoherentParam {
                kp: su2_from_unit_cube(h[0], h[1], h[2]) * ph,
                kpp: su2_from_unit_cube(h[3], h[4], h[5]) * ph.conj(),
                lambda: (a.max(b), a.min(b)),
            }
        })
        .collect()
}
