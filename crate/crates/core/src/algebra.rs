//! The su(2,2) ≅ so(4,2) generator basis, brackets, structure constants and root data.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{SMatrix, SVector};
use thiserror::Error;

use crate::{blocks, c, max_abs, Mat2, Mat4, C64};

/// Number of generators.
pub const DIM: usize = 15;

/// Index pairs (A,B) with A<B in lexicographic order; position = generator index.
pub const PAIRS: [(usize, usize); DIM] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 4),
    (0, 5),
    (1, 2),
    (1, 3),
    (1, 4),
    (1, 5),
    (2, 3),
    (2, 4),
    (2, 5),
    (3, 4),
    (3, 5),
    (4, 5),
];

/// Signature η^{AB} = diag(+,−,−,−,−,+).
pub const ETA: [f64; 6] = [1.0, -1.0, -1.0, -1.0, -1.0, 1.0];

const TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("matrix does not expand in the generator basis (residual {residual:.3e})")]
    BasisExpansionFailure { residual: f64 },
    #[error("invalid index pair ({0},{1})")]
    InvalidPair(usize, usize),
}

/// Generator index of (a,b) together with the sign of X_ab relative to the stored X_{min,max}.
pub fn pair_index(a: usize, b: usize) -> Option<(usize, f64)> {
    if a == b || a > 5 || b > 5 {
        return None;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    PAIRS.iter().position(|&p| p == (lo, hi)).map(|i| (i, sign))
}

/// Generator index of an ordered pair with A<B.
pub fn index_of(a: usize, b: usize) -> Result<usize, AlgebraError> {
    match pair_index(a, b) {
        Some((i, s)) if s > 0.0 => Ok(i),
        _ => Err(AlgebraError::InvalidPair(a, b)),
    }
}

/// True for the seven generators of the maximal compact subalgebra.
pub fn is_compact(p: usize) -> bool {
    let (a, b) = PAIRS[p];
    (a, b) == (0, 5) || (a >= 1 && b <= 4)
}

/// Γ = diag(1,1,−1,−1).
pub fn gamma() -> Mat4 {
    Mat4::from_diagonal(&nalgebra::Vector4::new(c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)))
}

/// Pauli matrix σ_k, k ∈ {1,2,3}.
pub fn pauli(k: usize) -> Mat2 {
    let (o, z, i) = (c(1.0, 0.0), C64::default(), c(0.0, 1.0));
    match k {
        1 => Mat2::new(z, o, o, z),
        2 => Mat2::new(z, -i, i, z),
        3 => Mat2::new(o, z, z, -o),
        _ => panic!("pauli index {k} out of range"),
    }
}

/// The matrix S_ab exactly as listed in the explicit basis table.
pub fn printed_matrix(a: usize, b: usize) -> Mat4 {
    let e = Mat2::identity();
    let z = Mat2::zeros();
    let i2 = c(0.0, 0.5);
    let h = c(0.5, 0.0);
    match (a, b) {
        (0, 5) => blocks(&(e * i2), &z, &z, &(-e * i2)),
        (4, 5) => blocks(&z, &(e * h), &(e * h), &z),
        (0, 4) => blocks(&z, &(e * i2), &(-e * i2), &z),
        (0, k) => blocks(&z, &(pauli(k) * h), &(pauli(k) * h), &z),
        (k, 4) => blocks(&(pauli(k) * i2), &z, &z, &(-pauli(k) * i2)),
        (k, 5) => blocks(&z, &(pauli(k) * i2), &(-pauli(k) * i2), &z),
        (1, 2) => blocks(&(pauli(3) * i2), &z, &z, &(pauli(3) * i2)),
        (1, 3) => blocks(&(-pauli(2) * i2), &z, &z, &(-pauli(2) * i2)),
        (2, 3) => blocks(&(pauli(1) * i2), &z, &z, &(pauli(1) * i2)),
        _ => panic!("no generator for ({a},{b})"),
    }
}

/// Real coefficient vector over the generator basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraElement(pub [f64; DIM]);

impl AlgebraElement {
    pub fn zero() -> Self {
        Self([0.0; DIM])
    }

    pub fn unit(p: usize) -> Self {
        let mut v = [0.0; DIM];
        v[p] = 1.0;
        Self(v)
    }

    /// X_ab for any a≠b, with X_ba = −X_ab.
    pub fn from_pair(a: usize, b: usize) -> Result<Self, AlgebraError> {
        let (p, s) = pair_index(a, b).ok_or(AlgebraError::InvalidPair(a, b))?;
        Ok(Self::unit(p) * s)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Add for AlgebraElement {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut v = self.0;
        v.iter_mut().zip(o.0).for_each(|(a, b)| *a += b);
        Self(v)
    }
}

impl Sub for AlgebraElement {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for AlgebraElement {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul<f64> for AlgebraElement {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self(self.0.map(|x| x * s))
    }
}

/// The 15 generator matrices with a precomputed inverse Gram matrix for re-expansion.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    pub matrices: [Mat4; DIM],
    pub eta: [f64; 6],
    gram_inv: SMatrix<f64, DIM, DIM>,
}

fn pairing(x: &Mat4, y: &Mat4) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

impl GeneratorBasis {
    fn from_matrices(matrices: [Mat4; DIM]) -> Self {
        let gram = SMatrix::<f64, DIM, DIM>::from_fn(|i, j| pairing(&matrices[i], &matrices[j]));
        let gram_inv = gram.try_inverse().expect("generator matrices are linearly independent");
        Self { matrices, eta: ETA, gram_inv }
    }

    /// Basis closing under the so(4,2) bracket table: X_04 = −S_04, X_05 = −S_05, X_ab = S_ab otherwise.
    pub fn new() -> Self {
        Self::from_matrices(std::array::from_fn(|p| {
            let (a, b) = PAIRS[p];
            let s = if a == 0 && (b == 4 || b == 5) { -1.0 } else { 1.0 };
            printed_matrix(a, b) * c(s, 0.0)
        }))
    }

    /// Literal table X_ab = S_ab, kept for comparison.
    pub fn printed() -> Self {
        Self::from_matrices(std::array::from_fn(|p| printed_matrix(PAIRS[p].0, PAIRS[p].1)))
    }

    /// X_ab with X_ba = −X_ab.
    pub fn get(&self, a: usize, b: usize) -> Result<Mat4, AlgebraError> {
        let (p, s) = pair_index(a, b).ok_or(AlgebraError::InvalidPair(a, b))?;
        Ok(self.matrices[p] * c(s, 0.0))
    }

    /// Σ ξ_p X_p.
    pub fn matrix(&self, xi: &AlgebraElement) -> Mat4 {
        self.matrices
            .iter()
            .zip(xi.0.iter())
            .fold(Mat4::zeros(), |acc, (m, &x)| acc + m * c(x, 0.0))
    }

    /// Coefficients of m in the basis and the residual ‖m − Σ ξ X‖_max.
    pub fn expand_with_residual(&self, m: &Mat4) -> (AlgebraElement, f64) {
        let rhs = SVector::<f64, DIM>::from_fn(|i, _| pairing(&self.matrices[i], m));
        let sol = self.gram_inv * rhs;
        let xi = AlgebraElement(std::array::from_fn(|i| sol[i]));
        let residual = max_abs(&(m - self.matrix(&xi)));
        (xi, residual)
    }

    pub fn expand(&self, m: &Mat4) -> Result<AlgebraElement, AlgebraError> {
        let (xi, residual) = self.expand_with_residual(m);
        if residual > TOL * (1.0 + max_abs(m)) {
            return Err(AlgebraError::BasisExpansionFailure { residual });
        }
        Ok(xi)
    }

    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        let (mx, my) = (self.matrix(x), self.matrix(y));
        self.expand(&(mx * my - my * mx))
    }

    /// Structure constants from matrix commutators.
    pub fn structure_constants(&self) -> Result<StructureConstants, AlgebraError> {
        let mut table = vec![[0.0; DIM]; DIM * DIM];
        for p in 0..DIM {
            for q in 0..DIM {
                table[p * DIM + q] = self.bracket(&AlgebraElement::unit(p), &AlgebraElement::unit(q))?.0;
            }
        }
        Ok(StructureConstants { table })
    }
}

impl Default for GeneratorBasis {
    fn default() -> Self {
        Self::new()
    }
}

/// [X_AB, X_CD] = η^{AC}X_BD − η^{BC}X_AD + η^{BD}X_AC − η^{AD}X_BC.
pub fn formula_bracket(p: usize, q: usize) -> AlgebraElement {
    let (a, b) = PAIRS[p];
    let (cc, d) = PAIRS[q];
    let term = |e: usize, f: usize| AlgebraElement::from_pair(e, f).unwrap_or_else(|_| AlgebraElement::zero());
    let eta = |e: usize, f: usize| if e == f { ETA[e] } else { 0.0 };
    term(b, d) * eta(a, cc) - term(a, d) * eta(b, cc) + term(a, cc) * eta(b, d) - term(b, cc) * eta(a, d)
}

/// f^{EF}_{AB,CD} indexed by generator positions.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    table: Vec<[f64; DIM]>,
}

impl StructureConstants {
    /// Table read off the bracket formula.
    pub fn from_formula() -> Self {
        let mut table = vec![[0.0; DIM]; DIM * DIM];
        for p in 0..DIM {
            for q in 0..DIM {
                table[p * DIM + q] = formula_bracket(p, q).0;
            }
        }
        Self { table }
    }

    pub fn get(&self, p: usize, q: usize) -> &[f64; DIM] {
        &self.table[p * DIM + q]
    }

    /// Coordinates of [x, y] computed from the table.
    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        let mut out = [0.0; DIM];
        for p in 0..DIM {
            for q in 0..DIM {
                let w = x.0[p] * y.0[q];
                if w != 0.0 {
                    out.iter_mut().zip(self.get(p, q)).for_each(|(o, f)| *o += w * f);
                }
            }
        }
        AlgebraElement(out)
    }

    /// Largest entrywise difference between two tables.
    pub fn max_difference(&self, other: &Self) -> f64 {
        self.table
            .iter()
            .zip(&other.table)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Max |Σ_cyc [[x,y],z]| over the given triples.
    pub fn jacobi_residual(&self, triples: &[(AlgebraElement, AlgebraElement, AlgebraElement)]) -> f64 {
        triples
            .iter()
            .map(|(x, y, z)| {
                let s = self.bracket(&self.bracket(x, y), z)
                    + self.bracket(&self.bracket(y, z), x)
                    + self.bracket(&self.bracket(z, x), y);
                s.max_abs()
            })
            .fold(0.0, f64::max)
    }

    /// Nonzero entries as (A,B,C,D,E,F,value).
    pub fn rows(&self) -> Vec<(usize, usize, usize, usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for p in 0..DIM {
            for q in 0..DIM {
                for (r, &v) in self.get(p, q).iter().enumerate() {
                    if v.abs() > TOL {
                        let ((a, b), (cc, d), (e, f)) = (PAIRS[p], PAIRS[q], PAIRS[r]);
                        out.push((a, b, cc, d, e, f, v));
                    }
                }
            }
        }
        out
    }
}

/// A restricted root as coefficients over (α₁, α₂).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Root {
    pub coeffs: (i32, i32),
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootData {
    pub roots: Vec<Root>,
    pub positive_roots: Vec<Root>,
    /// ρ over (α₁, α₂).
    pub rho: (i32, i32),
}

impl RootData {
    pub fn multiplicity(&self, coeffs: (i32, i32)) -> Option<u32> {
        self.roots.iter().find(|r| r.coeffs == coeffs).map(|r| r.multiplicity)
    }
}

/// Roots of (g, a): ±2α₁, ±2α₂ with multiplicity 1, ±(α₁±α₂) with multiplicity 2.
pub fn root_data() -> RootData {
    let positive_roots = vec![
        Root { coeffs: (2, 0), multiplicity: 1 },
        Root { coeffs: (0, 2), multiplicity: 1 },
        Root { coeffs: (1, 1), multiplicity: 2 },
        Root { coeffs: (1, -1), multiplicity: 2 },
    ];
    let mut roots = positive_roots.clone();
    roots.extend(positive_roots.iter().map(|r| Root { coeffs: (-r.coeffs.0, -r.coeffs.1), ..*r }));
    let twice = positive_roots.iter().fold((0, 0), |(x, y), r| {
        (x + r.multiplicity as i32 * r.coeffs.0, y + r.multiplicity as i32 * r.coeffs.1)
    });
    RootData { roots, positive_roots, rho: (twice.0 / 2, twice.1 / 2) }
}
