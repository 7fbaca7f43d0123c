//! Truncated Fock-space realization of the discrete series.
//!
//! Eight bosonic modes: a_{rα} (r, α ∈ {0,1}) and b_{rα}. The 4×2 operator matrix
//! Ẑ has rows â†_{0α}, â†_{1α}, b̂_{0α}, b̂_{1α}, and a generator X is represented by
//! X̂ = −Σ_α Σ_{rt} z†_{rα}(ΓX)_{rt} z_{tα}, kept in the written order.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{gamma, GeneratorBasis};
use crate::group::{kak_decompose, GroupElement};
use crate::{blocks, c, max_abs, Mat2, Mat4, C64};

pub const DEFAULT_CAP: usize = 200_000;
pub const DEFAULT_LAMBDA_MAX: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("sector has {size} states, above the cap of {cap}")]
    SectorOverflow { size: usize, cap: usize },
    #[error("truncation error estimate {estimate:.3e} exceeds tolerance")]
    TruncationWarning { estimate: f64 },
    #[error("boost parameter {0} outside the allowed range")]
    BoostOutOfRange(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Occupation numbers: entries 0..4 are a_{rα} at 2r+α, entries 4..8 are b_{rα} at 4+2r+α.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    pub occ: [u8; 8],
}

impl FockState {
    pub fn new(m: [u8; 4], n: [u8; 4]) -> Self {
        let mut occ = [0; 8];
        occ[..4].copy_from_slice(&m);
        occ[4..].copy_from_slice(&n);
        Self { occ }
    }

    pub fn vacuum() -> Self {
        Self { occ: [0; 8] }
    }

    pub fn m(&self) -> [u8; 4] {
        [self.occ[0], self.occ[1], self.occ[2], self.occ[3]]
    }

    pub fn n(&self) -> [u8; 4] {
        [self.occ[4], self.occ[5], self.occ[6], self.occ[7]]
    }

    /// Σm, the number of a quanta.
    pub fn pairs(&self) -> u32 {
        self.m().iter().map(|&x| x as u32).sum()
    }

    /// Σn − Σm.
    pub fn charge(&self) -> i64 {
        self.n().iter().map(|&x| x as i64).sum::<i64>() - self.pairs() as i64
    }
}

pub fn a_mode(r: usize, alpha: usize) -> usize {
    2 * r + alpha
}

pub fn b_mode(r: usize, alpha: usize) -> usize {
    4 + 2 * r + alpha
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub create: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self { mode, create: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, create: false }
    }

    pub fn adjoint(self) -> Self {
        Self { mode: self.mode, create: !self.create }
    }

    fn act(self, s: FockState) -> Option<(FockState, f64)> {
        let mut out = s;
        let k = s.occ[self.mode];
        if self.create {
            out.occ[self.mode] = k.checked_add(1)?;
            Some((out, ((k as f64) + 1.0).sqrt()))
        } else if k == 0 {
            None
        } else {
            out.occ[self.mode] = k - 1;
            Some((out, (k as f64).sqrt()))
        }
    }

    /// Entry z_{rα} of Ẑ.
    pub fn z(r: usize, alpha: usize) -> Self {
        if r < 2 {
            Self::create(a_mode(r, alpha))
        } else {
            Self::annihilate(b_mode(r - 2, alpha))
        }
    }

    /// Entry z†_{rα}.
    pub fn z_dag(r: usize, alpha: usize) -> Self {
        Self::z(r, alpha).adjoint()
    }
}

/// Operator product applied right to left: word [L₁, L₂] means L₁L₂.
pub fn apply_word(word: &[Ladder], s: FockState) -> Option<(FockState, f64)> {
    word.iter().rev().try_fold((s, 1.0), |(st, f), l| l.act(st).map(|(o, g)| (o, f * g)))
}

/// A coefficient times a ladder word.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: C64,
    pub word: Vec<Ladder>,
}

/// Sparse map from occupation tuples to amplitudes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FockVector {
    pub amps: BTreeMap<FockState, C64>,
}

impl FockVector {
    pub fn basis(s: FockState) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(s, c(1.0, 0.0));
        Self { amps }
    }

    pub fn norm(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().filter_map(|(s, a)| other.amps.get(s).map(|b| a.conj() * b)).sum()
    }

    pub fn add_scaled(&mut self, other: &Self, w: C64) {
        for (s, a) in &other.amps {
            *self.amps.entry(*s).or_default() += a * w;
        }
    }

    pub fn scale(&self, w: C64) -> Self {
        Self { amps: self.amps.iter().map(|(s, a)| (*s, a * w)).collect() }
    }

    /// Multiplies each amplitude by f(state).
    pub fn map_diagonal<F: Fn(&FockState) -> C64>(&self, f: F) -> Self {
        Self { amps: self.amps.iter().map(|(s, a)| (*s, a * f(s))).collect() }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let mut d = self.clone();
        d.add_scaled(other, c(-1.0, 0.0));
        d.norm()
    }
}

/// Σ terms applied to v, with no truncation.
pub fn apply_terms(terms: &[Term], v: &FockVector) -> FockVector {
    let mut out = FockVector::default();
    for t in terms {
        for (s, a) in &v.amps {
            if let Some((o, f)) = apply_word(&t.word, *s) {
                *out.amps.entry(o).or_default() += t.coef * a * f;
            }
        }
    }
    out
}

fn compositions(total: u32) -> Vec<[u8; 4]> {
    let mut out = Vec::new();
    for x0 in 0..=total {
        for x1 in 0..=(total - x0) {
            for x2 in 0..=(total - x0 - x1) {
                let x3 = total - x0 - x1 - x2;
                out.push([x0 as u8, x1 as u8, x2 as u8, x3 as u8]);
            }
        }
    }
    out
}

fn binom3(k: i64) -> usize {
    if k < 0 {
        0
    } else {
        let k = k as usize;
        (k + 3) * (k + 2) * (k + 1) / 6
    }
}

/// Number of states with the given charge and Σm ≤ p_max.
pub fn sector_size(charge: i64, p_max: u32) -> usize {
    (0..=p_max as i64).map(|p| binom3(p) * binom3(p + charge)).sum()
}

/// Enumerated basis of all states with fixed charge Σn − Σm and Σm ≤ p_max.
#[derive(Debug, Clone)]
pub struct Sector {
    pub charge: i64,
    pub p_max: u32,
    pub basis: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl Sector {
    pub fn new(charge: i64, p_max: u32, cap: usize) -> Result<Self, FockError> {
        let size = sector_size(charge, p_max);
        if size > cap {
            return Err(FockError::SectorOverflow { size, cap });
        }
        if p_max as i64 + charge > 250 {
            return Err(FockError::InvalidConfig("occupations exceed 250".into()));
        }
        let mut basis = Vec::with_capacity(size);
        for p in 0..=p_max as i64 {
            if p + charge < 0 {
                continue;
            }
            let ms = compositions(p as u32);
            let ns = compositions((p + charge) as u32);
            for m in &ms {
                for n in &ns {
                    basis.push(FockState::new(*m, *n));
                }
            }
        }
        let index = basis.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Ok(Self { charge, p_max, basis, index })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, s: &FockState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn to_dense(&self, v: &FockVector) -> Vec<C64> {
        let mut out = vec![C64::default(); self.dim()];
        for (s, a) in &v.amps {
            if let Some(i) = self.index_of(s) {
                out[i] += a;
            }
        }
        out
    }

    pub fn to_vector(&self, v: &[C64]) -> FockVector {
        FockVector {
            amps: self.basis.iter().zip(v).filter(|(_, a)| a.norm_sqr() > 0.0).map(|(s, a)| (*s, *a)).collect(),
        }
    }

    /// Σ terms as a sparse matrix from `self` to `target`, dropping states outside `target`.
    pub fn op_to(&self, target: &Sector, terms: &[Term]) -> SparseOp {
        let mut trip = Vec::new();
        for (j, s) in self.basis.iter().enumerate() {
            for t in terms {
                if let Some((o, f)) = apply_word(&t.word, *s) {
                    if let Some(i) = target.index_of(&o) {
                        trip.push((i, j, t.coef * f));
                    }
                }
            }
        }
        SparseOp::from_triplets(target.dim(), self.dim(), trip)
    }

    pub fn op(&self, terms: &[Term]) -> SparseOp {
        self.op_to(self, terms)
    }
}

/// Operations shared by the sparse operators.
pub trait LinearOp: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply_into(&self, x: &[C64], y: &mut [C64]);
    /// Max row sum of |entries|.
    fn row_sum_norm(&self) -> f64;

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::default(); self.rows()];
        self.apply_into(x, &mut y);
        y
    }
}

/// CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    vals: Vec<C64>,
}

impl SparseOp {
    /// Builds from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, mut trip: Vec<(usize, usize, C64)>) -> Self {
        trip.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; rows + 1];
        let mut col_idx: Vec<u32> = Vec::with_capacity(trip.len());
        let mut vals: Vec<C64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trip {
            if last == Some((i, j)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(j as u32);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { rows, cols, row_ptr, col_idx, vals }
    }

    pub fn diagonal(d: &[C64]) -> Self {
        Self::from_triplets(d.len(), d.len(), d.iter().enumerate().map(|(i, v)| (i, i, *v)).collect())
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k] as usize, self.vals[k]))
        })
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(i, j, v)| (j, i, v.conj())).collect())
    }

    pub fn scale(&self, w: C64) -> Self {
        Self { vals: self.vals.iter().map(|v| v * w).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_triplets(self.rows, self.cols, self.triplets().chain(other.triplets()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut trip = Vec::new();
        for i in 0..self.rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let m = self.col_idx[k] as usize;
                for l in other.row_ptr[m]..other.row_ptr[m + 1] {
                    trip.push((i, other.col_idx[l] as usize, self.vals[k] * other.vals[l]));
                }
            }
        }
        Self::from_triplets(self.rows, other.cols, trip)
    }

    /// Max |entry| over columns selected by `keep`.
    pub fn max_abs_on_columns<F: Fn(usize) -> bool>(&self, keep: F) -> f64 {
        self.triplets().filter(|&(_, j, _)| keep(j)).map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        (self.row_ptr[i]..self.row_ptr[i + 1])
            .find(|&k| self.col_idx[k] as usize == j)
            .map(|k| self.vals[k])
            .unwrap_or_default()
    }
}

impl LinearOp for SparseOp {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.vals[k] * x[self.col_idx[k] as usize]).sum();
        });
    }

    fn row_sum_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.vals[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Sparsity pattern of X ↦ X̂ with, per slot, the matrix units E_{rt} that contribute.
#[derive(Debug, Clone)]
struct HatPattern {
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    term_ptr: Vec<usize>,
    term_unit: Vec<u8>,
    term_coef: Vec<f64>,
}

impl HatPattern {
    fn build(sector: &Sector) -> Self {
        let gm = [1.0, 1.0, -1.0, -1.0];
        let rows: Vec<Vec<(u32, u8, f64)>> = sector
            .basis
            .par_iter()
            .map(|s| {
                let mut entries = Vec::with_capacity(32);
                for r in 0..4 {
                    for t in 0..4 {
                        for alpha in 0..2 {
                            // ⟨s|z†_r z_t|j⟩ = ⟨j|z†_t z_r|s⟩
                            let word = [Ladder::z_dag(t, alpha), Ladder::z(r, alpha)];
                            if let Some((j, f)) = apply_word(&word, *s) {
                                if let Some(col) = sector.index_of(&j) {
                                    entries.push((col as u32, (4 * r + t) as u8, -gm[r] * f));
                                }
                            }
                        }
                    }
                }
                entries.sort_by_key(|&(col, unit, _)| (col, unit));
                entries
            })
            .collect();

        let mut p = HatPattern {
            row_ptr: vec![0],
            col_idx: Vec::new(),
            term_ptr: vec![0],
            term_unit: Vec::new(),
            term_coef: Vec::new(),
        };
        for entries in rows {
            let mut last_col = None;
            for (col, unit, coef) in entries {
                if last_col != Some(col) {
                    if last_col.is_some() {
                        p.term_ptr.push(p.term_unit.len());
                    }
                    p.col_idx.push(col);
                    last_col = Some(col);
                }
                if p.term_unit.len() > *p.term_ptr.last().expect("nonempty") && *p.term_unit.last().expect("nonempty") == unit
                {
                    *p.term_coef.last_mut().expect("nonempty") += coef;
                } else {
                    p.term_unit.push(unit);
                    p.term_coef.push(coef);
                }
            }
            if last_col.is_some() {
                p.term_ptr.push(p.term_unit.len());
            }
            p.row_ptr.push(p.col_idx.len());
        }
        p
    }
}

/// X̂ on a sector: the shared pattern with slot values for one X.
pub struct HatOp<'a> {
    pattern: &'a HatPattern,
    vals: Vec<C64>,
}

impl<'a> HatOp<'a> {
    fn new(pattern: &'a HatPattern, x: &Mat4) -> Self {
        let units: [C64; 16] = std::array::from_fn(|u| x[(u / 4, u % 4)]);
        let vals = (0..pattern.col_idx.len())
            .map(|k| {
                (pattern.term_ptr[k]..pattern.term_ptr[k + 1])
                    .map(|l| units[pattern.term_unit[l] as usize] * pattern.term_coef[l])
                    .sum()
            })
            .collect();
        Self { pattern, vals }
    }

    /// Materialized CSR matrix.
    pub fn to_sparse(&self) -> SparseOp {
        let p = self.pattern;
        let n = p.row_ptr.len() - 1;
        let mut trip = Vec::with_capacity(p.col_idx.len());
        for i in 0..n {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                trip.push((i, p.col_idx[k] as usize, self.vals[k]));
            }
        }
        SparseOp::from_triplets(n, n, trip)
    }
}

impl LinearOp for HatOp<'_> {
    fn rows(&self) -> usize {
        self.pattern.row_ptr.len() - 1
    }

    fn cols(&self) -> usize {
        self.rows()
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let p = self.pattern;
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = (p.row_ptr[i]..p.row_ptr[i + 1]).map(|k| self.vals[k] * x[p.col_idx[k] as usize]).sum();
        });
    }

    fn row_sum_norm(&self) -> f64 {
        let p = self.pattern;
        (0..self.rows())
            .into_par_iter()
            .map(|i| (p.row_ptr[i]..p.row_ptr[i + 1]).map(|k| self.vals[k].norm()).sum::<f64>())
            .reduce(|| 0.0, f64::max)
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨u|v⟩.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

const KRYLOV_DIM: usize = 30;
const KRYLOV_TOL: f64 = 1e-13;

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// exp(t·A)v by adaptive Arnoldi steps (Krylov dimension 30, local error below 1e-13·|v| per unit time).
pub fn exp_apply<A: LinearOp + ?Sized>(op: &A, t: C64, v: &[C64]) -> Vec<C64> {
    krylov_exp(op, t, v, KRYLOV_DIM)
}

/// exp(t·A)v for anti-hermitian A and real t: the Arnoldi recurrence truncated to a three-term Lanczos recurrence.
pub fn exp_apply_skew<A: LinearOp + ?Sized>(op: &A, t: f64, v: &[C64]) -> Vec<C64> {
    krylov_exp(op, c(t, 0.0), v, 2)
}

fn krylov_exp<A: LinearOp + ?Sized>(op: &A, t: C64, v: &[C64], window: usize) -> Vec<C64> {
    let beta0 = norm(v);
    let bound = op.row_sum_norm() * t.norm();
    if beta0 == 0.0 || bound == 0.0 {
        return v.to_vec();
    }
    let mut w = v.to_vec();
    let mut done = 0.0;
    let mut step = (20.0 / bound).min(1.0);
    while done < 1.0 {
        let beta = norm(&w);
        let mut basis = vec![w.iter().map(|x| x / beta).collect::<Vec<C64>>()];
        let mut h = DMatrix::<C64>::zeros(KRYLOV_DIM + 1, KRYLOV_DIM);
        let mut m = KRYLOV_DIM;
        let mut breakdown = false;
        for j in 0..KRYLOV_DIM {
            let mut z = op.apply(&basis[j]);
            z.iter_mut().for_each(|x| *x *= t);
            for i in (j + 1).saturating_sub(window)..=j {
                let hij = inner(&basis[i], &z);
                h[(i, j)] = hij;
                axpy(&mut z, -hij, &basis[i]);
            }
            let hn = norm(&z);
            h[(j + 1, j)] = c(hn, 0.0);
            if hn <= 1e-14 * beta0 {
                m = j + 1;
                breakdown = true;
                break;
            }
            basis.push(z.into_iter().map(|x| x / hn).collect());
            // Stop early once the whole remaining interval is resolved.
            if j >= 4 && j + 1 < KRYLOV_DIM {
                let s = 1.0 - done;
                let e = (h.view((0, 0), (j + 1, j + 1)) * c(s, 0.0)).exp();
                if beta * hn * s * e[(j, 0)].norm() <= KRYLOV_TOL * s * beta0 {
                    m = j + 1;
                    break;
                }
            }
        }
        let hm = h.view((0, 0), (m, m)).into_owned();
        loop {
            let s = step.min(1.0 - done);
            let e = (&hm * c(s, 0.0)).exp();
            let err = if breakdown { 0.0 } else { beta * h[(m, m - 1)].norm() * s * e[(m - 1, 0)].norm() };
            if err <= KRYLOV_TOL * s * beta0 || s < 1e-12 {
                let mut next = vec![C64::default(); w.len()];
                for (i, q) in basis.iter().take(m).enumerate() {
                    axpy(&mut next, e[(i, 0)] * beta, q);
                }
                w = next;
                done += s;
                if err < 1e-3 * KRYLOV_TOL * s * beta0 {
                    step = s * 2.0;
                }
                break;
            }
            step = s * 0.5;
        }
    }
    w
}

/// Representation level and truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepConfig {
    pub n: u32,
    pub p_max: u32,
    pub cap: usize,
}

impl RepConfig {
    pub fn new(n: u32, p_max: u32) -> Self {
        Self { n, p_max, cap: DEFAULT_CAP }
    }

    pub fn with_cap(self, cap: usize) -> Self {
        Self { cap, ..self }
    }

    /// Charge 2(N−1) of the representation sector.
    pub fn charge(&self) -> i64 {
        2 * (self.n as i64 - 1)
    }
}

/// The representation sector with its generator pattern.
#[derive(Debug, Clone)]
pub struct Rep {
    pub cfg: RepConfig,
    pub sector: Sector,
    pattern: HatPattern,
}

impl Rep {
    pub fn build(cfg: RepConfig) -> Result<Self, FockError> {
        if cfg.n == 0 {
            return Err(FockError::InvalidConfig("N must be at least 1".into()));
        }
        Self::with_charge(cfg, cfg.charge(), cfg.p_max)
    }

    /// A sector of arbitrary charge with the same generator realization.
    pub fn with_charge(cfg: RepConfig, charge: i64, p_max: u32) -> Result<Self, FockError> {
        let sector = Sector::new(charge, p_max, cfg.cap)?;
        let pattern = HatPattern::build(&sector);
        Ok(Self { cfg, sector, pattern })
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    /// X̂ for any 4×4 matrix X (linear in X).
    pub fn hat(&self, x: &Mat4) -> HatOp<'_> {
        HatOp::new(&self.pattern, x)
    }

    pub fn generator(&self, basis: &GeneratorBasis, p: usize) -> HatOp<'_> {
        self.hat(&basis.matrices[p])
    }

    /// N̂ = ½(N̂_b − N̂_a).
    pub fn casimir(&self) -> SparseOp {
        let d: Vec<C64> = self.sector.basis.iter().map(|s| c(s.charge() as f64 / 2.0, 0.0)).collect();
        SparseOp::diagonal(&d)
    }

    /// (T̂^B_−, T̂^B_+) with T̂^B_− = Σ â_{rα}B_{rt}b̂_{tα} and T̂^B_+ its adjoint.
    pub fn pair_ops(&self, b: &Mat2) -> (SparseOp, SparseOp) {
        let (minus, plus) = pair_terms(b);
        (self.sector.op(&minus), self.sector.op(&plus))
    }

    /// |x₀⟩ as a dense vector over the basis.
    pub fn lowest_state(&self) -> Vec<C64> {
        self.sector.to_dense(&lowest_state(self.cfg.n))
    }

    /// exp(X̂)v; uses the Lanczos recurrence when X̂ is anti-hermitian, i.e. when (ΓX)† = −ΓX.
    pub fn exp_apply(&self, x: &Mat4, v: &[C64]) -> Vec<C64> {
        let gx = gamma() * x;
        if max_abs(&(gx.adjoint() + gx)) < 1e-14 * (1.0 + max_abs(x)) {
            exp_apply_skew(&self.hat(x), 1.0, v)
        } else {
            exp_apply(&self.hat(x), c(1.0, 0.0), v)
        }
    }

    /// T̂(g_x)|x₀⟩ for g_x = exp(h).
    pub fn coherent_state(&self, h: &Mat4) -> Vec<C64> {
        self.exp_apply(h, &self.lowest_state())
    }

    /// ⟨x₀|T̂(δ_Λ)|x₀⟩.
    pub fn boost_overlap(&self, lambda: (f64, f64)) -> C64 {
        let x0 = self.lowest_state();
        inner(&x0, &self.exp_apply(&boost_generator(lambda), &x0))
    }

    /// True when basis state i has Σm < P_max.
    pub fn interior(&self, i: usize) -> bool {
        self.sector.basis[i].pairs() < self.sector.p_max
    }
}

/// [[0, Λ], [Λ, 0]] with Λ = diag(λ₁, λ₂).
pub fn boost_generator(lambda: (f64, f64)) -> Mat4 {
    let l = Mat2::new(c(lambda.0, 0.0), C64::default(), C64::default(), c(lambda.1, 0.0));
    blocks(&Mat2::zeros(), &l, &l, &Mat2::zeros())
}

/// Terms of (T̂^B_−, T̂^B_+).
pub fn pair_terms(b: &Mat2) -> (Vec<Term>, Vec<Term>) {
    let mut minus = Vec::new();
    let mut plus = Vec::new();
    for r in 0..2 {
        for t in 0..2 {
            for alpha in 0..2 {
                let w = b[(r, t)];
                let word = vec![Ladder::annihilate(a_mode(r, alpha)), Ladder::annihilate(b_mode(t, alpha))];
                let adj = vec![Ladder::create(b_mode(t, alpha)), Ladder::create(a_mode(r, alpha))];
                minus.push(Term { coef: w, word });
                plus.push(Term { coef: w.conj(), word: adj });
            }
        }
    }
    (minus, plus)
}

/// Terms of X̂ = −Σ z†_{rα}(ΓX)_{rt} z_{tα}.
pub fn hat_terms(x: &Mat4) -> Vec<Term> {
    let gx = gamma() * x;
    let mut out = Vec::new();
    for r in 0..4 {
        for t in 0..4 {
            if gx[(r, t)] == C64::default() {
                continue;
            }
            for alpha in 0..2 {
                out.push(Term { coef: -gx[(r, t)], word: vec![Ladder::z_dag(r, alpha), Ladder::z(t, alpha)] });
            }
        }
    }
    out
}

/// |x₀⟩ = N^{−1/2} Σ_k (−1)^k |0,0,0,0; N−1−k, k, k, N−1−k⟩.
pub fn lowest_state(n: u32) -> FockVector {
    let mut v = FockVector::default();
    let w = 1.0 / (n as f64).sqrt();
    for k in 0..n {
        let j = (n - 1 - k) as u8;
        let s = FockState::new([0; 4], [j, k as u8, k as u8, j]);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        v.amps.insert(s, c(sign * w, 0.0));
    }
    v
}

/// Eigenvalue of T̂(k) on |x₀⟩ for k = diag(k′, k″): det(k′)^{−2}·det(k″)^{N−1}.
pub fn compact_phase(k: &GroupElement, n: u32) -> C64 {
    k.a().determinant().powi(-2) * k.d().determinant().powi(n as i32 - 1)
}

/// Closed form of ⟨x₀|T̂(g)|x₀⟩ for this realization: conj(det d)^{−(N+1)}.
pub fn omega0_closed_form(g: &GroupElement, n: u32) -> C64 {
    g.d().determinant().conj().powi(-(n as i32 + 1))
}

/// A boost result and the difference to the same computation at P_max − 2.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostOutcome {
    pub state: FockVector,
    pub truncation_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Omega0Outcome {
    pub value: C64,
    pub truncation_estimate: f64,
}

/// Checks a truncation estimate against a tolerance.
pub fn check_truncation(estimate: f64, tol: f64) -> Result<(), FockError> {
    if estimate > tol || estimate.is_nan() {
        return Err(FockError::TruncationWarning { estimate });
    }
    Ok(())
}

/// The representation sector at P_max together with the P_max − 2 sector used for error estimates.
#[derive(Debug, Clone)]
pub struct TruncatedRep {
    pub fine: Rep,
    pub coarse: Option<Rep>,
    pub lambda_max: f64,
}

impl TruncatedRep {
    pub fn build(cfg: RepConfig) -> Result<Self, FockError> {
        let fine = Rep::build(cfg)?;
        let coarse = if cfg.p_max >= 2 { Some(Rep::build(RepConfig { p_max: cfg.p_max - 2, ..cfg })?) } else { None };
        Ok(Self { fine, coarse, lambda_max: DEFAULT_LAMBDA_MAX })
    }

    fn check_lambda(&self, lambda: (f64, f64)) -> Result<(), FockError> {
        for l in [lambda.0, lambda.1] {
            if l.abs() > self.lambda_max {
                return Err(FockError::BoostOutOfRange(l));
            }
        }
        Ok(())
    }

    /// T̂(δ_Λ)v.
    pub fn apply_boost(&self, lambda: (f64, f64), v: &FockVector) -> Result<BoostOutcome, FockError> {
        self.check_lambda(lambda)?;
        let h = boost_generator(lambda);
        let fine = self.fine.sector.to_vector(&self.fine.exp_apply(&h, &self.fine.sector.to_dense(v)));
        let truncation_estimate = match &self.coarse {
            Some(cr) => {
                let coarse = cr.sector.to_vector(&cr.exp_apply(&h, &cr.sector.to_dense(v)));
                let projected = FockVector {
                    amps: fine.amps.iter().filter(|(s, _)| s.pairs() <= cr.sector.p_max).map(|(s, a)| (*s, *a)).collect(),
                };
                projected.distance(&coarse)
            }
            None => f64::INFINITY,
        };
        Ok(BoostOutcome { state: fine, truncation_estimate })
    }

    /// ⟨x₀|T̂(g)|x₀⟩: compact phases analytically, the boost numerically.
    pub fn omega0(&self, g: &GroupElement) -> Result<Omega0Outcome, FockError> {
        let kak = kak_decompose(g);
        self.check_lambda(kak.lambda)?;
        let n = self.fine.cfg.n;
        let phase = compact_phase(&kak.k, n) * compact_phase(&kak.q, n);
        let fine = self.fine.boost_overlap(kak.lambda);
        let truncation_estimate = match &self.coarse {
            Some(cr) => (cr.boost_overlap(kak.lambda) - fine).norm(),
            None => f64::INFINITY,
        };
        Ok(Omega0Outcome { value: phase * fine, truncation_estimate })
    }
}

/// Residuals of T̂(g)ẐT̂(g)⁻¹ against g⁻¹Ẑ and against gẐ, on |x₀⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointReport {
    pub inverse_residual: f64,
    pub forward_residual: f64,
}

/// Conjugation of the ladder matrix Ẑ by T̂(e^X), tested on |x₀⟩.
pub fn adjoint_action_check(cfg: RepConfig, x: &Mat4) -> Result<AdjointReport, FockError> {
    let src = Rep::build(cfg)?;
    let dst = Rep::with_charge(cfg, cfg.charge() - 1, cfg.p_max + 1)?;
    let g = x.exp();
    let g_inv = g.try_inverse().ok_or_else(|| FockError::InvalidConfig("singular group element".into()))?;
    let x0 = src.lowest_state();
    let pulled = src.exp_apply(&(-x), &x0);
    let ladder = |r: usize, alpha: usize| {
        src.sector.op_to(&dst.sector, &[Term { coef: c(1.0, 0.0), word: vec![Ladder::z(r, alpha)] }])
    };
    let mut report = AdjointReport { inverse_residual: 0.0, forward_residual: 0.0 };
    for alpha in 0..2 {
        let zs: Vec<SparseOp> = (0..4).map(|r| ladder(r, alpha)).collect();
        let images: Vec<Vec<C64>> = zs.iter().map(|z| z.apply(&x0)).collect();
        for r in 0..4 {
            let lhs = dst.exp_apply(x, &zs[r].apply(&pulled));
            for (m, slot) in [(&g_inv, &mut report.inverse_residual), (&g, &mut report.forward_residual)] {
                let mut rhs = vec![C64::default(); dst.dim()];
                for (t, img) in images.iter().enumerate() {
                    rhs.iter_mut().zip(img).for_each(|(a, b)| *a += m[(r, t)] * b);
                }
                let d = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                *slot = slot.max(d);
            }
        }
    }
    Ok(report)
}
