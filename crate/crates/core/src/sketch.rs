//! Oblivious subspace embeddings `Ω ∈ R^{ℓ×n}` and embedding-quality estimates.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::vecops::{axpy, dot, norm, scale};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SketchError {
    #[error("dimension mismatch: sketch has n = {expected}, vector has length {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid sampling size: {0}")]
    InvalidSize(String),
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("basis is not orthonormal (max |QᵗQ - I| = {0:e})")]
    NotOrthonormal(f64),
    #[error("unknown sketch kind '{0}' (expected gaussian, srht or identity)")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchKind {
    Gaussian,
    Srht,
    Identity,
}

impl SketchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SketchKind::Gaussian => "gaussian",
            SketchKind::Srht => "srht",
            SketchKind::Identity => "identity",
        }
    }
}

impl fmt::Display for SketchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SketchKind {
    type Err = SketchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(SketchKind::Gaussian),
            "srht" => Ok(SketchKind::Srht),
            "identity" => Ok(SketchKind::Identity),
            _ => Err(SketchError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    /// Row-major `ℓ × n`, entries `N(0,1)/√ℓ`.
    Gaussian(Vec<f64>),
    Srht { signs: Vec<f64>, rows: Vec<usize>, padded: usize, scale: f64 },
    Identity,
}

/// An `ℓ × n` sketching operator. Random draws happen once, at construction.
#[derive(Debug, Clone)]
pub struct SketchOperator {
    n: usize,
    ell: usize,
    seed: u64,
    repr: Repr,
}

impl SketchOperator {
    pub fn new(kind: SketchKind, n: usize, ell: usize, seed: u64) -> Result<Self, SketchError> {
        match kind {
            SketchKind::Gaussian => Self::gaussian(n, ell, seed),
            SketchKind::Srht => Self::srht(n, ell, seed),
            SketchKind::Identity => Ok(Self::identity(n)),
        }
    }

    fn check_size(n: usize, ell: usize) -> Result<(), SketchError> {
        if ell == 0 || ell > n {
            return Err(SketchError::InvalidSize(format!("need 1 <= ell <= n = {n}, got ell = {ell}")));
        }
        Ok(())
    }

    /// Dense Gaussian embedding with i.i.d. `N(0, 1/ℓ)` entries, drawn row by row.
    pub fn gaussian(n: usize, ell: usize, seed: u64) -> Result<Self, SketchError> {
        Self::check_size(n, ell)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = 1.0 / (ell as f64).sqrt();
        let data = (0..ell * n).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect();
        Ok(Self { n, ell, seed, repr: Repr::Gaussian(data) })
    }

    /// Subsampled randomized Hadamard transform `√(N/ℓ) P H D` over the
    /// zero-padded dimension `N = 2^⌈log2 n⌉`.
    pub fn srht(n: usize, ell: usize, seed: u64) -> Result<Self, SketchError> {
        Self::check_size(n, ell)?;
        let padded = n.next_power_of_two();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let signs = (0..padded).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let mut rows = index::sample(&mut rng, padded, ell).into_vec();
        rows.sort_unstable();
        let scale = (padded as f64 / ell as f64).sqrt();
        Ok(Self { n, ell, seed, repr: Repr::Srht { signs, rows, padded, scale } })
    }

    /// `Ω = I_n`; sketched inner products are exact.
    pub fn identity(n: usize) -> Self {
        Self { n, ell: n, seed: 0, repr: Repr::Identity }
    }

    pub fn kind(&self) -> SketchKind {
        match self.repr {
            Repr::Gaussian(_) => SketchKind::Gaussian,
            Repr::Srht { .. } => SketchKind::Srht,
            Repr::Identity => SketchKind::Identity,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.repr, Repr::Identity)
    }

    /// SRHT sign diagonal `D` (length `N`), if this is an SRHT.
    pub fn srht_signs(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Srht { signs, .. } => Some(signs),
            _ => None,
        }
    }

    /// Sorted SRHT sample rows, if this is an SRHT.
    pub fn srht_rows(&self) -> Option<&[usize]> {
        match &self.repr {
            Repr::Srht { rows, .. } => Some(rows),
            _ => None,
        }
    }

    /// `Ω v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, SketchError> {
        if v.len() != self.n {
            return Err(SketchError::DimensionMismatch { expected: self.n, got: v.len() });
        }
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &[f64]) -> Vec<f64> {
        match &self.repr {
            Repr::Gaussian(data) => data.chunks_exact(self.n).map(|row| dot(row, v)).collect(),
            Repr::Srht { signs, rows, padded, scale } => {
                let mut w = vec![0.0; *padded];
                for ((wi, vi), s) in w.iter_mut().zip(v).zip(signs) {
                    *wi = vi * s;
                }
                fwht_unnormalized(&mut w);
                let s = scale / (*padded as f64).sqrt();
                rows.iter().map(|&r| s * w[r]).collect()
            }
            Repr::Identity => v.to_vec(),
        }
    }

    /// Sketches of each column.
    pub fn sketch_columns(&self, columns: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, SketchError> {
        columns.iter().map(|c| self.apply(c)).collect()
    }

    /// `Ω` as an explicit `ℓ × n` matrix, built column by column.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.ell, self.n);
        let mut e = vec![0.0; self.n];
        for j in 0..self.n {
            e[j] = 1.0;
            m.column_mut(j).copy_from_slice(&self.apply_unchecked(&e));
            e[j] = 0.0;
        }
        m
    }
}

/// In-place Walsh–Hadamard butterflies without normalization.
fn fwht_unnormalized(v: &mut [f64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Orthonormal fast Walsh–Hadamard transform, in place. Self-inverse.
pub fn fwht_in_place(v: &mut [f64]) -> Result<(), SketchError> {
    if !v.len().is_power_of_two() {
        return Err(SketchError::NotPowerOfTwo(v.len()));
    }
    fwht_unnormalized(v);
    scale(1.0 / (v.len() as f64).sqrt(), v);
    Ok(())
}

pub fn fwht(v: &[f64]) -> Result<Vec<f64>, SketchError> {
    let mut w = v.to_vec();
    fwht_in_place(&mut w)?;
    Ok(w)
}

/// `⟨Ωu, Ωv⟩`, reusing `cached_u = Ωu` when given.
pub fn sketched_dot(omega: &SketchOperator, u: &[f64], v: &[f64], cached_u: Option<&[f64]>) -> Result<f64, SketchError> {
    let su = match cached_u {
        Some(s) => {
            if s.len() != omega.ell() {
                return Err(SketchError::DimensionMismatch { expected: omega.ell(), got: s.len() });
            }
            if u.len() != omega.n() {
                return Err(SketchError::DimensionMismatch { expected: omega.n(), got: u.len() });
            }
            s.to_vec()
        }
        None => omega.apply(u)?,
    };
    Ok(dot(&su, &omega.apply(v)?))
}

/// Measured embedding quality of `Ω` on one subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonEstimate {
    pub epsilon_hat: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub dim: usize,
}

impl EpsilonEstimate {
    fn from_sigmas(sigma_min: f64, sigma_max: f64, dim: usize) -> Self {
        let epsilon_hat = (1.0 - sigma_min * sigma_min).max(sigma_max * sigma_max - 1.0).max(0.0);
        Self { epsilon_hat, sigma_min, sigma_max, dim }
    }

    /// Estimate on a zero-dimensional subspace.
    fn empty() -> Self {
        Self { epsilon_hat: 0.0, sigma_min: 1.0, sigma_max: 1.0, dim: 0 }
    }
}

/// Smallest `ε` such that `Ω` is an `ε`-embedding of `range(basis)`, from the
/// extreme singular values of `Ω Q` for the given orthonormal `Q`.
pub fn estimate_epsilon(omega: &SketchOperator, basis: &[Vec<f64>]) -> Result<EpsilonEstimate, SketchError> {
    if basis.is_empty() {
        return Ok(EpsilonEstimate::empty());
    }
    let k = basis.len();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        if basis[i].len() != omega.n() {
            return Err(SketchError::DimensionMismatch { expected: omega.n(), got: basis[i].len() });
        }
        for j in 0..=i {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(&basis[i], &basis[j]) - target).abs());
        }
    }
    if worst > 1e-8 {
        return Err(SketchError::NotOrthonormal(worst));
    }
    let sketches = omega.sketch_columns(basis)?;
    let m = DMatrix::from_fn(omega.ell(), k, |r, c| sketches[c][r]);
    let sv = m.singular_values();
    let hi = sv.max();
    let lo = sv.min();
    Ok(EpsilonEstimate::from_sigmas(lo, hi, k))
}

/// Incrementally measured `ε̂` on a growing subspace.
///
/// Pushed vectors need not be orthonormal: they are orthonormalized with
/// twice-applied classical Gram–Schmidt, and vectors already (numerically) in
/// the span are skipped. The Gram matrix of the sketched orthonormal basis is
/// maintained so that each estimate costs one small symmetric eigensolve.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingMonitor {
    q: Vec<Vec<f64>>,
    sq: Vec<Vec<f64>>,
    gram: Vec<Vec<f64>>,
}

impl EmbeddingMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Adds `v` to the subspace; returns `false` if it was already in the span.
    pub fn push(&mut self, omega: &SketchOperator, v: &[f64]) -> Result<bool, SketchError> {
        if v.len() != omega.n() {
            return Err(SketchError::DimensionMismatch { expected: omega.n(), got: v.len() });
        }
        let v_norm = norm(v);
        if v_norm == 0.0 {
            return Ok(false);
        }
        let mut w = v.to_vec();
        for _ in 0..2 {
            let coeffs: Vec<f64> = self.q.iter().map(|q| dot(q, &w)).collect();
            for (q, c) in self.q.iter().zip(coeffs) {
                axpy(-c, q, &mut w);
            }
        }
        let w_norm = norm(&w);
        if w_norm <= 1e-10 * v_norm {
            return Ok(false);
        }
        scale(1.0 / w_norm, &mut w);
        let s = omega.apply_unchecked(&w);
        let mut row: Vec<f64> = self.sq.iter().map(|t| dot(t, &s)).collect();
        row.push(dot(&s, &s));
        self.q.push(w);
        self.sq.push(s);
        self.gram.push(row);
        Ok(true)
    }

    pub fn estimate(&self) -> EpsilonEstimate {
        let k = self.q.len();
        if k == 0 {
            return EpsilonEstimate::empty();
        }
        let g = DMatrix::from_fn(k, k, |i, j| if j <= i { self.gram[i][j] } else { self.gram[j][i] });
        let ev = SymmetricEigen::new(g).eigenvalues;
        let lo = ev.min().max(0.0);
        let hi = ev.max().max(0.0);
        EpsilonEstimate::from_sigmas(lo.sqrt(), hi.sqrt(), k)
    }

    /// The orthonormal basis built so far.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.q
    }
}

/// `ε̂` on `span(vectors)`, which need not be orthonormal.
pub fn estimate_epsilon_span(omega: &SketchOperator, vectors: &[Vec<f64>]) -> Result<EpsilonEstimate, SketchError> {
    let mut m = EmbeddingMonitor::new();
    for v in vectors {
        m.push(omega, v)?;
    }
    Ok(m.estimate())
}
