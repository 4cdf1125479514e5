//! Symmetric positive-definite operators.
//!
//! An [`SpdOperator`] is immutable after construction and can be shared across
//! threads. Every form supports [`SpdOperator::apply`]; spectral functions
//! (`A^{-1/2}`, `A^{-1}`) are available exactly for synthetic operators and
//! through a cached dense eigendecomposition for small explicit ones.

mod block_jacobi;
mod mtx;
mod spectrum;
mod synthetic;

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

pub use block_jacobi::{BlockJacobi, PrecondSpec};
pub use mtx::{load_matrix_market, parse_matrix_market, write_matrix_market, SymmetricCsr};
pub use spectrum::{SpectrumKind, SpectrumSpec, PRESETS, PRESET_DEFAULT_N};
pub use synthetic::SyntheticSpectral;

use crate::vecops::{dot, norm};

/// Largest dimension for which a dense eigendecomposition is used to provide
/// spectral access to explicit operators.
pub const DENSE_SPECTRAL_LIMIT: usize = 8192;

/// Largest dimension for which an explicit operator is densified for a direct solve.
pub const DENSE_SOLVE_LIMIT: usize = 16384;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("dimension mismatch: operator has n = {expected}, vector has length {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows} x {cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },
    #[error("Matrix Market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("Matrix Market header not supported: {0}")]
    UnsupportedHeader(String),
    #[error("conflicting duplicate entries for ({i}, {j}): {first} vs {second}")]
    ConflictingEntry { i: usize, j: usize, first: f64, second: f64 },
    #[error("invalid spectrum spec: {0}")]
    InvalidSpectrum(String),
    #[error("invalid preconditioner spec: {0}")]
    InvalidPrecond(String),
    #[error("diagonal block {block} is not SPD (Cholesky failed)")]
    BlockNotSpd { block: usize },
    #[error("operator is not positive definite (eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("diagnostic unavailable: {0}")]
    DiagnosticUnavailable(String),
    #[error("I/O error on {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug)]
enum Form {
    Dense(DMatrix<f64>),
    Sparse(SymmetricCsr),
    Synthetic(SyntheticSpectral),
    Preconditioned(BlockJacobi),
    Shifted { inner: Box<SpdOperator>, shift: f64 },
}

/// Eigendecomposition of a densified operator, computed on first use.
#[derive(Debug)]
struct DenseEigen {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

/// A symmetric positive-definite linear operator `A ∈ R^{n×n}`.
#[derive(Debug)]
pub struct SpdOperator {
    n: usize,
    form: Form,
    eigen: OnceLock<Result<DenseEigen, OperatorError>>,
}

impl SpdOperator {
    fn from_form(n: usize, form: Form) -> Self {
        Self { n, form, eigen: OnceLock::new() }
    }

    /// Wraps a dense matrix after checking it is square and symmetric to
    /// `1e-12` relative to its largest entry.
    pub fn dense(matrix: DMatrix<f64>) -> Result<Self, OperatorError> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(OperatorError::NotSquare { rows, cols });
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        for j in 0..cols {
            for i in (j + 1)..rows {
                let gap = (matrix[(i, j)] - matrix[(j, i)]).abs();
                if gap > 1e-12 * scale {
                    return Err(OperatorError::NotSymmetric { i, j, gap });
                }
            }
        }
        Ok(Self::from_form(rows, Form::Dense(matrix)))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_form(n, Form::Dense(DMatrix::identity(n, n)))
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_form(n, Form::Dense(DMatrix::from_diagonal(&DVector::from_column_slice(diag))))
    }

    pub fn sparse(csr: SymmetricCsr) -> Self {
        Self::from_form(csr.n(), Form::Sparse(csr))
    }

    pub fn synthetic(op: SyntheticSpectral) -> Self {
        Self::from_form(op.n(), Form::Synthetic(op))
    }

    /// Generates `Q Λ Qᵗ` for the given spectrum; see [`SyntheticSpectral`].
    pub fn generate(spec: &SpectrumSpec) -> Result<Self, OperatorError> {
        Ok(Self::synthetic(SyntheticSpectral::generate(spec)?))
    }

    /// `A + σ I`.
    pub fn shifted(self, shift: f64) -> Self {
        let n = self.n;
        Self::from_form(n, Form::Shifted { inner: Box::new(self), shift })
    }

    /// The symmetrically preconditioned operator `L⁻¹ A L⁻ᵗ`, where `M = L Lᵗ`
    /// is the block diagonal of `A`.
    pub fn block_jacobi(self, spec: &PrecondSpec) -> Result<Self, OperatorError> {
        match spec {
            PrecondSpec::None => Ok(self),
            PrecondSpec::BlockJacobi { n_blocks } => {
                let n = self.n;
                Ok(Self::from_form(n, Form::Preconditioned(BlockJacobi::new(self, *n_blocks)?)))
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Short human-readable description of the storage form.
    pub fn describe(&self) -> String {
        match &self.form {
            Form::Dense(_) => format!("dense n={}", self.n),
            Form::Sparse(c) => format!("sparse n={} nnz(lower)={}", self.n, c.nnz_lower()),
            Form::Synthetic(_) => format!("synthetic n={}", self.n),
            Form::Preconditioned(bj) => format!("block-jacobi({}) of [{}]", bj.n_blocks(), bj.inner().describe()),
            Form::Shifted { inner, shift } => format!("[{}] + {shift} I", inner.describe()),
        }
    }

    fn check_len(&self, len: usize) -> Result<(), OperatorError> {
        if len != self.n {
            return Err(OperatorError::DimensionMismatch { expected: self.n, got: len });
        }
        Ok(())
    }

    /// `y = A v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, OperatorError> {
        self.check_len(v.len())?;
        let mut y = vec![0.0; self.n];
        self.apply_unchecked(v, &mut y);
        Ok(y)
    }

    /// `y = A v` into a caller-provided buffer.
    pub fn apply_into(&self, v: &[f64], y: &mut [f64]) -> Result<(), OperatorError> {
        self.check_len(v.len())?;
        self.check_len(y.len())?;
        self.apply_unchecked(v, y);
        Ok(())
    }

    fn apply_unchecked(&self, v: &[f64], y: &mut [f64]) {
        match &self.form {
            Form::Dense(m) => {
                for (i, yi) in y.iter_mut().enumerate() {
                    // column-major storage: row i is strided, but symmetric so use column i
                    *yi = dot(m.column(i).as_slice(), v);
                }
            }
            Form::Sparse(c) => c.apply(v, y),
            Form::Synthetic(s) => s.apply(v, y),
            Form::Preconditioned(bj) => bj.apply(v, y),
            Form::Shifted { inner, shift } => {
                inner.apply_unchecked(v, y);
                for (yi, vi) in y.iter_mut().zip(v) {
                    *yi += shift * vi;
                }
            }
        }
    }

    /// Column `j` of `A`, i.e. `A e_j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.n];
        e[j] = 1.0;
        let mut y = vec![0.0; self.n];
        self.apply_unchecked(&e, &mut y);
        y
    }

    /// Explicit dense matrix. Refuses dimensions above [`DENSE_SOLVE_LIMIT`].
    pub fn to_dense(&self) -> Result<DMatrix<f64>, OperatorError> {
        if self.n > DENSE_SOLVE_LIMIT {
            return Err(OperatorError::DiagnosticUnavailable(format!(
                "n = {} is too large to densify (limit {DENSE_SOLVE_LIMIT})",
                self.n
            )));
        }
        match &self.form {
            Form::Dense(m) => Ok(m.clone()),
            Form::Sparse(c) => Ok(c.to_dense()),
            _ => {
                let mut m = DMatrix::zeros(self.n, self.n);
                for j in 0..self.n {
                    m.set_column(j, &DVector::from_vec(self.column(j)));
                }
                // symmetrize away roundoff from the implicit application
                let t = m.transpose();
                Ok((m + t) * 0.5)
            }
        }
    }

    /// Entries `A[r, c]` for `r, c` in `range`, used by block-Jacobi.
    pub(crate) fn diagonal_block(&self, range: std::ops::Range<usize>) -> DMatrix<f64> {
        let m = range.len();
        match &self.form {
            Form::Dense(a) => a.view((range.start, range.start), (m, m)).into_owned(),
            Form::Sparse(c) => c.diagonal_block(range),
            _ => {
                let mut b = DMatrix::zeros(m, m);
                for (jj, j) in range.clone().enumerate() {
                    let col = self.column(j);
                    for (ii, i) in range.clone().enumerate() {
                        b[(ii, jj)] = col[i];
                    }
                }
                let t = b.transpose();
                (b + t) * 0.5
            }
        }
    }

    /// Whether spectral functions are exact (synthetic form, possibly shifted).
    pub fn has_synthetic_spectrum(&self) -> bool {
        match &self.form {
            Form::Synthetic(_) => true,
            Form::Shifted { inner, .. } => inner.has_synthetic_spectrum(),
            _ => false,
        }
    }

    /// Whether [`SpdOperator::apply_inv_sqrt`] and friends are available.
    pub fn has_spectral_access(&self) -> bool {
        self.has_synthetic_spectrum() || self.n <= DENSE_SPECTRAL_LIMIT
    }

    fn dense_eigen(&self) -> Result<&DenseEigen, OperatorError> {
        self.eigen
            .get_or_init(|| {
                if self.n > DENSE_SPECTRAL_LIMIT {
                    return Err(OperatorError::DiagnosticUnavailable(format!(
                        "no spectral access: n = {} exceeds the dense limit {DENSE_SPECTRAL_LIMIT}",
                        self.n
                    )));
                }
                let eig = SymmetricEigen::new(self.to_dense()?);
                Ok(DenseEigen { values: eig.eigenvalues.as_slice().to_vec(), vectors: eig.eigenvectors })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Eigenvalues, exact for synthetic operators and from a dense
    /// eigendecomposition otherwise. Order is unspecified.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, OperatorError> {
        match &self.form {
            Form::Synthetic(s) => Ok(s.eigenvalues().to_vec()),
            Form::Shifted { inner, shift } if inner.has_synthetic_spectrum() => {
                Ok(inner.eigenvalues()?.into_iter().map(|l| l + shift).collect())
            }
            _ => Ok(self.dense_eigen()?.values.clone()),
        }
    }

    /// `(λ_min, λ_max)`.
    pub fn extreme_eigenvalues(&self) -> Result<(f64, f64), OperatorError> {
        let ev = self.eigenvalues()?;
        let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((lo, hi))
    }

    /// `λ_max / λ_min`; for synthetic operators this is the ratio of the stored
    /// eigenvalues, not an estimate.
    pub fn condition_number(&self) -> Result<f64, OperatorError> {
        let (lo, hi) = self.extreme_eigenvalues()?;
        if lo <= 0.0 {
            return Err(OperatorError::NotPositiveDefinite(lo));
        }
        Ok(hi / lo)
    }

    /// `Q f(Λ) Qᵗ v`.
    pub fn apply_spectral_fn(&self, v: &[f64], f: &dyn Fn(f64) -> f64) -> Result<Vec<f64>, OperatorError> {
        self.check_len(v.len())?;
        match &self.form {
            Form::Synthetic(s) => Ok(s.apply_fn(v, f)),
            Form::Shifted { inner, shift } if inner.has_synthetic_spectrum() => {
                let shift = *shift;
                inner.apply_spectral_fn(v, &|l| f(l + shift))
            }
            _ => {
                let eig = self.dense_eigen()?;
                let x = DVector::from_column_slice(v);
                let mut c = eig.vectors.tr_mul(&x);
                for (ci, &l) in c.iter_mut().zip(&eig.values) {
                    *ci *= f(l);
                }
                Ok((&eig.vectors * c).as_slice().to_vec())
            }
        }
    }

    fn check_positive(&self) -> Result<(), OperatorError> {
        let (lo, _) = self.extreme_eigenvalues()?;
        if lo <= 0.0 {
            return Err(OperatorError::NotPositiveDefinite(lo));
        }
        Ok(())
    }

    /// `A^{-1/2} v`. Fails with `DiagnosticUnavailable` when the operator has
    /// no spectral access.
    pub fn apply_inv_sqrt(&self, v: &[f64]) -> Result<Vec<f64>, OperatorError> {
        self.check_positive()?;
        self.apply_spectral_fn(v, &|l| 1.0 / l.sqrt())
    }

    /// `A^{1/2} v`.
    pub fn apply_sqrt(&self, v: &[f64]) -> Result<Vec<f64>, OperatorError> {
        self.check_positive()?;
        self.apply_spectral_fn(v, &|l| l.sqrt())
    }

    /// `A^{-1} v` through the spectral decomposition.
    pub fn apply_inverse_spectral(&self, v: &[f64]) -> Result<Vec<f64>, OperatorError> {
        self.check_positive()?;
        self.apply_spectral_fn(v, &|l| 1.0 / l)
    }

    /// Maps a right-hand side of the original system to the variables of this
    /// operator. Identity except for block-Jacobi wrappers (`b ↦ L⁻¹ b`).
    pub fn map_rhs(&self, b: &[f64]) -> Result<Vec<f64>, OperatorError> {
        self.check_len(b.len())?;
        match &self.form {
            Form::Preconditioned(bj) => Ok(bj.map_rhs(b)),
            _ => Ok(b.to_vec()),
        }
    }

    /// Maps a solution of this operator back to the original variables.
    /// Identity except for block-Jacobi wrappers (`y ↦ L⁻ᵗ y`).
    pub fn map_solution(&self, y: &[f64]) -> Result<Vec<f64>, OperatorError> {
        self.check_len(y.len())?;
        match &self.form {
            Form::Preconditioned(bj) => Ok(bj.map_solution(y)),
            _ => Ok(y.to_vec()),
        }
    }

    /// Energy norm `‖v‖_A = √⟨v, A v⟩`.
    pub fn energy_norm(&self, v: &[f64]) -> Result<f64, OperatorError> {
        let av = self.apply(v)?;
        Ok(dot(v, &av).max(0.0).sqrt())
    }

    /// Largest symmetry defect `|⟨u, Av⟩ − ⟨Au, v⟩| / (‖u‖‖Av‖)` over the given pairs.
    pub fn symmetry_defect(&self, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64, OperatorError> {
        let mut worst: f64 = 0.0;
        for (u, v) in pairs {
            let au = self.apply(u)?;
            let av = self.apply(v)?;
            let gap = (dot(u, &av) - dot(&au, v)).abs();
            let scale = norm(u) * norm(&av);
            if scale > 0.0 {
                worst = worst.max(gap / scale);
            }
        }
        Ok(worst)
    }
}
