use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{OperatorError, SpdOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrecondSpec {
    #[default]
    None,
    BlockJacobi {
        n_blocks: usize,
    },
}

impl FromStr for PrecondSpec {
    type Err = OperatorError;

    /// `none` or `block-jacobi:NB`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "none" {
            return Ok(PrecondSpec::None);
        }
        let nb = s
            .strip_prefix("block-jacobi:")
            .ok_or_else(|| OperatorError::InvalidPrecond(format!("expected 'none' or 'block-jacobi:NB', got '{s}'")))?;
        let n_blocks = nb
            .parse::<usize>()
            .map_err(|_| OperatorError::InvalidPrecond(format!("bad block count '{nb}'")))?;
        if n_blocks == 0 {
            return Err(OperatorError::InvalidPrecond("block count must be positive".into()));
        }
        Ok(PrecondSpec::BlockJacobi { n_blocks })
    }
}

impl fmt::Display for PrecondSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrecondSpec::None => write!(f, "none"),
            PrecondSpec::BlockJacobi { n_blocks } => write!(f, "block-jacobi:{n_blocks}"),
        }
    }
}

/// Contiguous, near-equal block ranges; the first `n % nb` blocks get one extra row.
pub(crate) fn block_ranges(n: usize, n_blocks: usize) -> Vec<Range<usize>> {
    let base = n / n_blocks;
    let extra = n % n_blocks;
    let mut start = 0;
    (0..n_blocks)
        .map(|b| {
            let len = base + usize::from(b < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Symmetric block-Jacobi split `L⁻¹ A L⁻ᵗ` with `M = blockdiag(A) = L Lᵗ`.
///
/// The wrapped operator is congruent to `A`, hence SPD, and has the spectrum
/// of `M⁻¹ A`.
#[derive(Debug)]
pub struct BlockJacobi {
    inner: Box<SpdOperator>,
    blocks: Vec<(Range<usize>, Cholesky<f64, Dyn>)>,
}

impl BlockJacobi {
    pub fn new(inner: SpdOperator, n_blocks: usize) -> Result<Self, OperatorError> {
        let n = inner.n();
        if n_blocks == 0 || n_blocks > n {
            return Err(OperatorError::InvalidPrecond(format!("n_blocks = {n_blocks} must lie in 1..={n}")));
        }
        let blocks = block_ranges(n, n_blocks)
            .into_iter()
            .enumerate()
            .map(|(b, range)| {
                let block = inner.diagonal_block(range.clone());
                Cholesky::new(block).map(|c| (range, c)).ok_or(OperatorError::BlockNotSpd { block: b })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { inner: Box::new(inner), blocks })
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn inner(&self) -> &SpdOperator {
        &self.inner
    }

    /// `L⁻¹ v`
    fn solve_lower(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for (range, chol) in &self.blocks {
            let mut seg = DVector::from_column_slice(&v[range.clone()]);
            chol.l_dirty().solve_lower_triangular_mut(&mut seg);
            out[range.clone()].copy_from_slice(seg.as_slice());
        }
        out
    }

    /// `L⁻ᵗ v`
    fn solve_upper(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for (range, chol) in &self.blocks {
            let mut seg = DVector::from_column_slice(&v[range.clone()]);
            chol.l_dirty().tr_solve_lower_triangular_mut(&mut seg);
            out[range.clone()].copy_from_slice(seg.as_slice());
        }
        out
    }

    pub(crate) fn apply(&self, v: &[f64], y: &mut [f64]) {
        let w = self.solve_upper(v);
        let mut u = vec![0.0; v.len()];
        self.inner.apply_unchecked(&w, &mut u);
        y.copy_from_slice(&self.solve_lower(&u));
    }

    pub(crate) fn map_rhs(&self, b: &[f64]) -> Vec<f64> {
        self.solve_lower(b)
    }

    pub(crate) fn map_solution(&self, y: &[f64]) -> Vec<f64> {
        self.solve_upper(y)
    }

    /// Dense `M` for testing.
    pub fn block_diagonal(&self) -> DMatrix<f64> {
        let n = self.inner.n();
        let mut m = DMatrix::zeros(n, n);
        for (range, _) in &self.blocks {
            let b = self.inner.diagonal_block(range.clone());
            m.view_mut((range.start, range.start), (range.len(), range.len())).copy_from(&b);
        }
        m
    }
}
