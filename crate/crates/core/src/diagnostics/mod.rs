//! Per-iteration evaluation of the error bounds for randomized projection
//! methods, Hessenberg noise statistics and spike reports.
//!
//! Every bound is evaluated with an embedding quality `ε̂` measured on the
//! subspace the bound actually needs, so the inequalities can be asserted
//! rather than holding only with some probability.

mod bounds;
mod csv;
mod energy;
mod noise;
mod spikes;

use nalgebra::{Cholesky, DVector, Dyn};
use thiserror::Error;

use crate::operators::{OperatorError, SpdOperator, DENSE_SOLVE_LIMIT};
use crate::sketch::SketchError;
use crate::solvers::SolverError;
use crate::vecops::{dot, norm, sub};


pub use bounds::{alpha_beta_diagnostic_bounds, bound_report, residual_bounds, AlphaBeta, AlphaBetaContext, BoundOptions, BoundReport, BoundRow};
pub use csv::{format_float, write_histogram_csv, write_samples_csv, write_trace_csv, TraceCsvRow, TRACE_HEADER};
pub use energy::{arcg_energy_bound, arcg_energy_windows, EnergyWindow};
pub use noise::{hessenberg_noise, HistogramBin, NoiseReport};
pub use spikes::{second_difference_log, spike_report, SpikeEntry, SpikeReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("diagnostic unavailable: {0}")]
    Unavailable(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("need at least {needed} iterations, have {have}")]
    TooFewIterations { needed: usize, have: usize },
}

/// Access to `A⁻¹`: through the spectrum when the operator has one, by a
/// dense Cholesky factor otherwise.
pub(crate) enum Inverter<'a> {
    Spectral(&'a SpdOperator),
    Dense(&'a SpdOperator, Cholesky<f64, Dyn>),
}

impl<'a> Inverter<'a> {
    pub(crate) fn new(op: &'a SpdOperator) -> Result<Self, DiagnosticsError> {
        if op.has_synthetic_spectrum() {
            return Ok(Inverter::Spectral(op));
        }
        if op.n() > DENSE_SOLVE_LIMIT {
            return Err(DiagnosticsError::Unavailable(format!(
                "A^-1 needs spectral access or n <= {DENSE_SOLVE_LIMIT} (n = {})",
                op.n()
            )));
        }
        let chol = op
            .to_dense()?
            .cholesky()
            .ok_or_else(|| DiagnosticsError::from(OperatorError::NotPositiveDefinite(f64::NAN)))?;
        Ok(Inverter::Dense(op, chol))
    }

    /// `A⁻¹ b`; the dense path adds two steps of iterative refinement.
    pub(crate) fn solve(&self, b: &[f64]) -> Result<Vec<f64>, DiagnosticsError> {
        match self {
            Inverter::Spectral(op) => Ok(op.apply_inverse_spectral(b)?),
            Inverter::Dense(op, chol) => {
                let mut x = chol.solve(&DVector::from_column_slice(b));
                for _ in 0..2 {
                    let r = sub(b, &op.apply(x.as_slice())?);
                    x += chol.solve(&DVector::from_vec(r));
                }
                Ok(x.as_slice().to_vec())
            }
        }
    }

    /// `‖A^{-1/2} w‖ = √(wᵗ A⁻¹ w)`.
    pub(crate) fn inv_sqrt_norm(&self, w: &[f64]) -> Result<f64, DiagnosticsError> {
        match self {
            Inverter::Spectral(op) => Ok(norm(&op.apply_inv_sqrt(w)?)),
            Inverter::Dense(_, chol) => {
                let y = chol.solve(&DVector::from_column_slice(w));
                Ok(dot(y.as_slice(), w).max(0.0).sqrt())
            }
        }
    }
}

/// `x = A⁻¹ b`: exact through the spectrum for synthetic operators, by a dense
/// Cholesky solve with two refinement steps otherwise (`n ≤ 16384`).
pub fn exact_solution(op: &SpdOperator, b: &[f64]) -> Result<Vec<f64>, DiagnosticsError> {
    if b.len() != op.n() {
        return Err(OperatorError::DimensionMismatch { expected: op.n(), got: b.len() }.into());
    }
    Inverter::new(op)?.solve(b)
}

/// `‖x − y‖_A = √⟨e, Ae⟩` with `e = x − y`.
pub fn a_norm_error(op: &SpdOperator, x: &[f64], y: &[f64]) -> Result<f64, DiagnosticsError> {
    Ok(op.energy_norm(&sub(x, y))?)
}

/// `‖b − A x‖`.
pub fn residual_norm(op: &SpdOperator, b: &[f64], x: &[f64]) -> Result<f64, DiagnosticsError> {
    Ok(norm(&sub(b, &op.apply(x)?)))
}

/// `(1 + ε√κ)/(1 − ε√κ)`, or `None` when `ε√κ ≥ 1`.
pub fn quasi1_factor(epsilon_hat: f64, cond: f64) -> Option<f64> {
    let t = epsilon_hat * cond.sqrt();
    (t < 1.0).then(|| (1.0 + t) / (1.0 - t))
}

/// Right-hand side of the first quasi-optimality bound, `None` when undefined.
pub fn bound_quasi1(err_det_a: f64, epsilon_hat: f64, cond: f64) -> Option<f64> {
    quasi1_factor(epsilon_hat, cond).map(|f| f * err_det_a)
}

/// `(1 + α²β²)^{1/2} · err_det`.
pub fn bound_quasi2(err_det_a: f64, alpha: f64, beta: f64) -> f64 {
    let ab = alpha * beta;
    if ab.is_finite() {
        (1.0 + ab * ab).sqrt() * err_det_a
    } else if alpha.is_infinite() && beta == 0.0 {
        err_det_a
    } else {
        f64::INFINITY
    }
}

/// Fills `a_norm_error` of each trace row from the iterates `x_0, …, x_K`.
pub fn fill_a_norm_errors(
    trace: &mut crate::solvers::IterationTrace,
    op: &SpdOperator,
    x_exact: &[f64],
    iterates: &[Vec<f64>],
) -> Result<(), DiagnosticsError> {
    for row in trace.rows.iter_mut() {
        let xk = iterates
            .get(row.iter)
            .ok_or_else(|| DiagnosticsError::InvalidInput(format!("iterate {} was not recorded", row.iter)))?;
        row.a_norm_error = Some(a_norm_error(op, x_exact, xk)?);
    }
    Ok(())
}
