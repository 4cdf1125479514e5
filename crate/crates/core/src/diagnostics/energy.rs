use crate::operators::SpdOperator;
use crate::sketch::{estimate_epsilon_span, SketchOperator};
use crate::solvers::{CgSolve, IterationTrace};
use crate::vecops::sub;

use super::DiagnosticsError;

/// `(1 + ε̃ + 2ε)/(1 − ε) · Σ_{j=k}^{k+d−1} |γ_j| ‖Ωp_j‖²`.
///
/// `γ_j` and `‖Ωp_j‖` are read from trace row `j + 1`.
pub fn arcg_energy_bound(
    trace: &IterationTrace,
    epsilon_hat: f64,
    eps_tilde_max: f64,
    k: usize,
    d: usize,
) -> Result<f64, DiagnosticsError> {
    if !(0.0..1.0).contains(&epsilon_hat) {
        return Err(DiagnosticsError::InvalidInput(format!("epsilon must lie in [0, 1), got {epsilon_hat}")));
    }
    if k + d > trace.len() {
        return Err(DiagnosticsError::TooFewIterations { needed: k + d, have: trace.len() });
    }
    let mut sum = 0.0;
    for row in &trace.rows[k..k + d] {
        let (gamma, sp) = row
            .gamma
            .zip(row.sketched_p_norm)
            .ok_or_else(|| DiagnosticsError::InvalidInput("trace lacks gamma or |Omega p|".into()))?;
        sum += gamma.abs() * sp * sp;
    }
    Ok((1.0 + eps_tilde_max + 2.0 * epsilon_hat) / (1.0 - epsilon_hat) * sum)
}

/// One window `[k, k+d]` of an arCG run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWindow {
    pub k: usize,
    pub d: usize,
    /// `‖x − x_k‖²_A − ‖x − x_{k+d}‖²_A`
    pub drop: f64,
    /// `None` when `ε̂ ≥ 1` on the window.
    pub bound: Option<f64>,
    /// `ε̂` on `span{r_k, …, r_{k+d}, p_k, …, p_{k+d−1}}`.
    pub epsilon_hat: f64,
    /// `max_{k ≤ j < k+d} ε̃_j`.
    pub eps_tilde: f64,
}

impl EnergyWindow {
    pub fn holds(&self) -> bool {
        self.bound.is_some_and(|b| self.drop <= b)
    }
}

/// Every length-`d` window of an arCG run recorded with iterates, vectors and
/// quotients.
pub fn arcg_energy_windows(
    op: &SpdOperator,
    x_exact: &[f64],
    omega: &SketchOperator,
    solve: &CgSolve,
    d: usize,
) -> Result<Vec<EnergyWindow>, DiagnosticsError> {
    let k_total = solve.iterations();
    if d == 0 {
        return Err(DiagnosticsError::InvalidInput("window length must be positive".into()));
    }
    if solve.iterates.len() != k_total + 1
        || solve.residuals.len() != k_total + 1
        || solve.directions.len() != k_total
    {
        return Err(DiagnosticsError::InvalidInput("arCG run must record iterates and vectors".into()));
    }
    let energies = solve
        .iterates
        .iter()
        .map(|xk| op.energy_norm(&sub(x_exact, xk)).map(|e| e * e))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = Vec::new();
    for k in 0..(k_total + 1).saturating_sub(d) {
        let mut vectors: Vec<Vec<f64>> = solve.residuals[k..=k + d].to_vec();
        vectors.extend_from_slice(&solve.directions[k..k + d]);
        let epsilon_hat = estimate_epsilon_span(omega, &vectors)?.epsilon_hat;
        let eps_tilde = solve.trace.rows[k..k + d]
            .iter()
            .map(|r| r.eps_tilde.ok_or_else(|| DiagnosticsError::InvalidInput("arCG run lacks quotients".into())))
            .try_fold(0.0_f64, |m, e| e.map(|e| m.max(e)))?;
        let bound = (epsilon_hat < 1.0)
            .then(|| arcg_energy_bound(&solve.trace, epsilon_hat, eps_tilde, k, d))
            .transpose()?;
        out.push(EnergyWindow { k, d, drop: energies[k] - energies[k + d], bound, epsilon_hat, eps_tilde });
    }
    Ok(out)
}
