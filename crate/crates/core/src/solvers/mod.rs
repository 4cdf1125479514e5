//! Krylov solvers: deterministic FOM, Lanczos and CG, and their randomized
//! counterparts RFOM and arCG.
//!
//! All solvers use the residual convention `r₀ = b − A x₀`.

mod arcg;
mod cg;
mod fom;
mod lanczos;
mod rfom;
mod ritz;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::operators::OperatorError;
use crate::sketch::SketchError;
use crate::vecops::{axpy, norm};

pub use arcg::{arcg_solve, ArcgOptions, DirectionSketch, ResidualSketch, StopNorm};
pub use cg::cg_solve;
pub use fom::fom_solve;
pub use lanczos::lanczos_solve;
pub use rfom::{ls_coefficients, mgs_coefficients, rfom_solve, CoefficientMethod};
pub use ritz::ritz_values;

/// `h_{j+1,j} ≤ BREAKDOWN_RTOL · ‖A v_j‖` (or its sketched analogue) is a happy breakdown.
pub const BREAKDOWN_RTOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error("{what} has length {got}, expected {expected}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
    #[error("k_max = {k_max} exceeds the admissible maximum {limit}")]
    TooManyIterations { k_max: usize, limit: usize },
    #[error("iteration {iteration}: Hessenberg matrix is numerically singular")]
    SingularHessenberg { iteration: usize },
    #[error("iteration {iteration}: <Ap, p> = {curvature:e} <= 0, operator is not positive definite")]
    NotPositiveDefinite { iteration: usize, curvature: f64 },
    #[error("iteration {iteration}: sketched curvature <ΩAp, Ωp> vanished")]
    CurvatureVanished { iteration: usize },
    #[error("least-squares coefficients: sketched basis is rank deficient")]
    RankDeficient,
    #[error("Ritz values: QR iteration did not converge for a {0}x{0} matrix")]
    RitzNonConvergence(usize),
    #[error("requested iteration {k} but only {available} are available")]
    IterationOutOfRange { k: usize, available: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Relative (possibly sketched) residual reached the tolerance.
    Converged,
    MaxIterations,
    /// Happy breakdown: the iterate is exact in the current Krylov space.
    Breakdown,
    /// arCG divergence detector fired (`‖Ωr_k‖ > 1e6 ‖Ωr₀‖`).
    Diverged,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max-iterations",
            Termination::Breakdown => "breakdown",
            Termination::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub k_max: usize,
    /// Stop once the (sketched, for RFOM) residual norm drops below `tol` times its initial value.
    pub tol: f64,
    /// Keep every iterate `x_0, …, x_K` in the output.
    pub record_iterates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { k_max: 100, tol: 1e-8, record_iterates: false }
    }
}

/// One row per iterate `x_k`, `k ≥ 1`.
///
/// For CG and arCG, `gamma`, `delta`, `eps_tilde` and `sketched_p_norm`
/// describe the step `x_{k−1} → x_k`, i.e. they hold `γ_{k−1}`, `δ_{k−1}`, ….
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub residual_norm: f64,
    pub sketched_residual_norm: Option<f64>,
    pub a_norm_error: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub quasi1: Option<f64>,
    pub quasi2: Option<f64>,
    pub s_k1: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub eps_tilde: Option<f64>,
    pub sketched_p_norm: Option<f64>,
}

impl TraceRow {
    pub fn new(iter: usize, residual_norm: f64) -> Self {
        Self { iter, residual_norm, ..Default::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row for iterate `x_k`.
    pub fn row(&self, k: usize) -> Option<&TraceRow> {
        self.rows.get(k.checked_sub(1)?)
    }

    pub fn residual_norms(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.residual_norm).collect()
    }
}

/// Krylov basis `V_{k+1}`, Hessenberg `H_{k+1,k}` and, for randomized runs,
/// the sketched basis `S_{k+1} = Ω V_{k+1}`.
#[derive(Debug, Clone)]
pub struct KrylovState {
    pub(crate) basis: Vec<Vec<f64>>,
    /// Column `j` (0-based) holds `h_{1,j+1}, …, h_{j+2,j+1}`.
    pub(crate) h_cols: Vec<Vec<f64>>,
    pub(crate) sketched: Option<Vec<Vec<f64>>>,
    pub(crate) beta: f64,
    pub(crate) x0: Vec<f64>,
    pub(crate) breakdown: bool,
}

impl KrylovState {
    pub(crate) fn new(x0: Vec<f64>, beta: f64) -> Self {
        Self { basis: Vec::new(), h_cols: Vec::new(), sketched: None, beta, x0, breakdown: false }
    }

    pub fn n(&self) -> usize {
        self.x0.len()
    }

    /// Number of completed iterations `k` (columns of `H_{k+1,k}`).
    pub fn iterations(&self) -> usize {
        self.h_cols.len()
    }

    /// `v_1, …, v_{k+1}`. After a happy breakdown `v_{k+1}` is the zero vector.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn sketched_basis(&self) -> Option<&[Vec<f64>]> {
        self.sketched.as_deref()
    }

    /// `‖r₀‖`, or `‖Ωr₀‖` for randomized runs.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn breakdown(&self) -> bool {
        self.breakdown
    }

    /// `h_{i,j}` with 1-based indices; zero outside the stored pattern.
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.h_cols.get(j - 1).and_then(|c| c.get(i - 1)).copied().unwrap_or(0.0)
    }

    fn check_k(&self, k: usize) -> Result<(), SolverError> {
        if k == 0 || k > self.iterations() {
            return Err(SolverError::IterationOutOfRange { k, available: self.iterations() });
        }
        Ok(())
    }

    /// `H_{k+1,k}`.
    pub fn hessenberg(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(k + 1, k, |i, j| self.h(i + 1, j + 1))
    }

    /// `H_k`, the leading `k × k` block.
    pub fn h_square(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(k, k, |i, j| self.h(i + 1, j + 1))
    }

    /// `ρ_k = H_k⁻¹ (β e₁)`.
    pub fn coefficients(&self, k: usize) -> Result<Vec<f64>, SolverError> {
        self.check_k(k)?;
        let mut rhs = vec![0.0; k];
        rhs[0] = self.beta;
        solve_hessenberg(&self.h_square(k), &rhs).ok_or(SolverError::SingularHessenberg { iteration: k })
    }

    /// `x_k = x₀ + V_k ρ_k`.
    pub fn iterate(&self, k: usize) -> Result<Vec<f64>, SolverError> {
        let rho = self.coefficients(k)?;
        let mut x = self.x0.clone();
        for (v, c) in self.basis.iter().zip(&rho) {
            axpy(*c, v, &mut x);
        }
        Ok(x)
    }

    /// `s_{k,1} = h_{k+1,k} · (H_k⁻¹)[k,1]`.
    pub fn s_k1(&self, k: usize) -> Result<f64, SolverError> {
        self.check_k(k)?;
        let mut e1 = vec![0.0; k];
        e1[0] = 1.0;
        let y = solve_hessenberg(&self.h_square(k), &e1).ok_or(SolverError::SingularHessenberg { iteration: k })?;
        Ok(self.h(k + 1, k) * y[k - 1])
    }
}

/// Solves `H y = rhs` for square upper-Hessenberg `H` by Givens QR.
/// Returns `None` when some `|R_ii| ≤ ε_mach ‖H‖_F`.
pub(crate) fn solve_hessenberg(h: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let k = h.nrows();
    let mut r = h.clone();
    let mut y = rhs.to_vec();
    for j in 0..k.saturating_sub(1) {
        let (a, b) = (r[(j, j)], r[(j + 1, j)]);
        if b == 0.0 {
            continue;
        }
        let rr = a.hypot(b);
        let (c, s) = (a / rr, b / rr);
        for col in j..k {
            let (u, w) = (r[(j, col)], r[(j + 1, col)]);
            r[(j, col)] = c * u + s * w;
            r[(j + 1, col)] = -s * u + c * w;
        }
        let (u, w) = (y[j], y[j + 1]);
        y[j] = c * u + s * w;
        y[j + 1] = -s * u + c * w;
    }
    let tiny = f64::EPSILON * h.norm();
    for i in (0..k).rev() {
        let d = r[(i, i)];
        if !(d.abs() > tiny) {
            return None;
        }
        let mut acc = y[i];
        for col in (i + 1)..k {
            acc -= r[(i, col)] * y[col];
        }
        y[i] = acc / d;
    }
    Some(y)
}

pub(crate) fn check_system(n: usize, b: &[f64], x0: &[f64]) -> Result<(), SolverError> {
    if b.len() != n {
        return Err(SolverError::DimensionMismatch { what: "right-hand side", expected: n, got: b.len() });
    }
    if x0.len() != n {
        return Err(SolverError::DimensionMismatch { what: "initial guess", expected: n, got: x0.len() });
    }
    Ok(())
}

/// Output of FOM, Lanczos and RFOM.
#[derive(Debug, Clone)]
pub struct KrylovSolve {
    pub x: Vec<f64>,
    pub state: KrylovState,
    pub trace: IterationTrace,
    pub termination: Termination,
    /// `x_0, …, x_K` when requested.
    pub iterates: Vec<Vec<f64>>,
}

impl KrylovSolve {
    pub fn iterations(&self) -> usize {
        self.state.iterations()
    }
}

/// Output of CG and arCG.
#[derive(Debug, Clone)]
pub struct CgSolve {
    pub x: Vec<f64>,
    pub trace: IterationTrace,
    pub termination: Termination,
    /// `x_0, …, x_K` when requested.
    pub iterates: Vec<Vec<f64>>,
    /// `r_0, …, r_K` when vectors are recorded (arCG only).
    pub residuals: Vec<Vec<f64>>,
    /// `p_0, …, p_{K−1}` when vectors are recorded (arCG only).
    pub directions: Vec<Vec<f64>>,
}

impl CgSolve {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Shared Arnoldi bookkeeping after `h_{j+1,j}` and `z` are known: records
/// the column, appends `v_{j+1}` and reports whether a happy breakdown occurred.
pub(crate) fn finish_column(state: &mut KrylovState, mut col: Vec<f64>, z: Vec<f64>, h_next: f64, threshold: f64) -> bool {
    if h_next <= threshold {
        col.push(0.0);
        state.h_cols.push(col);
        state.basis.push(vec![0.0; z.len()]);
        state.breakdown = true;
        return true;
    }
    col.push(h_next);
    state.h_cols.push(col);
    state.basis.push(z.into_iter().map(|zi| zi / h_next).collect());
    false
}

/// Residual norm and iterate bookkeeping shared by the Arnoldi-type solvers.
pub(crate) fn implicit_residual(state: &KrylovState, k: usize) -> Result<(f64, f64), SolverError> {
    let s = state.s_k1(k)?;
    let v_norm = norm(&state.basis[k]);
    Ok((s, state.beta * s.abs() * v_norm))
}
