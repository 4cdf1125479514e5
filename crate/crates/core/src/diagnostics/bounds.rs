use crate::operators::SpdOperator;
use crate::sketch::{EmbeddingMonitor, SketchOperator};
use crate::solvers::{IterationTrace, KrylovSolve, KrylovState};
use crate::vecops::{axpy, dot, norm, sub};

use super::{bound_quasi1, bound_quasi2, csv::TraceCsvRow, DiagnosticsError, Inverter};

/// Precomputed quantities for `α_k`, `β_k` along a deterministic Arnoldi run.
///
/// `P_k` is the orthogonal projector `V̆_k V̆_kᵗ`; `P^Ω_k` is the sketched
/// projector `V̆_k (ΩV̆_k)⁺ Ω`, applied through a QR factorisation of the
/// sketched basis built once with twice-applied classical Gram–Schmidt.
pub struct AlphaBetaContext<'a> {
    op: &'a SpdOperator,
    inverter: Inverter<'a>,
    x: Vec<f64>,
    state: &'a KrylovState,
    iterates: Vec<Vec<f64>>,
    av: Vec<Vec<f64>>,
    sketched_av: Vec<Vec<f64>>,
    sketched_v: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
    /// Largest `k` with `ΩV̆_k` of full column rank.
    full_rank: usize,
    lambda_min: f64,
}

/// `α_k`, `β_k` and the two diagnostic bounds on `|1 − 1/α_k|` and `|β_k|`.
///
/// With this orientation of `α_k`, `‖x_k − x̆_k‖_A ≤ |α_k β_k| ‖x − x̆_k‖_A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBeta {
    pub k: usize,
    /// `⟨x − x̆_{k−1}, P_k A v̆_k⟩ / ⟨x − x̆_{k−1}, P^Ω_k A v̆_k⟩`, the factor
    /// with `⟨v̆_k, x_k − x₀⟩ = α_k ⟨v̆_k, x̆_k − x₀⟩`; `+∞` when the denominator vanishes.
    pub alpha: f64,
    pub beta: f64,
    pub alpha_bound: f64,
    pub beta_bound: f64,
}

impl<'a> AlphaBetaContext<'a> {
    pub fn new(
        op: &'a SpdOperator,
        omega: &SketchOperator,
        x_exact: &[f64],
        det: &'a KrylovState,
    ) -> Result<Self, DiagnosticsError> {
        let n = op.n();
        if x_exact.len() != n || det.n() != n || omega.n() != n {
            return Err(DiagnosticsError::InvalidInput("dimensions of operator, sketch, solution and basis differ".into()));
        }
        let k_max = det.iterations();
        let inverter = Inverter::new(op)?;
        let (lambda_min, _) = op.extreme_eigenvalues()?;
        let mut iterates = vec![det.x0().to_vec()];
        for k in 1..=k_max {
            iterates.push(det.iterate(k)?);
        }
        let basis = det.basis();
        let av = basis[..k_max].iter().map(|v| op.apply(v)).collect::<Result<Vec<_>, _>>()?;
        let sketched_av = omega.sketch_columns(&av)?;
        let sketched_v = omega.sketch_columns(basis)?;

        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut r: Vec<Vec<f64>> = Vec::new();
        let mut full_rank = 0;
        for s in &sketched_v[..k_max] {
            let mut w = s.clone();
            let mut col = vec![0.0; q.len() + 1];
            for _ in 0..2 {
                for (i, qi) in q.iter().enumerate() {
                    let c = dot(qi, &w);
                    axpy(-c, qi, &mut w);
                    col[i] += c;
                }
            }
            let wn = norm(&w);
            if !(wn > 1e-12 * norm(s)) {
                break;
            }
            col[q.len()] = wn;
            q.push(w.into_iter().map(|t| t / wn).collect());
            r.push(col);
            full_rank += 1;
        }
        Ok(Self {
            op,
            inverter,
            x: x_exact.to_vec(),
            state: det,
            iterates,
            av,
            sketched_av,
            sketched_v,
            q,
            r,
            full_rank,
            lambda_min,
        })
    }

    pub fn iterations(&self) -> usize {
        self.full_rank
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// `x̆_k`.
    pub fn det_iterate(&self, k: usize) -> &[f64] {
        &self.iterates[k]
    }

    /// `P_k z`.
    pub fn projection(&self, k: usize, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        for v in &self.state.basis()[..k] {
            axpy(dot(v, z), v, &mut out);
        }
        out
    }

    /// `P^Ω_k z` given the sketch `Ωz`.
    fn sketched_projection(&self, k: usize, sz: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.q[..k].iter().map(|qi| dot(qi, sz)).collect();
        for i in (0..k).rev() {
            let mut acc = y[i];
            for j in i + 1..k {
                acc -= self.r[j][i] * y[j];
            }
            y[i] = acc / self.r[i][i];
        }
        let mut out = vec![0.0; self.x.len()];
        for (v, c) in self.state.basis()[..k].iter().zip(&y) {
            axpy(*c, v, &mut out);
        }
        out
    }

    pub fn alpha_beta(&self, k: usize) -> Result<AlphaBeta, DiagnosticsError> {
        if k == 0 || k > self.full_rank {
            return Err(DiagnosticsError::TooFewIterations { needed: k.max(1), have: self.full_rank });
        }
        let basis = self.state.basis();
        let e_prev = sub(&self.x, &self.iterates[k - 1]);
        let pav = self.projection(k, &self.av[k - 1]);
        let psav = self.sketched_projection(k, &self.sketched_av[k - 1]);
        let den = dot(&e_prev, &pav);
        let num = dot(&e_prev, &psav);
        let alpha = if num == 0.0 { f64::INFINITY } else { den / num };

        let w = self.sketched_projection(k, &self.sketched_v[k]);
        let w_norm = norm(&w);
        let h = dot(&basis[k], &self.av[k - 1]);
        let c = dot(&basis[k - 1], &sub(&self.iterates[k], self.state.x0()));
        let err = self.op.energy_norm(&sub(&self.x, &self.iterates[k]))?;
        let inv_sqrt_w = self.inverter.inv_sqrt_norm(&w)?;
        let beta = if err == 0.0 { 0.0 } else { inv_sqrt_w * h * c / err };

        let pe_norm = norm(&self.projection(k, &e_prev));
        let alpha_bound = if den == 0.0 { f64::INFINITY } else { w_norm * pe_norm * h.abs() / den.abs() };
        let beta_bound = if err == 0.0 { 0.0 } else { w_norm * h.abs() * c.abs() / (self.lambda_min.sqrt() * err) };
        Ok(AlphaBeta { k, alpha, beta, alpha_bound, beta_bound })
    }
}

/// The diagnostic upper bounds on `|1 − 1/α_k|` and `|β_k|`.
pub fn alpha_beta_diagnostic_bounds(ctx: &AlphaBetaContext<'_>, k: usize) -> Result<(f64, f64), DiagnosticsError> {
    let ab = ctx.alpha_beta(k)?;
    Ok((ab.alpha_bound, ab.beta_bound))
}

/// Residual bounds for randomized FOM at step `k`:
///
/// - `‖A x₀‖ + (1 + ε) ‖Ωr₀‖ |s_{k,1}|`
/// - `‖r̆_k‖ + ‖r₀‖ (|s̆_{k,1}| + √((1+ε)/(1−ε)) |s_{k,1}|)`, `None` for `ε ≥ 1`.
pub fn residual_bounds(
    rand: &KrylovState,
    det: &KrylovState,
    k: usize,
    epsilon: f64,
    ax0_norm: f64,
    r0_norm: f64,
    det_residual_norm: f64,
) -> Result<(f64, Option<f64>), DiagnosticsError> {
    let s = rand.s_k1(k)?;
    let s_det = det.s_k1(k)?;
    let b1 = ax0_norm + (1.0 + epsilon) * rand.beta() * s.abs();
    let b2 = (epsilon < 1.0)
        .then(|| det_residual_norm + r0_norm * (s_det.abs() + ((1.0 + epsilon) / (1.0 - epsilon)).sqrt() * s.abs()));
    Ok((b1, b2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    pub quasi1: bool,
    pub alpha_beta: bool,
    pub residual: bool,
    /// Fixed `ε` for the residual bounds; measured on `K_{k+1}` when `None`.
    pub residual_epsilon: Option<f64>,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self { quasi1: true, alpha_beta: true, residual: true, residual_epsilon: None }
    }
}

/// Everything known about iteration `k` of a deterministic/randomized pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundRow {
    pub iter: usize,
    pub err_det_a: f64,
    pub err_rand_a: f64,
    pub res_norm: f64,
    pub det_res_norm: f64,
    pub s_k1: f64,
    pub s_k1_det: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub alpha_bound: Option<f64>,
    pub beta_bound: Option<f64>,
    pub quasi1: Option<f64>,
    pub quasi2: Option<f64>,
    /// `ε̂` on `K_{k+1} + span(x)`.
    pub eps_quasi1: Option<f64>,
    /// `ε` used in the residual bounds.
    pub eps_residual: Option<f64>,
    pub res_bound1: Option<f64>,
    pub res_bound2: Option<f64>,
    /// `(‖x − x_k‖²_A − ‖x − x̆_k‖²_A − ‖x_k − x̆_k‖²_A) / ‖x − x_k‖²_A`.
    pub pythagoras_defect: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub cond: Option<f64>,
    pub lambda_min: Option<f64>,
}

impl BoundReport {
    /// Copies errors and bounds into the randomized solver's trace.
    pub fn apply_to_trace(&self, trace: &mut IterationTrace) {
        for (row, b) in trace.rows.iter_mut().zip(&self.rows) {
            row.a_norm_error = Some(b.err_rand_a);
            row.alpha = b.alpha;
            row.beta = b.beta;
            row.quasi1 = b.quasi1;
            row.quasi2 = b.quasi2;
            row.s_k1 = Some(b.s_k1);
        }
    }

    pub fn csv_rows(&self) -> Vec<TraceCsvRow> {
        self.rows
            .iter()
            .map(|b| TraceCsvRow {
                iter: b.iter,
                err_det_a: Some(b.err_det_a),
                err_rand_a: Some(b.err_rand_a),
                alpha: b.alpha,
                beta: b.beta,
                quasi1: b.quasi1,
                quasi2: b.quasi2,
                res_norm: Some(b.res_norm),
                res_bound1: b.res_bound1,
                res_bound2: b.res_bound2,
                s_k1: Some(b.s_k1),
                ..Default::default()
            })
            .collect()
    }
}

/// Iterations at which `ε̂` is measured: every step up to 20, then steps
/// growing by 10 %, and always the last one.
fn checkpoints(k_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 1;
    while k < k_max {
        out.push(k);
        k = if k < 20 { k + 1 } else { (k as f64 * 1.1).ceil() as usize };
    }
    out.push(k_max);
    out
}

/// `ε̂_k` for `k = 1, …, k_max` from a growing subspace, measured at
/// checkpoints only. Between checkpoints the estimate of the next, larger
/// subspace is used; it contains the current one, so it is a valid `ε`.
fn nested_epsilons(
    omega: &SketchOperator,
    mut monitor: EmbeddingMonitor,
    vectors: &[Vec<f64>],
    k_max: usize,
) -> Result<Vec<f64>, DiagnosticsError> {
    let mut eps = vec![0.0; k_max];
    let mut filled = 0;
    for c in checkpoints(k_max) {
        for v in &vectors[filled..c] {
            monitor.push(omega, v)?;
        }
        let e = monitor.estimate().epsilon_hat;
        eps[filled..c].fill(e);
        filled = c;
    }
    Ok(eps)
}

/// Evaluates all FOM/RFOM bounds for `k = 1, …, min(K_det, K_rand)`.
///
/// Unavailable pieces (no spectral access, `ε̂√κ ≥ 1`, …) are left as `None`.
pub fn bound_report(
    op: &SpdOperator,
    b: &[f64],
    x_exact: &[f64],
    det: &KrylovSolve,
    rand: &KrylovSolve,
    omega: &SketchOperator,
    opts: &BoundOptions,
) -> Result<BoundReport, DiagnosticsError> {
    let k_max = det.iterations().min(rand.iterations());
    let cond = op.condition_number().ok();
    let ctx = if opts.alpha_beta { AlphaBetaContext::new(op, omega, x_exact, &det.state).ok() } else { None };
    let x0 = rand.state.x0();
    let ax0_norm = norm(&op.apply(x0)?);
    let r0_norm = norm(&sub(b, &op.apply(x0)?));

    // ε̂ on K_{k+1} + span(x), and on K_{k+1}; entry k−1 belongs to iteration k.
    let quasi_eps = if opts.quasi1 && cond.is_some() && k_max > 0 {
        let mut m = EmbeddingMonitor::new();
        m.push(omega, x_exact)?;
        m.push(omega, &det.state.basis()[0])?;
        Some(nested_epsilons(omega, m, &det.state.basis()[1..], k_max)?)
    } else {
        None
    };
    let res_eps = match (opts.residual, opts.residual_epsilon) {
        (true, None) if k_max > 0 => {
            let mut m = EmbeddingMonitor::new();
            m.push(omega, &rand.state.basis()[0])?;
            Some(nested_epsilons(omega, m, &rand.state.basis()[1..], k_max)?)
        }
        (true, Some(e)) => Some(vec![e; k_max]),
        _ => None,
    };

    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let x_det = match &ctx {
            Some(c) => c.det_iterate(k).to_vec(),
            None => det.state.iterate(k)?,
        };
        let x_rand = rand.state.iterate(k)?;
        let err_det_a = op.energy_norm(&sub(x_exact, &x_det))?;
        let err_rand_a = op.energy_norm(&sub(x_exact, &x_rand))?;
        let diff_a = op.energy_norm(&sub(&x_rand, &x_det))?;
        let pythagoras_defect = if err_rand_a > 0.0 {
            (err_rand_a.powi(2) - err_det_a.powi(2) - diff_a.powi(2)) / err_rand_a.powi(2)
        } else {
            0.0
        };
        let mut row = BoundRow {
            iter: k,
            err_det_a,
            err_rand_a,
            res_norm: norm(&sub(b, &op.apply(&x_rand)?)),
            det_res_norm: norm(&sub(b, &op.apply(&x_det)?)),
            s_k1: rand.state.s_k1(k)?,
            s_k1_det: det.state.s_k1(k)?,
            pythagoras_defect,
            ..Default::default()
        };

        if let (Some(eps), Some(c)) = (&quasi_eps, cond) {
            row.eps_quasi1 = Some(eps[k - 1]);
            row.quasi1 = bound_quasi1(err_det_a, eps[k - 1], c);
        }
        if let Some(c) = &ctx {
            if k <= c.iterations() {
                let ab = c.alpha_beta(k)?;
                row.alpha = Some(ab.alpha);
                row.beta = Some(ab.beta);
                row.alpha_bound = Some(ab.alpha_bound);
                row.beta_bound = Some(ab.beta_bound);
                row.quasi2 = Some(bound_quasi2(err_det_a, ab.alpha, ab.beta));
            }
        }
        if let Some(eps) = &res_eps {
            let e = eps[k - 1];
            let (b1, b2) = residual_bounds(&rand.state, &det.state, k, e, ax0_norm, r0_norm, row.det_res_norm)?;
            row.eps_residual = Some(e);
            row.res_bound1 = Some(b1);
            row.res_bound2 = b2;
        }
        rows.push(row);
    }
    Ok(BoundReport { rows, cond, lambda_min: ctx.as_ref().map(|c| c.lambda_min()) })
}
