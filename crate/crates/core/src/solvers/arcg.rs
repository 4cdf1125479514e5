use crate::operators::SpdOperator;
use crate::sketch::SketchOperator;
use crate::vecops::{axpy, dot, norm};

use super::{check_system, CgSolve, IterationTrace, SolverError, Termination, TraceRow};

/// Divergence detector: abort once `‖Ωr_k‖ > DIVERGENCE_FACTOR · ‖Ωr₀‖`.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// How `Ωr_{k+1}` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualSketch {
    /// Sketch `r_{k+1}` every iteration.
    Fresh,
    /// `Ωr_{k+1} = Ωr_k − γ_k ΩAp_k`, re-sketched from scratch every `refresh_every` iterations.
    Recurrence { refresh_every: usize },
}

/// How `Ωp_k` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionSketch {
    Fresh,
    /// `Ωp_k = Ωr_k + δ_k Ωp_{k−1}`.
    Recurrence,
}

/// Right-hand side norm used in the stopping test `‖Ωr_k‖ < η · ‖·‖`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopNorm {
    Rhs,
    SketchedRhs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcgOptions {
    pub eta: f64,
    pub k_max: usize,
    pub residual_sketch: ResidualSketch,
    pub direction_sketch: DirectionSketch,
    pub stop_norm: StopNorm,
    pub record_iterates: bool,
    /// Keep `r_k` and `p_k` (needed to measure `ε̂` on `span{r_k, p_k}`).
    pub record_vectors: bool,
    /// Compute `ε̃_k`, which costs two extra unsketched inner products per iteration.
    pub compute_quotients: bool,
}

impl Default for ArcgOptions {
    fn default() -> Self {
        Self {
            eta: 1e-8,
            k_max: 1000,
            residual_sketch: ResidualSketch::Recurrence { refresh_every: 50 },
            direction_sketch: DirectionSketch::Fresh,
            stop_norm: StopNorm::Rhs,
            record_iterates: false,
            record_vectors: false,
            compute_quotients: true,
        }
    }
}

/// CG with every inner product replaced by a sketched one:
/// `δ_k = ‖Ωr_k‖²/‖Ωr_{k−1}‖²`, `γ_k = ‖Ωr_k‖²/⟨ΩAp_k, Ωp_k⟩`.
///
/// Row `k` of the trace carries `γ_{k−1}`, `δ_{k−1}`, `‖Ωp_{k−1}‖` and
/// `ε̃_{k−1} = max(|γ⟨p,Ap⟩/‖r‖² − 1|, |δ‖r_{k−2}‖²/‖r_{k−1}‖² − 1|)`.
/// `residual_norm` is the norm of the recursively updated residual.
pub fn arcg_solve(
    op: &SpdOperator,
    b: &[f64],
    x0: &[f64],
    omega: &SketchOperator,
    opts: &ArcgOptions,
) -> Result<CgSolve, SolverError> {
    let n = op.n();
    check_system(n, b, x0)?;
    if omega.n() != n {
        return Err(SolverError::DimensionMismatch { what: "sketch", expected: n, got: omega.n() });
    }
    let ax0 = op.apply(x0)?;
    let mut x = x0.to_vec();
    let mut r: Vec<f64> = b.iter().zip(&ax0).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut sr = omega.apply(&r)?;
    let mut sp: Vec<f64> = Vec::new();
    let sr0_norm = norm(&sr);
    let stop = opts.eta
        * match opts.stop_norm {
            StopNorm::Rhs => norm(b),
            StopNorm::SketchedRhs => norm(&omega.apply(b)?),
        };

    let mut out = CgSolve {
        x: Vec::new(),
        trace: IterationTrace::default(),
        termination: Termination::MaxIterations,
        iterates: Vec::new(),
        residuals: Vec::new(),
        directions: Vec::new(),
    };
    if opts.record_iterates {
        out.iterates.push(x.clone());
    }
    if opts.record_vectors {
        out.residuals.push(r.clone());
    }

    let mut ap = vec![0.0; n];
    let mut sr_sq = dot(&sr, &sr);
    let mut sr_prev_sq = 0.0;
    let mut r_prev_sq = 0.0;
    let mut k = 0;
    loop {
        if sr_sq.sqrt() < stop || sr_sq == 0.0 {
            out.termination = Termination::Converged;
            break;
        }
        if k >= opts.k_max {
            break;
        }
        let mut delta = None;
        if k >= 1 {
            let d = sr_sq / sr_prev_sq;
            for (pi, ri) in p.iter_mut().zip(&r) {
                *pi = ri + d * *pi;
            }
            if opts.direction_sketch == DirectionSketch::Recurrence {
                for (spi, sri) in sp.iter_mut().zip(&sr) {
                    *spi = sri + d * *spi;
                }
            }
            delta = Some(d);
        }
        op.apply_into(&p, &mut ap)?;
        let sap = omega.apply(&ap)?;
        if k == 0 || opts.direction_sketch == DirectionSketch::Fresh {
            sp = omega.apply(&p)?;
        }
        let curvature = dot(&sap, &sp);
        if curvature == 0.0 || !curvature.is_finite() {
            return Err(SolverError::CurvatureVanished { iteration: k });
        }
        let gamma = sr_sq / curvature;

        let mut eps_tilde = None;
        let r_sq = if opts.compute_quotients { dot(&r, &r) } else { 0.0 };
        if opts.compute_quotients {
            let mut e = (gamma * dot(&p, &ap) / r_sq - 1.0).abs();
            if let Some(d) = delta {
                e = e.max((d * r_prev_sq / r_sq - 1.0).abs());
            }
            eps_tilde = Some(e);
        }
        if opts.record_vectors {
            out.directions.push(p.clone());
        }

        axpy(gamma, &p, &mut x);
        axpy(-gamma, &ap, &mut r);
        sr_prev_sq = sr_sq;
        r_prev_sq = r_sq;
        let refresh = match opts.residual_sketch {
            ResidualSketch::Fresh => true,
            ResidualSketch::Recurrence { refresh_every } => refresh_every > 0 && (k + 1) % refresh_every == 0,
        };
        if refresh {
            sr = omega.apply(&r)?;
        } else {
            axpy(-gamma, &sap, &mut sr);
        }
        sr_sq = dot(&sr, &sr);
        k += 1;

        let mut row = TraceRow::new(k, norm(&r));
        row.sketched_residual_norm = Some(sr_sq.sqrt());
        row.gamma = Some(gamma);
        row.delta = delta;
        row.eps_tilde = eps_tilde;
        row.sketched_p_norm = Some(norm(&sp));
        out.trace.rows.push(row);
        if opts.record_iterates {
            out.iterates.push(x.clone());
        }
        if opts.record_vectors {
            out.residuals.push(r.clone());
        }
        if !(sr_sq.sqrt() <= DIVERGENCE_FACTOR * sr0_norm) {
            out.termination = Termination::Diverged;
            break;
        }
    }
    out.x = x;
    Ok(out)
}
