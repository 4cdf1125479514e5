use crate::operators::SpdOperator;
use crate::vecops::{axpy, dot, norm};

use super::{check_system, CgSolve, IterationTrace, SolveOptions, SolverError, Termination, TraceRow};

/// Conjugate gradient with `γ_j = ⟨r_j, p_j⟩/⟨Ap_j, p_j⟩` and
/// `δ_{j+1} = −⟨r_{j+1}, Ap_j⟩/⟨p_j, Ap_j⟩`. One matvec per iteration.
pub fn cg_solve(op: &SpdOperator, b: &[f64], x0: &[f64], opts: &SolveOptions) -> Result<CgSolve, SolverError> {
    let n = op.n();
    check_system(n, b, x0)?;
    let ax0 = op.apply(x0)?;
    let mut x = x0.to_vec();
    let mut r: Vec<f64> = b.iter().zip(&ax0).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let r0_norm = norm(&r);
    let mut trace = IterationTrace::default();
    let mut iterates = Vec::new();
    if opts.record_iterates {
        iterates.push(x.clone());
    }
    let out = |x, trace, termination, iterates| CgSolve {
        x,
        trace,
        termination,
        iterates,
        residuals: Vec::new(),
        directions: Vec::new(),
    };
    if r0_norm == 0.0 {
        return Ok(out(x, trace, Termination::Converged, iterates));
    }
    let mut ap = vec![0.0; n];
    let mut prev_delta = None;
    for j in 0..opts.k_max {
        op.apply_into(&p, &mut ap)?;
        let pap = dot(&ap, &p);
        if !(pap > 0.0) {
            return Err(SolverError::NotPositiveDefinite { iteration: j + 1, curvature: pap });
        }
        let gamma = dot(&r, &p) / pap;
        axpy(gamma, &p, &mut x);
        axpy(-gamma, &ap, &mut r);
        let delta = -dot(&r, &ap) / pap;
        let res = norm(&r);
        let mut row = TraceRow::new(j + 1, res);
        row.gamma = Some(gamma);
        row.delta = prev_delta;
        trace.rows.push(row);
        prev_delta = Some(delta);
        if opts.record_iterates {
            iterates.push(x.clone());
        }
        if res <= opts.tol * r0_norm {
            return Ok(out(x, trace, Termination::Converged, iterates));
        }
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + delta * *pi;
        }
    }
    Ok(out(x, trace, Termination::MaxIterations, iterates))
}
