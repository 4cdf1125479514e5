use crate::operators::SpdOperator;
use crate::vecops::{axpy, dot, norm};

use super::{
    check_system, finish_column, implicit_residual, IterationTrace, KrylovSolve, KrylovState, SolveOptions, SolverError,
    Termination, TraceRow, BREAKDOWN_RTOL,
};

/// Arnoldi-type driver shared by FOM and Lanczos. `orthogonalize` receives the
/// state, the (1-based) iteration `j` and `z = A v_j`, orthogonalizes `z` in
/// place and returns the Hessenberg column `h_{1,j}, …, h_{j,j}`.
pub(super) fn run_arnoldi(
    op: &SpdOperator,
    b: &[f64],
    x0: &[f64],
    opts: &SolveOptions,
    mut orthogonalize: impl FnMut(&KrylovState, usize, &mut Vec<f64>) -> Vec<f64>,
) -> Result<KrylovSolve, SolverError> {
    let n = op.n();
    check_system(n, b, x0)?;
    if opts.k_max > n {
        return Err(SolverError::TooManyIterations { k_max: opts.k_max, limit: n });
    }
    let ax0 = op.apply(x0)?;
    let r0: Vec<f64> = b.iter().zip(&ax0).map(|(bi, ai)| bi - ai).collect();
    let beta = norm(&r0);
    let mut state = KrylovState::new(x0.to_vec(), beta);
    let mut trace = IterationTrace::default();
    let mut iterates = Vec::new();
    if opts.record_iterates {
        iterates.push(x0.to_vec());
    }
    if beta == 0.0 {
        return Ok(KrylovSolve { x: x0.to_vec(), state, trace, termination: Termination::Converged, iterates });
    }
    state.basis.push(r0.iter().map(|ri| ri / beta).collect());

    let mut termination = Termination::MaxIterations;
    for j in 1..=opts.k_max {
        let mut z = op.apply(&state.basis[j - 1])?;
        let az_norm = norm(&z);
        let col = orthogonalize(&state, j, &mut z);
        let h_next = norm(&z);
        let broke = finish_column(&mut state, col, z, h_next, BREAKDOWN_RTOL * az_norm);
        let (s, res) = implicit_residual(&state, j)?;
        let mut row = TraceRow::new(j, res);
        row.s_k1 = Some(s);
        trace.rows.push(row);
        if opts.record_iterates {
            iterates.push(state.iterate(j)?);
        }
        if broke {
            termination = Termination::Breakdown;
            break;
        }
        if res <= opts.tol * beta {
            termination = Termination::Converged;
            break;
        }
    }
    let k = state.iterations();
    let x = if k == 0 { x0.to_vec() } else { state.iterate(k)? };
    Ok(KrylovSolve { x, state, trace, termination, iterates })
}

/// Full orthogonalization method: Arnoldi with modified Gram–Schmidt and the
/// Galerkin solve `H_k ρ = β e₁`.
pub fn fom_solve(op: &SpdOperator, b: &[f64], x0: &[f64], opts: &SolveOptions) -> Result<KrylovSolve, SolverError> {
    run_arnoldi(op, b, x0, opts, |state, j, z| {
        let mut col = Vec::with_capacity(j + 1);
        for v in &state.basis[..j] {
            let h = dot(v, z);
            axpy(-h, v, z);
            col.push(h);
        }
        col
    })
}
