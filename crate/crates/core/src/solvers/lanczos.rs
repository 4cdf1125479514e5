use crate::operators::SpdOperator;
use crate::vecops::{axpy, dot};

use super::fom::run_arnoldi;
use super::{KrylovSolve, SolveOptions, SolverError};

/// Lanczos variant of FOM: `A v_j` is orthogonalized against `v_{j−1}` (reusing
/// `h_{j,j−1}`) and `v_j` only. Entries of `H` above the superdiagonal are
/// never computed and stay exactly zero; the full basis is kept for the solve.
pub fn lanczos_solve(op: &SpdOperator, b: &[f64], x0: &[f64], opts: &SolveOptions) -> Result<KrylovSolve, SolverError> {
    run_arnoldi(op, b, x0, opts, |state, j, z| {
        let mut col = vec![0.0; j];
        if j > 1 {
            let h_prev = state.h(j, j - 1);
            axpy(-h_prev, &state.basis[j - 2], z);
            col[j - 2] = h_prev;
        }
        let v = &state.basis[j - 1];
        let h = dot(v, z);
        axpy(-h, v, z);
        col[j - 1] = h;
        col
    })
}
