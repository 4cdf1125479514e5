use nalgebra::{DMatrix, DVector};

use crate::operators::SpdOperator;
use crate::sketch::SketchOperator;
use crate::vecops::{axpy, dot, norm};

use super::{
    check_system, finish_column, implicit_residual, IterationTrace, KrylovSolve, KrylovState, SolveOptions, SolverError,
    Termination, TraceRow, BREAKDOWN_RTOL,
};

/// How the Hessenberg column `H[1:j, j]` is obtained from the sketches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientMethod {
    /// Modified Gram–Schmidt on the sketches.
    #[default]
    Mgs,
    /// Householder least squares `argmin ‖S_j c − p‖`.
    LeastSquares,
}

/// MGS coefficients of `p` against the sketched basis; `p` is left orthogonalized.
pub fn mgs_coefficients(sketched_basis: &[Vec<f64>], p: &mut [f64]) -> Vec<f64> {
    sketched_basis
        .iter()
        .map(|s| {
            let h = dot(s, p);
            axpy(-h, s, p);
            h
        })
        .collect()
}

/// Least-squares coefficients `argmin_c ‖S c − p‖₂` by Householder QR.
pub fn ls_coefficients(sketched_basis: &[Vec<f64>], p: &[f64]) -> Result<Vec<f64>, SolverError> {
    let j = sketched_basis.len();
    let ell = p.len();
    let s = DMatrix::from_fn(ell, j, |r, c| sketched_basis[c][r]);
    let qr = s.qr();
    let r = qr.r();
    let rmax = r.diagonal().amax();
    if r.diagonal().iter().any(|d| !(d.abs() > 1e-14 * rmax)) {
        return Err(SolverError::RankDeficient);
    }
    let qtp = qr.q().tr_mul(&DVector::from_column_slice(p));
    let c = r.solve_upper_triangular(&qtp).ok_or(SolverError::RankDeficient)?;
    Ok(c.as_slice().to_vec())
}

/// Randomized FOM (randomized Arnoldi solver): the basis is orthonormal in
/// the sketched inner product `⟨Ω·, Ω·⟩` and the iterate satisfies the
/// sketched Petrov–Galerkin condition `(ΩV_k)ᵗ Ω r_k = 0`.
///
/// `opts.tol` applies to the sketched residual `‖Ωr_k‖ / ‖Ωr₀‖`.
pub fn rfom_solve(
    op: &SpdOperator,
    b: &[f64],
    x0: &[f64],
    omega: &SketchOperator,
    opts: &SolveOptions,
    method: CoefficientMethod,
) -> Result<KrylovSolve, SolverError> {
    let n = op.n();
    check_system(n, b, x0)?;
    if omega.n() != n {
        return Err(SolverError::DimensionMismatch { what: "sketch", expected: n, got: omega.n() });
    }
    let limit = n.min(omega.ell());
    if opts.k_max > limit {
        return Err(SolverError::TooManyIterations { k_max: opts.k_max, limit });
    }
    let ax0 = op.apply(x0)?;
    let r0: Vec<f64> = b.iter().zip(&ax0).map(|(bi, ai)| bi - ai).collect();
    let sr0 = omega.apply(&r0)?;
    let beta = norm(&sr0);
    let mut state = KrylovState::new(x0.to_vec(), beta);
    state.sketched = Some(Vec::new());
    let mut trace = IterationTrace::default();
    let mut iterates = Vec::new();
    if opts.record_iterates {
        iterates.push(x0.to_vec());
    }
    if beta == 0.0 {
        // Ωr₀ = 0: either r₀ = 0 or the sketch annihilates it; nothing to iterate on.
        return Ok(KrylovSolve { x: x0.to_vec(), state, trace, termination: Termination::Converged, iterates });
    }
    state.basis.push(r0.iter().map(|ri| ri / beta).collect());
    sketched_mut(&mut state).push(sr0.iter().map(|si| si / beta).collect());

    let mut termination = Termination::MaxIterations;
    for j in 1..=opts.k_max {
        let mut z = op.apply(&state.basis[j - 1])?;
        let mut p = omega.apply(&z)?;
        let p_norm = norm(&p);
        let sk = state.sketched.as_ref().expect("randomized state");
        let col = match method {
            CoefficientMethod::Mgs => mgs_coefficients(&sk[..j], &mut p),
            CoefficientMethod::LeastSquares => ls_coefficients(&sk[..j], &p)?,
        };
        for (v, h) in state.basis[..j].iter().zip(&col) {
            axpy(-h, v, &mut z);
        }
        let s_new = omega.apply(&z)?;
        let h_next = norm(&s_new);
        let broke = finish_column(&mut state, col, z, h_next, BREAKDOWN_RTOL * p_norm);
        let s_next = if broke { vec![0.0; s_new.len()] } else { s_new.into_iter().map(|si| si / h_next).collect() };
        sketched_mut(&mut state).push(s_next);

        let (s, res) = implicit_residual(&state, j)?;
        let mut row = TraceRow::new(j, res);
        row.s_k1 = Some(s);
        let sres = beta * s.abs();
        row.sketched_residual_norm = Some(sres);
        trace.rows.push(row);
        if opts.record_iterates {
            iterates.push(state.iterate(j)?);
        }
        if broke {
            termination = Termination::Breakdown;
            break;
        }
        if sres <= opts.tol * beta {
            termination = Termination::Converged;
            break;
        }
    }
    let k = state.iterations();
    let x = if k == 0 { x0.to_vec() } else { state.iterate(k)? };
    Ok(KrylovSolve { x, state, trace, termination, iterates })
}

fn sketched_mut(state: &mut KrylovState) -> &mut Vec<Vec<f64>> {
    state.sketched.as_mut().expect("randomized state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::SpectrumSpec;
    use crate::solvers::fom_solve;
    use crate::vecops::{rel_diff, sub};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rhs(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
    }

    #[test]
    fn identity_sketch_reproduces_fom() {
        let a = SpdOperator::generate(&SpectrumSpec::exp_decay(100, 1.0, 1e3, 1)).unwrap();
        let b = rhs(100, 2);
        let opts = SolveOptions { k_max: 60, tol: 1e-10, record_iterates: true };
        let f = fom_solve(&a, &b, &[0.0; 100], &opts).unwrap();
        let r = rfom_solve(&a, &b, &[0.0; 100], &SketchOperator::identity(100), &opts, CoefficientMethod::Mgs).unwrap();
        assert_eq!(f.iterations(), r.iterations());
        for k in 1..=f.iterations() {
            assert!(rel_diff(&r.iterates[k], &f.iterates[k]) <= 1e-10);
        }
    }

    #[test]
    fn sketched_petrov_galerkin_and_orthonormality() {
        let n = 64;
        let a = SpdOperator::generate(&SpectrumSpec::exp_decay(n, 1.0, 10.0, 3)).unwrap();
        let b = rhs(n, 4);
        let k_max = 12;
        let om = SketchOperator::gaussian(n, 4 * k_max, 5).unwrap();
        let out = rfom_solve(&a, &b, &vec![0.0; n], &om, &SolveOptions { k_max, tol: 0.0, record_iterates: true }, CoefficientMethod::Mgs)
            .unwrap();
        let sb = out.state.sketched_basis().unwrap();
        let sr0 = norm(&om.apply(&b).unwrap());
        for k in 1..=out.iterations() {
            let r = sub(&b, &a.apply(&out.iterates[k]).unwrap());
            let sr = om.apply(&r).unwrap();
            let pg = sb[..k].iter().map(|s| dot(s, &sr).powi(2)).sum::<f64>().sqrt();
            assert!(pg <= 1e-8 * sr0, "k = {k}: {pg}");
        }
        let k = out.iterations();
        let mut worst: f64 = 0.0;
        for i in 0..=k {
            for j in 0..=k {
                let target = if i == j { 1.0 } else { 0.0 };
                worst += (dot(&sb[i], &sb[j]) - target).powi(2);
            }
            assert!(rel_diff(&om.apply(&out.state.basis()[i]).unwrap(), &sb[i]) <= 1e-10);
        }
        assert!(worst.sqrt() <= 1e-8);
    }

    #[test]
    fn least_squares_matches_mgs_on_orthonormal_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = DMatrix::from_fn(30, 5, |_, _| rng.random::<f64>() - 0.5);
        let q = m.qr().q();
        let basis: Vec<Vec<f64>> = (0..5).map(|j| q.column(j).iter().copied().collect()).collect();
        let p = rhs(30, 10);
        let ls = ls_coefficients(&basis, &p).unwrap();
        let mut pp = p.clone();
        let mgs = mgs_coefficients(&basis, &mut pp);
        assert!(rel_diff(&ls, &mgs) <= 1e-10);
        // j = 1 reduces to a single inner product
        let one = ls_coefficients(&basis[..1], &p).unwrap();
        assert!((one[0] - dot(&basis[0], &p)).abs() < 1e-14);
    }

    #[test]
    fn least_squares_is_no_worse_on_ill_conditioned_basis() {
        let (ell, j) = (60, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = DMatrix::from_fn(ell, j, |_, _| rng.random::<f64>() - 0.5).qr().q();
        let w = DMatrix::from_fn(j, j, |_, _| rng.random::<f64>() - 0.5).qr().q();
        let sig = DMatrix::from_diagonal(&DVector::from_iterator(j, (0..j).map(|i| 10f64.powf(-6.0 * i as f64 / (j - 1) as f64))));
        let s = u * sig * w.transpose();
        let basis: Vec<Vec<f64>> = (0..j).map(|c| s.column(c).iter().copied().collect()).collect();
        let p = rhs(ell, 12);
        let resid = |c: &[f64]| {
            let mut r = p.clone();
            for (col, ci) in basis.iter().zip(c) {
                axpy(-ci, col, &mut r);
            }
            norm(&r)
        };
        let ls = ls_coefficients(&basis, &p).unwrap();
        let mut pp = p.clone();
        let mgs = mgs_coefficients(&basis, &mut pp);
        assert!(resid(&ls) <= resid(&mgs) + 1e-10);
    }

    #[test]
    fn least_squares_solver_path_runs() {
        let n = 128;
        let a = SpdOperator::generate(&SpectrumSpec::exp_decay(n, 1.0, 100.0, 6)).unwrap();
        let b = rhs(n, 7);
        let om = SketchOperator::srht(n, 64, 8).unwrap();
        let opts = SolveOptions { k_max: 30, tol: 1e-10, record_iterates: false };
        let m = rfom_solve(&a, &b, &vec![0.0; n], &om, &opts, CoefficientMethod::Mgs).unwrap();
        let l = rfom_solve(&a, &b, &vec![0.0; n], &om, &opts, CoefficientMethod::LeastSquares).unwrap();
        assert!(rel_diff(&l.x, &m.x) <= 1e-6);
    }

    #[test]
    fn k_max_is_limited_by_sampling_size() {
        let a = SpdOperator::identity(50);
        let om = SketchOperator::gaussian(50, 10, 0).unwrap();
        let err = rfom_solve(&a, &[1.0; 50], &[0.0; 50], &om, &SolveOptions { k_max: 11, ..Default::default() }, CoefficientMethod::Mgs);
        assert!(matches!(err, Err(SolverError::TooManyIterations { limit: 10, .. })));
    }
}
