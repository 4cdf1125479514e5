use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use super::SolverError;

/// Eigenvalues of a small square matrix (typically `H_k`) by shifted QR
/// iteration on its Hessenberg/Schur form. Complex pairs are kept.
/// Sorted by real part, then imaginary part.
pub fn ritz_values(h: &DMatrix<f64>) -> Result<Vec<Complex64>, SolverError> {
    let k = h.nrows();
    if k == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(h.clone(), f64::EPSILON, 1000 * k).ok_or(SolverError::RitzNonConvergence(k))?;
    let mut ev: Vec<Complex64> = schur.complex_eigenvalues().iter().map(|c| Complex64::new(c.re, c.im)).collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{SpdOperator, SpectrumSpec};
    use crate::solvers::{lanczos_solve, SolveOptions};

    #[test]
    fn diagonal_matrix() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let ev = ritz_values(&h).unwrap();
        let re: Vec<f64> = ev.iter().map(|c| c.re).collect();
        assert_eq!(re, vec![-1.0, 2.0, 3.0]);
        assert!(ev.iter().all(|c| c.im == 0.0));
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let ev = ritz_values(&h).unwrap();
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn full_lanczos_recovers_generated_spectrum() {
        let spec = SpectrumSpec::exp_decay(16, 1.0, 20.0, 4);
        let a = SpdOperator::generate(&spec).unwrap();
        let out = lanczos_solve(&a, &[1.0; 16], &[0.0; 16], &SolveOptions { k_max: 16, tol: 0.0, ..Default::default() }).unwrap();
        let k = out.iterations();
        assert_eq!(k, 16);
        let ev = ritz_values(&out.state.h_square(k)).unwrap();
        let mut lam = a.eigenvalues().unwrap();
        lam.sort_by(f64::total_cmp);
        for (r, l) in ev.iter().zip(&lam) {
            assert!((r.re - l).abs() < 1e-8 && r.im.abs() < 1e-8, "{r} vs {l}");
        }
    }
}
