//! Error spikes of RFOM on a five-cluster spectrum coincide with a large
//! `α_k` and with a small outlying Ritz value of the randomized `H_k`.

use ropm::diagnostics::{exact_solution, fill_a_norm_errors, spike_report, AlphaBetaContext};
use ropm::solvers::{fom_solve, rfom_solve, CoefficientMethod, SolveOptions};
use ropm::vecops::random_unit_vector;
use ropm::{SketchOperator, SpdOperator, SpectrumSpec};

#[test]
fn largest_spike_has_large_alpha_and_small_ritz_value() {
    let n = 4096;
    let a = SpdOperator::generate(&SpectrumSpec::preset("G-c5-s25", n, 1).unwrap()).unwrap();
    let b = random_unit_vector(n, 1001);
    let x = exact_solution(&a, &b).unwrap();
    let opts = SolveOptions { k_max: 400, tol: 0.0, record_iterates: true };
    let mut det = fom_solve(&a, &b, &vec![0.0; n], &opts).unwrap();
    // five times the iterations FOM needs to reach 1e-8 on this system
    let omega = SketchOperator::srht(n, 3550, 78).unwrap();
    let mut rand = rfom_solve(&a, &b, &vec![0.0; n], &omega, &opts, CoefficientMethod::Mgs).unwrap();
    fill_a_norm_errors(&mut det.trace, &a, &x, &det.iterates).unwrap();
    fill_a_norm_errors(&mut rand.trace, &a, &x, &rand.iterates).unwrap();

    let report = spike_report(&rand.trace, &det.trace, &rand.state, &det.state, 10.0).unwrap();
    assert!(!report.spikes.is_empty());
    let (k, ratio) = report.max_ratio().unwrap();
    assert!(ratio > 10.0);
    let spike = report.spikes.iter().find(|s| s.iter == k).unwrap();
    assert!(spike.has_small_ritz_outlier(0.5), "{spike:?}");

    let ctx = AlphaBetaContext::new(&a, &omega, &x, &det.state).unwrap();
    let ab = ctx.alpha_beta(k).unwrap();
    assert!(ab.alpha.abs() > 10.0, "alpha_{k} = {}", ab.alpha);
    // away from spikes the factor stays close to one
    let calm = report.ratios.iter().find(|(_, r)| *r < 1.01).unwrap().0;
    assert!((ctx.alpha_beta(calm).unwrap().alpha - 1.0).abs() < 0.5);
}
