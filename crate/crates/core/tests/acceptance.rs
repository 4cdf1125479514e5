//! Acceptance criteria 1–13. Each test prints one `PASS`/`FAIL` line with the
//! measured quantities and then asserts the verdict.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ropm::diagnostics::{arcg_energy_windows, bound_report, exact_solution, hessenberg_noise, BoundOptions};
use ropm::sketch::estimate_epsilon_span;
use ropm::solvers::{
    arcg_solve, cg_solve, fom_solve, rfom_solve, ArcgOptions, CgSolve, CoefficientMethod, KrylovSolve, SolveOptions,
};
use ropm::vecops::{dot, norm, random_unit_vector, rel_diff, sub};
use ropm::{SketchKind, SketchOperator, SpdOperator, SpectrumSpec, Termination};

const N: usize = 4096;

fn verdict(id: u32, title: &str, ok: bool, elapsed: Duration, budget: Duration, detail: &str) {
    let in_time = elapsed <= budget;
    let tag = if ok && in_time { "PASS" } else { "FAIL" };
    println!(
        "{tag} criterion {id:>2}: {title} | {detail} | {:.2}s (budget {}s)",
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(in_time, "criterion {id} exceeded its time budget");
}

fn rhs(n: usize, seed: u64) -> Vec<f64> {
    random_unit_vector(n, seed + 1000)
}

fn zeros(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn a_err(a: &SpdOperator, x: &[f64], y: &[f64]) -> f64 {
    a.energy_norm(&sub(x, y)).unwrap()
}

#[test]
fn criterion_01_identity_sketch_reduction() {
    let t = Instant::now();
    let n = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    let a = SpdOperator::dense(&g * g.transpose() + DMatrix::identity(n, n) * (0.05 * n as f64)).unwrap();
    let cond = a.condition_number().unwrap();
    let b = rhs(n, 1);
    let omega = SketchOperator::identity(n);

    let opts = SolveOptions { k_max: 60, tol: 1e-12, record_iterates: false };
    let fom = fom_solve(&a, &b, &zeros(n), &opts).unwrap();
    let rfom = rfom_solve(&a, &b, &zeros(n), &omega, &opts, CoefficientMethod::Mgs).unwrap();
    let k_fom = fom.iterations().min(rfom.iterations());
    let mut worst_fom = 0.0f64;
    for k in 1..=k_fom {
        worst_fom = worst_fom.max(rel_diff(&rfom.state.iterate(k).unwrap(), &fom.state.iterate(k).unwrap()));
    }

    let cg = cg_solve(&a, &b, &zeros(n), &SolveOptions { k_max: 300, tol: 1e-12, record_iterates: true }).unwrap();
    let arcg_opts = ArcgOptions { eta: 1e-12, k_max: 300, record_iterates: true, ..ArcgOptions::default() };
    let arcg = arcg_solve(&a, &b, &zeros(n), &omega, &arcg_opts).unwrap();
    let mut worst_cg = 0.0f64;
    for (x, y) in arcg.iterates.iter().zip(&cg.iterates).skip(1) {
        worst_cg = worst_cg.max(rel_diff(x, y));
    }
    let ok = fom.iterations() == rfom.iterations()
        && cg.iterations() == arcg.iterations()
        && worst_fom <= 1e-10
        && worst_cg <= 1e-10;
    verdict(
        1,
        "identity sketch: rfom = fom, arcg = cg",
        ok,
        t.elapsed(),
        Duration::from_secs(1),
        &format!(
            "cond {cond:.1}; fom/rfom iters {}/{} max rel diff {worst_fom:.2e}; cg/arcg iters {}/{} max rel diff {worst_cg:.2e}",
            fom.iterations(),
            rfom.iterations(),
            cg.iterations(),
            arcg.iterations()
        ),
    );
}

#[test]
fn criterion_02_oracle_equivalence() {
    let t = Instant::now();
    let n = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    let m = &g * g.transpose() + DMatrix::identity(n, n);
    let a = SpdOperator::dense(m.clone()).unwrap();
    let b = rhs(n, 2);
    let direct = m.clone().lu().solve(&DVector::from_column_slice(&b)).unwrap();
    let fom = fom_solve(&a, &b, &zeros(n), &SolveOptions { k_max: n, tol: 0.0, record_iterates: false }).unwrap();
    let fom_err = rel_diff(&fom.x, direct.as_slice());

    // two distinct eigenvalues, rotated by a random orthogonal matrix
    let q = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5).qr().q();
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { 7.0 }));
    let two = SpdOperator::dense(&q * d * q.transpose()).unwrap();
    let cg = cg_solve(&two, &b, &zeros(n), &SolveOptions { k_max: 10, tol: 1e-10, record_iterates: false }).unwrap();
    let res = norm(&sub(&b, &two.apply(&cg.x).unwrap()));
    let ok = fom_err <= 1e-8 && cg.iterations() == 2 && res <= 1e-10;
    verdict(
        2,
        "fom(k=n) = direct solve; cg on two eigenvalues",
        ok,
        t.elapsed(),
        Duration::from_secs(1),
        &format!("fom rel err {fom_err:.2e}; cg iterations {} residual {res:.2e}", cg.iterations()),
    );
}

#[test]
fn criterion_03_petrov_galerkin() {
    let t = Instant::now();
    let a = SpdOperator::generate(&SpectrumSpec::preset("G-exp3", N, 3).unwrap()).unwrap();
    let b = rhs(N, 3);
    let opts = SolveOptions { k_max: 100, tol: 0.0, record_iterates: false };
    let det = fom_solve(&a, &b, &zeros(N), &opts).unwrap();
    let omega = SketchOperator::srht(N, 1000, 3).unwrap();
    let rand = rfom_solve(&a, &b, &zeros(N), &omega, &opts, CoefficientMethod::Mgs).unwrap();

    let r0 = norm(&b);
    let sr0 = norm(&omega.apply(&b).unwrap());
    let sketched = rand.state.sketched_basis().unwrap();
    let (mut worst_det, mut worst_rand) = (0.0f64, 0.0f64);
    for k in 1..=100 {
        let r = sub(&b, &a.apply(&det.state.iterate(k).unwrap()).unwrap());
        let proj: Vec<f64> = det.state.basis()[..k].iter().map(|v| dot(v, &r)).collect();
        worst_det = worst_det.max(norm(&proj) / r0);

        let r = sub(&b, &a.apply(&rand.state.iterate(k).unwrap()).unwrap());
        let sr = omega.apply(&r).unwrap();
        let proj: Vec<f64> = sketched[..k].iter().map(|sv| dot(sv, &sr)).collect();
        worst_rand = worst_rand.max(norm(&proj) / sr0);
    }
    let ok = det.iterations() == 100 && rand.iterations() == 100 && worst_det <= 1e-8 && worst_rand <= 1e-8;
    verdict(
        3,
        "Galerkin and sketched Galerkin orthogonality",
        ok,
        t.elapsed(),
        Duration::from_secs(5),
        &format!("max |V^T r_k|/|r_0| = {worst_det:.2e}; max |(OV)^T Or_k|/|Or_0| = {worst_rand:.2e}"),
    );
}

/// Orthonormal Walsh–Hadamard matrix of order `m` (a power of two), Sylvester order.
fn hadamard(m: usize) -> DMatrix<f64> {
    let mut h = DMatrix::from_element(1, 1, 1.0);
    while h.nrows() < m {
        let k = h.nrows();
        let mut next = DMatrix::zeros(2 * k, 2 * k);
        next.view_mut((0, 0), (k, k)).copy_from(&h);
        next.view_mut((0, k), (k, k)).copy_from(&h);
        next.view_mut((k, 0), (k, k)).copy_from(&h);
        next.view_mut((k, k), (k, k)).copy_from(&(-&h));
        h = next;
    }
    h / (m as f64).sqrt()
}

#[test]
fn criterion_04_srht_exactness() {
    let t = Instant::now();
    let (padded, ell) = (16, 8);
    let h = hadamard(padded);
    let mut worst = 0.0f64;
    for n in [16, 11] {
        for seed in 0..20 {
            let omega = SketchOperator::srht(n, ell, seed).unwrap();
            let signs = omega.srht_signs().unwrap();
            let rows = omega.srht_rows().unwrap();
            let d = DMatrix::from_diagonal(&DVector::from_column_slice(signs));
            let hd = &h * d;
            let scale = (padded as f64 / ell as f64).sqrt();
            let dense = DMatrix::from_fn(ell, n, |i, j| scale * hd[(rows[i], j)]);
            for j in 0..n {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                let col = omega.apply(&e).unwrap();
                for i in 0..ell {
                    worst = worst.max((col[i] - dense[(i, j)]).abs());
                }
            }
        }
    }
    verdict(
        4,
        "SRHT apply equals dense sqrt(N/l) P H D",
        worst <= 1e-12,
        t.elapsed(),
        Duration::from_secs(1),
        &format!("N=16, l=8, n in {{16, 11}}, 20 seeds each; max abs diff {worst:.2e}"),
    );
}

#[test]
fn criterion_05_alpha_beta_bound_and_pythagoras() {
    let t = Instant::now();
    let a = SpdOperator::generate(&SpectrumSpec::preset("G-c5-s25", N, 1).unwrap()).unwrap();
    let b = rhs(N, 1);
    let x = exact_solution(&a, &b).unwrap();
    let opts = SolveOptions { k_max: 100, tol: 0.0, record_iterates: false };
    let det = fom_solve(&a, &b, &zeros(N), &opts).unwrap();
    let omega = SketchOperator::srht(N, 500, 78).unwrap();
    let rand = rfom_solve(&a, &b, &zeros(N), &omega, &opts, CoefficientMethod::Mgs).unwrap();
    let bopts = BoundOptions { quasi1: false, alpha_beta: true, residual: false, residual_epsilon: None };
    let rep = bound_report(&a, &b, &x, &det, &rand, &omega, &bopts).unwrap();
    let mut worst_ratio = 0.0f64;
    let mut worst_py = 0.0f64;
    let mut all_defined = rep.rows.len() == 100;
    for r in &rep.rows {
        match r.quasi2 {
            Some(q) => worst_ratio = worst_ratio.max(r.err_rand_a / q),
            None => all_defined = false,
        }
        worst_py = worst_py.max(r.pythagoras_defect.abs());
    }
    let ok = all_defined && worst_ratio <= 1.0 + 1e-6 && worst_py <= 1e-8;
    verdict(
        5,
        "err <= sqrt(1 + a^2 b^2) err_det; Pythagoras",
        ok,
        t.elapsed(),
        Duration::from_secs(60),
        &format!("G-c5-s25 n={N}, SRHT l=500, 100 its; max err/bound {worst_ratio:.6}; max Pythagoras defect {worst_py:.2e}"),
    );
}

#[test]
fn criterion_06_quasi_optimality_with_measured_epsilon() {
    let t = Instant::now();
    let a = SpdOperator::generate(&SpectrumSpec::exp_decay(N, 1.0, 10.0, 6)).unwrap();
    let b = rhs(N, 6);
    let x = exact_solution(&a, &b).unwrap();
    let opts = SolveOptions { k_max: 100, tol: 1e-10, record_iterates: false };
    let det = fom_solve(&a, &b, &zeros(N), &opts).unwrap();
    let omega = SketchOperator::srht(N, 2048, 6).unwrap();
    let rand = rfom_solve(&a, &b, &zeros(N), &omega, &opts, CoefficientMethod::Mgs).unwrap();
    let bopts = BoundOptions { quasi1: true, alpha_beta: false, residual: false, residual_epsilon: None };
    let rep = bound_report(&a, &b, &x, &det, &rand, &omega, &bopts).unwrap();
    let cond = rep.cond.unwrap();
    let mut worst = 0.0f64;
    let mut max_eps = 0.0f64;
    let mut defined = !rep.rows.is_empty();
    for r in &rep.rows {
        max_eps = max_eps.max(r.eps_quasi1.unwrap());
        match r.quasi1 {
            Some(q) => worst = worst.max(r.err_rand_a / q),
            None => defined = false,
        }
    }
    let ok = defined && max_eps * cond.sqrt() < 1.0 && worst <= 1.0;
    verdict(
        6,
        "quasi-optimality bound with measured eps",
        ok,
        t.elapsed(),
        Duration::from_secs(10),
        &format!(
            "cond {cond:.1}, SRHT l=2048, {} its; max eps*sqrt(cond) {:.3}; max err/bound {worst:.4}",
            rep.rows.len(),
            max_eps * cond.sqrt()
        ),
    );
}

#[test]
fn criterion_07_residual_bounds() {
    let t = Instant::now();
    // cond ≈ 4000, the condition number of the shifted matrix in the reference run
    let a = SpdOperator::generate(&SpectrumSpec::exp_decay(N, 1.0, 3986.0, 1)).unwrap();
    let b = rhs(N, 1);
    let x = exact_solution(&a, &b).unwrap();
    let det = fom_solve(&a, &b, &zeros(N), &SolveOptions { k_max: 1000, tol: 1e-8, record_iterates: false }).unwrap();
    let k_conv = det.iterations();
    let omega = SketchOperator::srht(N, (5 * k_conv).min(N), 79).unwrap();
    let opts = SolveOptions { k_max: k_conv, tol: 0.0, record_iterates: false };
    let rand = rfom_solve(&a, &b, &zeros(N), &omega, &opts, CoefficientMethod::Mgs).unwrap();
    let bopts = BoundOptions { quasi1: false, alpha_beta: false, residual: true, residual_epsilon: None };
    let rep = bound_report(&a, &b, &x, &det, &rand, &omega, &bopts).unwrap();
    let (mut w1, mut w2, mut max_eps) = (0.0f64, 0.0f64, 0.0f64);
    let mut defined = rep.rows.len() == k_conv;
    for r in &rep.rows {
        max_eps = max_eps.max(r.eps_residual.unwrap());
        match (r.res_bound1, r.res_bound2) {
            (Some(b1), Some(b2)) => {
                w1 = w1.max(r.res_norm / b1);
                w2 = w2.max(r.res_norm / b2);
            }
            _ => defined = false,
        }
    }
    let ok = defined && w1 <= 1.0 && w2 <= 1.0;
    verdict(
        7,
        "both residual bounds with measured eps",
        ok,
        t.elapsed(),
        Duration::from_secs(30),
        &format!(
            "cond 3986, k_conv {k_conv}, SRHT l={}; max eps {max_eps:.3}; max res/bound1 {w1:.4}, res/bound2 {w2:.4}",
            omega.ell()
        ),
    );
}

#[test]
fn criterion_08_residual_identity() {
    let t = Instant::now();
    let a = SpdOperator::generate(&SpectrumSpec::preset("G-exp3", N, 8).unwrap()).unwrap();
    let b = rhs(N, 8);
    let omega = SketchOperator::gaussian(N, 400, 8).unwrap();
    let opts = SolveOptions { k_max: 50, tol: 0.0, record_iterates: false };
    let rand = rfom_solve(&a, &b, &zeros(N), &omega, &opts, CoefficientMethod::Mgs).unwrap();
    let sb = norm(&omega.apply(&b).unwrap());
    let mut worst = 0.0f64;
    for k in 1..=50 {
        let mut r = sub(&a.apply(&rand.state.iterate(k).unwrap()).unwrap(), &b);
        let s = rand.state.s_k1(k).unwrap();
        for (ri, vi) in r.iter_mut().zip(&rand.state.basis()[k]) {
            *ri -= sb * s * vi;
        }
        worst = worst.max(norm(&r) / norm(&b));
    }
    verdict(
        8,
        "A x_k - b = |Ob| s_k1 v_k+1",
        worst <= 1e-8,
        t.elapsed(),
        Duration::from_secs(10),
        &format!("Gaussian l=400, k=1..50; max defect/|b| {worst:.2e}"),
    );
}

#[test]
fn criterion_09_arcg_energy_bound() {
    let t = Instant::now();
    let a = SpdOperator::generate(&SpectrumSpec::preset("G-exp2", N, 9).unwrap()).unwrap();
    let b = rhs(N, 9);
    let x = exact_solution(&a, &b).unwrap();
    let cg = cg_solve(&a, &b, &zeros(N), &SolveOptions { k_max: 1000, tol: 1e-8, record_iterates: false }).unwrap();
    let omega = SketchOperator::srht(N, 10 * cg.iterations(), 9).unwrap();
    let opts = ArcgOptions { record_iterates: true, record_vectors: true, ..ArcgOptions::default() };
    let run: CgSolve = arcg_solve(&a, &b, &zeros(N), &omega, &opts).unwrap();
    let windows = arcg_energy_windows(&a, &x, &omega, &run, 5).unwrap();
    let held = windows.iter().filter(|w| w.holds()).count();
    let max_eps = windows.iter().map(|w| w.epsilon_hat).fold(0.0, f64::max);
    let max_tilde = windows.iter().map(|w| w.eps_tilde).fold(0.0, f64::max);
    let worst = windows.iter().filter_map(|w| w.bound.map(|b| w.drop / b)).fold(0.0, f64::max);
    let ok = !windows.is_empty() && held == windows.len();
    verdict(
        9,
        "arCG energy-drop bound on length-5 windows",
        ok,
        t.elapsed(),
        Duration::from_secs(30),
        &format!(
            "G-exp2, SRHT l={}, {} its; {held}/{} windows hold; max eps_hat {max_eps:.3}, eps_tilde {max_tilde:.3}, drop/bound {worst:.4}",
            omega.ell(),
            run.iterations(),
            windows.len()
        ),
    );
}

/// Deterministic FOM reference for one seed of the spike study.
struct SpikeCase {
    a: SpdOperator,
    b: Vec<f64>,
    x: Vec<f64>,
    x_norm: f64,
    k_conv: usize,
    det_err: Vec<f64>,
}

fn spike_case(seed: u64) -> SpikeCase {
    let a = SpdOperator::generate(&SpectrumSpec::preset("G-c5-s25", N, seed).unwrap()).unwrap();
    let b = rhs(N, seed);
    let x = exact_solution(&a, &b).unwrap();
    let x_norm = a.energy_norm(&x).unwrap();
    let det: KrylovSolve =
        fom_solve(&a, &b, &zeros(N), &SolveOptions { k_max: 1500, tol: 1e-13, record_iterates: false }).unwrap();
    let mut det_err = Vec::new();
    let mut k_conv = 0;
    for k in 1..=det.iterations() {
        let e = a_err(&a, &x, &det.state.iterate(k).unwrap());
        det_err.push(e);
        if e <= 1e-8 * x_norm {
            k_conv = k;
            break;
        }
    }
    assert!(k_conv > 0, "FOM did not converge for seed {seed}");
    SpikeCase { a, b, x, x_norm, k_conv, det_err }
}

/// Largest `‖x − x_k‖_A / ‖x − x̆_k‖_A` over `k ≤ k_conv` and the first `k`
/// with relative A-norm error below 1e-8.
fn spike_run(c: &SpikeCase, mult: usize, seed: u64) -> (f64, Option<usize>, usize) {
    let ell = (mult * c.k_conv).min(N);
    let omega = SketchOperator::srht(N, ell, seed + 77).unwrap();
    let k_max = (c.k_conv + 15).min(ell);
    let opts = SolveOptions { k_max, tol: 0.0, record_iterates: false };
    let rand = rfom_solve(&c.a, &c.b, &zeros(N), &omega, &opts, CoefficientMethod::Mgs).unwrap();
    let mut max_ratio = 0.0f64;
    let mut conv = None;
    for k in 1..=rand.iterations() {
        let e = a_err(&c.a, &c.x, &rand.state.iterate(k).unwrap());
        if k <= c.k_conv {
            max_ratio = max_ratio.max(e / c.det_err[k - 1]);
        }
        if conv.is_none() && e <= 1e-8 * c.x_norm {
            conv = Some(k);
        }
    }
    (max_ratio, conv, ell)
}

#[test]
fn criterion_10_spike_replication() {
    let t = Instant::now();
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut converged_in_time = true;
    let mut notes = Vec::new();
    for seed in 1..=5 {
        let case = spike_case(seed);
        let (r5, conv, ell5) = spike_run(&case, 5, seed);
        let (r25, _, ell25) = spike_run(&case, 25, seed);
        converged_in_time &= conv.is_some_and(|k| k <= case.k_conv + 15);
        notes.push(format!("s{seed}: k_conv {} l {ell5}/{ell25} max {r5:.1}/{r25:.2} conv {conv:?}", case.k_conv));
        small.push(r5);
        large.push(r25);
    }
    let (m5, m25) = (median(small), median(large));
    let ok = m5 > 10.0 && converged_in_time && m25 < m5;
    verdict(
        10,
        "spikes at l=5k_conv, convergence, reduction at l=25k_conv",
        ok,
        t.elapsed(),
        Duration::from_secs(300),
        &format!("median max ratio {m5:.2} -> {m25:.2}; {}", notes.join("; ")),
    );
}

#[test]
fn criterion_11_arcg_replication() {
    let t = Instant::now();
    let ratio = |preset: &str, seed: u64| -> (f64, Termination) {
        let a = SpdOperator::generate(&SpectrumSpec::preset(preset, N, seed).unwrap()).unwrap();
        let b = rhs(N, seed);
        let cg = cg_solve(&a, &b, &zeros(N), &SolveOptions { k_max: 5000, tol: 1e-8, record_iterates: false }).unwrap();
        let k = cg.iterations();
        let omega = SketchOperator::new(SketchKind::Srht, N, (10 * k).min(N), seed + 55).unwrap();
        let opts = ArcgOptions { eta: 1e-8, k_max: 20 * k, ..ArcgOptions::default() };
        let run = arcg_solve(&a, &b, &zeros(N), &omega, &opts).unwrap();
        let r = match run.termination {
            Termination::Diverged => f64::INFINITY,
            _ => run.iterations() as f64 / k as f64,
        };
        (r, run.termination)
    };
    let exp: Vec<(f64, Termination)> = (1..=5).map(|s| ratio("G-exp2", s)).collect();
    let clust: Vec<(f64, Termination)> = (1..=5).map(|s| ratio("G-clust3", s)).collect();
    let m_exp = median(exp.iter().map(|r| r.0).collect());
    let m_clust = median(clust.iter().map(|r| r.0).collect());
    let ok = m_exp <= 1.25 && m_clust > 2.0;
    let fmt = |v: &[(f64, Termination)]| v.iter().map(|(r, t)| format!("{r:.2}({})", t.as_str())).collect::<Vec<_>>().join(" ");
    verdict(
        11,
        "arCG vs CG iteration ratio, l=10k_conv",
        ok,
        t.elapsed(),
        Duration::from_secs(300),
        &format!("exp cond 1e2 median {m_exp:.3} [{}]; 2-cluster cond 1e3 median {m_clust:.2} [{}]", fmt(&exp), fmt(&clust)),
    );
}

#[test]
fn criterion_12_noise_statistics() {
    let t = Instant::now();
    let k = 100;
    let a = SpdOperator::generate(&SpectrumSpec::preset("G-exp2", N, 12).unwrap()).unwrap();
    let b = rhs(N, 12);
    let opts = SolveOptions { k_max: k, tol: 0.0, record_iterates: false };
    let det = fom_solve(&a, &b, &zeros(N), &opts).unwrap();
    let omega = SketchOperator::gaussian(N, N, 12).unwrap();
    let rand = rfom_solve(&a, &b, &zeros(N), &omega, &opts, CoefficientMethod::Mgs).unwrap();
    let rep = hessenberg_noise(&a, &rand.state, &det.state, N, k).unwrap();
    let ratio = rep.std_ratio();
    let ok = (0.5..=2.0).contains(&ratio);
    verdict(
        12,
        "std of Gamma_k entries vs |Av_i||v_j|/sqrt(l)",
        ok,
        t.elapsed(),
        Duration::from_secs(60),
        &format!(
            "k={k}, Gaussian l={N}, {} entries; std {:.3e}, predicted {:.3e}, ratio {ratio:.3}; mean {:.2e}; unimodal {}",
            rep.entries.len(),
            rep.std,
            rep.mean_predicted_std,
            rep.mean,
            rep.is_unimodal(1)
        ),
    );
}

#[test]
fn criterion_13_singular_value_sandwich() {
    let t = Instant::now();
    let a = SpdOperator::generate(&SpectrumSpec::preset("G-exp3", N, 13).unwrap()).unwrap();
    let b = rhs(N, 13);
    let omega = SketchOperator::srht(N, 1000, 13).unwrap();
    let opts = SolveOptions { k_max: 100, tol: 0.0, record_iterates: false };
    let rand = rfom_solve(&a, &b, &zeros(N), &omega, &opts, CoefficientMethod::Mgs).unwrap();
    let mut ok = rand.iterations() == 100;
    let mut notes = Vec::new();
    for k in [20, 50, 100] {
        let basis = &rand.state.basis()[..k];
        let eps = estimate_epsilon_span(&omega, basis).unwrap().epsilon_hat;
        let v = DMatrix::from_fn(N, k, |i, j| basis[j][i]);
        let sketched = rand.state.sketched_basis().unwrap();
        let sv_ = DMatrix::from_fn(omega.ell(), k, |i, j| sketched[j][i]);
        let sv = v.singular_values();
        let ssv = sv_.singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        let lower = ssv.min() / (1.0 + eps).sqrt();
        let upper = ssv.max() / (1.0 - eps).sqrt();
        ok &= eps < 1.0 && lower <= lo && hi <= upper;
        notes.push(format!("k={k}: eps {eps:.3}, {lower:.4} <= {lo:.4} <= {hi:.4} <= {upper:.4}"));
    }
    verdict(
        13,
        "singular values of the sketch-orthonormal basis",
        ok,
        t.elapsed(),
        Duration::from_secs(30),
        &notes.join("; "),
    );
}
