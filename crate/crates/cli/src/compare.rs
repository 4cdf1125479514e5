use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ropm::diagnostics::{
    a_norm_error, arcg_energy_windows, bound_report, exact_solution, spike_report, write_trace_csv, BoundOptions,
    TraceCsvRow,
};
use ropm::sketch::estimate_epsilon_span;
use ropm::solvers::{arcg_solve, cg_solve, fom_solve, rfom_solve, ArcgOptions, CoefficientMethod, SolveOptions};
use ropm::{SketchKind, SketchOperator, SpdOperator};

use crate::system::{self, System};
use crate::{CompareArgs, SolverPair};

/// Seed offset for the sketch, so that it differs from the right-hand side.
pub const SKETCH_SEED_OFFSET: u64 = 77;

/// Vectors of arCG are kept (for `ε̂`) only up to this dimension unless the
/// energy diagnostic asks for them.
const RECORD_VECTORS_LIMIT: usize = 16384;

/// Window length of the arCG energy diagnostic.
const ENERGY_WINDOW: usize = 4;

/// Errors below `ERROR_FLOOR · ‖x‖_A` are round-off; ratios use the floor instead.
const ERROR_FLOOR: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
struct Diagnostics {
    errors: bool,
    quasi1: bool,
    alpha_beta: bool,
    residual: bool,
    spikes: bool,
    energy: bool,
}

impl Diagnostics {
    fn parse(list: &str) -> Result<Self> {
        let mut d = Diagnostics::default();
        let items: BTreeSet<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        for item in items {
            match item {
                "none" => {}
                "errors" => d.errors = true,
                "quasi1" => d.quasi1 = true,
                "alpha-beta" => d.alpha_beta = true,
                "residual" => d.residual = true,
                "spikes" => d.spikes = true,
                "energy" => d.energy = true,
                "all" => {
                    d = Diagnostics { errors: true, quasi1: true, alpha_beta: true, residual: true, spikes: true, energy: true }
                }
                other => bail!(
                    "unknown diagnostic '{other}' (expected errors, quasi1, alpha-beta, residual, spikes, energy, all, none)"
                ),
            }
        }
        // every bound is compared against errors, so they come along
        d.errors |= d.quasi1 || d.alpha_beta || d.spikes || d.energy;
        Ok(d)
    }
}

/// Result of one deterministic/randomized pair.
struct PairOutcome {
    rows: Vec<TraceCsvRow>,
    summary: String,
}

pub fn run(args: &CompareArgs) -> Result<()> {
    let diags = Diagnostics::parse(&args.diagnostics)?;
    let sys = system::build(&args.system)?;
    let x_exact = if diags.errors {
        match exact_solution(&sys.op, &sys.b) {
            Ok(x) => Some(x),
            Err(e) => {
                eprintln!("warning: error diagnostics skipped: {e}");
                None
            }
        }
    } else {
        None
    };

    let pairs: &[SolverPair] = match args.solver {
        SolverPair::Both => &[SolverPair::Fom, SolverPair::Cg],
        SolverPair::Fom => &[SolverPair::Fom],
        SolverPair::Cg => &[SolverPair::Cg],
    };
    if pairs.len() > 1 && args.out.is_none() {
        bail!("--solver both writes two CSV files and needs --out");
    }
    for &pair in pairs {
        let outcome = match pair {
            SolverPair::Fom => run_fom(args, &sys, x_exact.as_deref(), diags),
            _ => run_cg(args, &sys, x_exact.as_deref(), diags),
        }
        .with_context(|| format!("{} pair", pair_name(pair)))?;
        match &args.out {
            Some(out) => {
                let path = if pairs.len() > 1 { suffixed(out, pair_name(pair)) } else { out.clone() };
                let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                let mut w = BufWriter::new(file);
                write_trace_csv(&mut w, &outcome.rows)?;
                w.flush()?;
                println!("{}", outcome.summary);
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                write_trace_csv(&mut w, &outcome.rows)?;
                eprintln!("{}", outcome.summary);
            }
        }
    }
    Ok(())
}

fn pair_name(pair: SolverPair) -> &'static str {
    match pair {
        SolverPair::Fom => "fom",
        SolverPair::Cg => "cg",
        SolverPair::Both => "both",
    }
}

fn suffixed(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{tag}"),
    };
    path.with_file_name(name)
}

/// `ℓ` from `--ell`, or `mult · k_conv` capped at `n`.
fn resolve_ell(args: &CompareArgs, n: usize, k_conv: usize, default_mult: f64) -> Result<usize> {
    if args.sketch == SketchKind::Identity {
        return Ok(n);
    }
    let ell = match args.ell {
        Some(ell) => ell,
        None => {
            let mult = args.ell_mult.unwrap_or(default_mult);
            if !(mult > 0.0) {
                bail!("--ell-mult must be positive, got {mult}");
            }
            ((mult * k_conv.max(1) as f64).ceil() as usize).min(n)
        }
    };
    if ell == 0 || ell > n {
        bail!("sketch size {ell} must lie in 1..={n}");
    }
    Ok(ell)
}

fn sketch(args: &CompareArgs, n: usize, ell: usize) -> Result<SketchOperator> {
    let seed = args.system.seed.wrapping_add(SKETCH_SEED_OFFSET);
    SketchOperator::new(args.sketch, n, ell, seed).context("building the sketch")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4e}"))
}

fn run_fom(args: &CompareArgs, sys: &System, x_exact: Option<&[f64]>, diags: Diagnostics) -> Result<PairOutcome> {
    let n = sys.op.n();
    let det_opts = SolveOptions { k_max: args.maxit.min(n), tol: args.tol, record_iterates: false };
    let det = fom_solve(&sys.op, &sys.b, &sys.x0, &det_opts).context("FOM")?;
    let k_conv = det.iterations();
    let ell = resolve_ell(args, n, k_conv, 5.0)?;
    let omega = sketch(args, n, ell)?;
    let rand_opts = SolveOptions { k_max: args.maxit.min(ell).min(n), ..det_opts };
    let rand = rfom_solve(&sys.op, &sys.b, &sys.x0, &omega, &rand_opts, CoefficientMethod::Mgs).context("RFOM")?;
    // the reference must cover every randomized iteration
    let det_ref = if rand.iterations() > det.iterations() {
        let opts = SolveOptions { k_max: rand.iterations(), tol: 0.0, record_iterates: false };
        fom_solve(&sys.op, &sys.b, &sys.x0, &opts).context("FOM reference")?
    } else {
        det
    };

    let mut max_ratio = None;
    let mut n_spikes = None;
    let rows = match x_exact {
        Some(x) => {
            let opts = BoundOptions {
                quasi1: diags.quasi1,
                alpha_beta: diags.alpha_beta,
                residual: diags.residual,
                residual_epsilon: None,
            };
            let report = bound_report(&sys.op, &sys.b, x, &det_ref, &rand, &omega, &opts).context("bounds")?;
            let floor = ERROR_FLOOR * sys.op.energy_norm(x)?;
            let mut rand_trace = rand.trace.clone();
            report.apply_to_trace(&mut rand_trace);
            for row in rand_trace.rows.iter_mut() {
                row.a_norm_error = row.a_norm_error.map(|e| e.max(floor));
            }
            let mut det_trace = det_ref.trace.clone();
            for (row, b) in det_trace.rows.iter_mut().zip(&report.rows) {
                row.a_norm_error = Some(b.err_det_a.max(floor));
            }
            let spikes = spike_report(&rand_trace, &det_trace, &rand.state, &det_ref.state, args.spike_threshold)?;
            max_ratio = spikes.max_ratio();
            if diags.spikes {
                n_spikes = Some(spikes.spikes.len());
                for s in &spikes.spikes {
                    eprintln!(
                        "spike k={} ratio={:.4e} min_ritz_rand={:.4e}{:+.4e}i min_ritz_det={:.4e} d2_log_err_det={}",
                        s.iter,
                        s.ratio,
                        s.min_ritz_rand.re,
                        s.min_ritz_rand.im,
                        s.min_ritz_det,
                        fmt_opt(s.d2_log_err_det)
                    );
                }
            }
            report.csv_rows()
        }
        None => rand
            .trace
            .rows
            .iter()
            .map(|r| TraceCsvRow { iter: r.iter, res_norm: Some(r.residual_norm), s_k1: r.s_k1, ..Default::default() })
            .collect(),
    };
    let eps = estimate_epsilon_span(&omega, rand.state.basis())?.epsilon_hat;
    let summary = format!(
        "pair=fom n={n} ell={ell} sketch={} k_det={k_conv} k_rand={} termination={} max_ratio={}{} eps_hat={eps:.4e}",
        args.sketch,
        rand.iterations(),
        rand.termination.as_str(),
        max_ratio.map_or_else(|| "n/a".to_string(), |(k, r)| format!("{r:.4e}@{k}")),
        n_spikes.map_or_else(String::new, |c| format!(" spikes={c}")),
    );
    Ok(PairOutcome { rows, summary })
}

fn errors_of(op: &SpdOperator, x: &[f64], iterates: &[Vec<f64>]) -> Result<Vec<f64>> {
    iterates.iter().map(|xk| a_norm_error(op, x, xk).map_err(Into::into)).collect()
}

fn run_cg(args: &CompareArgs, sys: &System, x_exact: Option<&[f64]>, diags: Diagnostics) -> Result<PairOutcome> {
    let n = sys.op.n();
    let record = x_exact.is_some();
    let det_opts = SolveOptions { k_max: args.maxit, tol: args.tol, record_iterates: record };
    let det = cg_solve(&sys.op, &sys.b, &sys.x0, &det_opts).context("CG")?;
    let k_conv = det.iterations();
    let ell = resolve_ell(args, n, k_conv, 10.0)?;
    let omega = sketch(args, n, ell)?;
    let arcg_opts = ArcgOptions {
        eta: args.tol,
        k_max: args.maxit,
        record_iterates: record,
        record_vectors: diags.energy || n <= RECORD_VECTORS_LIMIT,
        ..ArcgOptions::default()
    };
    let rand = arcg_solve(&sys.op, &sys.b, &sys.x0, &omega, &arcg_opts).context("arCG")?;
    let det_ref = if rand.iterations() > det.iterations() {
        let opts = SolveOptions { k_max: rand.iterations(), tol: 0.0, record_iterates: record };
        cg_solve(&sys.op, &sys.b, &sys.x0, &opts).context("CG reference")?
    } else {
        det
    };

    let (err_rand, err_det) = match x_exact {
        Some(x) => (errors_of(&sys.op, x, &rand.iterates)?, errors_of(&sys.op, x, &det_ref.iterates)?),
        None => (Vec::new(), Vec::new()),
    };
    let rows: Vec<TraceCsvRow> = rand
        .trace
        .rows
        .iter()
        .map(|r| TraceCsvRow {
            iter: r.iter,
            err_det_a: err_det.get(r.iter).copied(),
            err_rand_a: err_rand.get(r.iter).copied(),
            res_norm: Some(r.residual_norm),
            gamma: r.gamma,
            delta: r.delta,
            eps_tilde: r.eps_tilde,
            ..Default::default()
        })
        .collect();

    let floor = match x_exact {
        Some(x) => ERROR_FLOOR * sys.op.energy_norm(x)?,
        None => 0.0,
    };
    let mut max_ratio: Option<(usize, f64)> = None;
    let mut n_spikes = 0;
    for row in &rows {
        if let (Some(er), Some(ed)) = (row.err_rand_a, row.err_det_a) {
            let r = er.max(floor) / ed.max(floor);
            if r > args.spike_threshold {
                n_spikes += 1;
            }
            if max_ratio.is_none_or(|(_, m)| r > m) {
                max_ratio = Some((row.iter, r));
            }
        }
    }
    let mut extra = String::new();
    if diags.spikes {
        extra.push_str(&format!(" spikes={n_spikes}"));
    }
    if let (true, Some(x)) = (diags.energy, x_exact) {
        let windows = arcg_energy_windows(&sys.op, x, &omega, &rand, ENERGY_WINDOW).context("energy windows")?;
        let held = windows.iter().filter(|w| w.holds()).count();
        let defined = windows.iter().filter(|w| w.bound.is_some()).count();
        extra.push_str(&format!(" energy_windows={held}/{defined}/{}", windows.len()));
    }
    let eps = if rand.residuals.is_empty() {
        None
    } else {
        let mut vectors = rand.residuals.clone();
        vectors.extend(rand.directions.iter().cloned());
        Some(estimate_epsilon_span(&omega, &vectors)?.epsilon_hat)
    };
    let summary = format!(
        "pair=cg n={n} ell={ell} sketch={} k_det={k_conv} k_rand={} termination={} iter_ratio={:.4} max_ratio={}{extra} eps_hat={}",
        args.sketch,
        rand.iterations(),
        rand.termination.as_str(),
        rand.iterations() as f64 / k_conv.max(1) as f64,
        max_ratio.map_or_else(|| "n/a".to_string(), |(k, r)| format!("{r:.4e}@{k}")),
        fmt_opt(eps),
    );
    Ok(PairOutcome { rows, summary })
}
