use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use ropm::diagnostics::{hessenberg_noise, write_histogram_csv, write_samples_csv};
use ropm::solvers::{fom_solve, rfom_solve, CoefficientMethod, KrylovSolve, SolveOptions};
use ropm::SketchOperator;

use crate::compare::SKETCH_SEED_OFFSET;
use crate::system::{self, System};
use crate::NoiseArgs;

fn parse_entry(s: &str) -> Result<(usize, usize)> {
    let (i, j) = s.split_once(',').with_context(|| format!("entry '{s}' is not of the form i,j"))?;
    let (i, j): (usize, usize) = (i.trim().parse()?, j.trim().parse()?);
    if i == 0 || j < i + 2 {
        bail!("entry ({i},{j}) must satisfy i >= 1 and j >= i + 2");
    }
    Ok((i, j))
}

fn randomized(sys: &System, args: &NoiseArgs, seed: u64, k: usize) -> Result<(usize, KrylovSolve)> {
    let n = sys.op.n();
    let omega = SketchOperator::new(args.sketch, n, args.ell, seed.wrapping_add(SKETCH_SEED_OFFSET))?;
    let opts = SolveOptions { k_max: k, tol: 0.0, record_iterates: false };
    let rand = rfom_solve(&sys.op, &sys.b, &sys.x0, &omega, &opts, CoefficientMethod::Mgs).context("RFOM")?;
    Ok((omega.ell(), rand))
}

fn with_writer(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
            f(&mut w)?;
            w.flush()?;
        }
        None => f(&mut io::stdout().lock())?,
    }
    Ok(())
}

pub fn run(args: &NoiseArgs) -> Result<()> {
    let sys = system::build(&args.system)?;
    let k = args.k;
    let det_opts = SolveOptions { k_max: (k + 1).min(sys.op.n()), tol: 0.0, record_iterates: false };
    let det = fom_solve(&sys.op, &sys.b, &sys.x0, &det_opts).context("FOM")?;
    if det.iterations() < k {
        bail!("deterministic Arnoldi broke down after {} < k = {k} steps", det.iterations());
    }

    let Some(n_seeds) = args.seeds else {
        let (ell, rand) = randomized(&sys, args, args.system.seed, k)?;
        let report = hessenberg_noise(&sys.op, &rand.state, &det.state, ell, k)?;
        with_writer(args.out.as_deref(), |w| write_histogram_csv(w, &report.histogram))?;
        let line = format!(
            "k={k} ell={ell} entries={} mean={:.4e} std={:.4e} predicted_std={:.4e} std_ratio={:.4} unimodal={}",
            report.entries.len(),
            report.mean,
            report.std,
            report.mean_predicted_std,
            report.std_ratio(),
            report.is_unimodal(1)
        );
        if args.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
        return Ok(());
    };

    let (i, j) = parse_entry(&args.entry)?;
    if j > k {
        bail!("entry ({i},{j}) lies outside H_k for k = {k}");
    }
    let mut samples = Vec::with_capacity(n_seeds as usize);
    for s in 0..n_seeds {
        let seed = args.system.seed.wrapping_add(s);
        let (_, rand) = randomized(&sys, args, seed, j)?;
        if rand.iterations() < j {
            bail!("randomized Arnoldi broke down before step {j} (seed {seed})");
        }
        samples.push((seed, rand.state.h(i, j) - det.state.h(i, j)));
    }
    if let Some(out) = &args.out {
        let (ell, rand) = randomized(&sys, args, args.system.seed, k)?;
        let report = hessenberg_noise(&sys.op, &rand.state, &det.state, ell, k)?;
        with_writer(Some(out), |w| write_histogram_csv(w, &report.histogram))?;
    }
    with_writer(args.samples_out.as_deref(), |w| write_samples_csv(w, &samples))?;
    let m = samples.len() as f64;
    let mean = samples.iter().map(|s| s.1).sum::<f64>() / m;
    let std = if samples.len() > 1 {
        (samples.iter().map(|s| (s.1 - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    let line = format!("entry=({i},{j}) samples={} mean={mean:.4e} std={std:.4e} stderr={:.4e}", samples.len(), std / m.sqrt());
    if args.samples_out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}
