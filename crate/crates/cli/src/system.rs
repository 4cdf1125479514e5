use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ropm::operators::{PRESETS, PRESET_DEFAULT_N};
use ropm::vecops::random_unit_vector;
use ropm::{load_matrix_market, PrecondSpec, SpdOperator, SpectrumSpec};

use crate::SystemArgs;

/// Seed offset for the right-hand side, so that it differs from the sketch.
const RHS_SEED_OFFSET: u64 = 0x5eed;

/// The (possibly shifted and preconditioned) operator with mapped rhs and x0.
pub struct System {
    pub op: SpdOperator,
    pub b: Vec<f64>,
    pub x0: Vec<f64>,
}

/// `NAME`, `NAME:N`, a spec file, or an inline `key=value,...` list.
pub fn parse_spectrum(arg: &str, seed: u64) -> Result<SpectrumSpec> {
    let (name, n) = match arg.split_once(':') {
        Some((name, n)) => (name, n.parse::<usize>().with_context(|| format!("bad dimension in '{arg}'"))?),
        None => (arg, PRESET_DEFAULT_N),
    };
    if PRESETS.contains(&name) {
        return Ok(SpectrumSpec::preset(name, n, seed)?);
    }
    let text = if Path::new(arg).is_file() {
        fs::read_to_string(arg).with_context(|| format!("reading spectrum spec {arg}"))?
    } else if arg.contains('=') {
        arg.to_string()
    } else {
        bail!("'{arg}' is neither a preset ({}), a spec file, nor an inline key=value spec", PRESETS.join(", "));
    };
    Ok(SpectrumSpec::from_kv_str(&text)?)
}

fn read_vector(path: &str, n: usize) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading vector file {path}"))?;
    let v = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().with_context(|| format!("bad number '{t}' in {path}")))
        .collect::<Result<Vec<_>>>()?;
    if v.len() != n {
        bail!("{path} has {} entries, expected {n}", v.len());
    }
    Ok(v)
}

pub fn build_operator(args: &SystemArgs) -> Result<SpdOperator> {
    let mut op = match (&args.source.matrix, &args.source.spectrum) {
        (Some(path), None) => load_matrix_market(path).with_context(|| format!("loading {}", path.display()))?,
        (None, Some(spec)) => SpdOperator::generate(&parse_spectrum(spec, args.seed)?)?,
        _ => bail!("exactly one of --matrix and --spectrum is required"),
    };
    if let Some(shift) = args.shift {
        op = op.shifted(shift);
    }
    if args.precond != PrecondSpec::None {
        op = op.block_jacobi(&args.precond).context("building the preconditioner")?;
    }
    Ok(op)
}

pub fn build(args: &SystemArgs) -> Result<System> {
    let op = build_operator(args)?;
    let n = op.n();
    let b = match args.rhs.as_str() {
        "gauss" => random_unit_vector(n, args.seed.wrapping_add(RHS_SEED_OFFSET)),
        "ones" => vec![1.0; n],
        path => read_vector(path, n)?,
    };
    let b = op.map_rhs(&b)?;
    let x0 = match args.x0.as_str() {
        "zero" => vec![0.0; n],
        path => read_vector(path, n)?,
    };
    Ok(System { op, b, x0 })
}
