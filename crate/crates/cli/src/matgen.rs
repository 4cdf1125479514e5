use std::fs;

use anyhow::{bail, Context, Result};
use ropm::operators::write_matrix_market;
use ropm::SpdOperator;

use crate::system::parse_spectrum;
use crate::MatgenArgs;

/// Largest dimension written as a dense Matrix Market file.
pub const MTX_LIMIT: usize = 1024;

pub fn run(args: &MatgenArgs) -> Result<()> {
    let mut spec = parse_spectrum(&args.spectrum, args.seed.unwrap_or(0))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    spec.validate()?;
    fs::write(&args.out, spec.to_kv_string()).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(mtx) = &args.mtx {
        if spec.n > MTX_LIMIT {
            bail!("refusing to densify n = {} (limit {MTX_LIMIT})", spec.n);
        }
        let dense = SpdOperator::generate(&spec)?.to_dense()?;
        write_matrix_market(mtx, &dense).with_context(|| format!("writing {}", mtx.display()))?;
    }
    println!(
        "kind={} n={} lambda_min={:e} lambda_max={:e} cond={:e} seed={}",
        spec.kind.as_str(),
        spec.n,
        spec.lambda_min,
        spec.lambda_max,
        spec.lambda_max / spec.lambda_min,
        spec.seed
    );
    Ok(())
}
