//! `ropm`: paired deterministic/randomized Krylov runs with per-iteration
//! bound diagnostics, synthetic matrix generation and Hessenberg noise studies.

mod compare;
mod matgen;
mod noise;
mod system;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ropm::{PrecondSpec, SketchKind};

#[derive(Parser, Debug)]
#[command(name = "ropm", version, about = "Randomized orthogonal projection Krylov solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a deterministic solver and its randomized counterpart on one system and write a CSV trace.
    Compare(CompareArgs),
    /// Write a spectrum spec (and optionally a densified Matrix Market file).
    Matgen(MatgenArgs),
    /// Statistics of the randomized Hessenberg matrix above its superdiagonal.
    Noise(NoiseArgs),
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct MatrixSource {
    /// Matrix Market file (coordinate real symmetric).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Preset name (`G-exp2` or `G-exp2:4096`), a key=value spec file, or an inline
    /// spec such as `kind=clusters,n=4096,lambda_min=1,lambda_max=1e5,n_clusters=5,radius_ratio=0.25`.
    #[arg(long)]
    pub spectrum: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    /// Solve with `A + shift·I`.
    #[arg(long)]
    pub shift: Option<f64>,
    /// `none` or `block-jacobi:NB`.
    #[arg(long, default_value = "none")]
    pub precond: PrecondSpec,
    /// `gauss` (unit-norm Gaussian), `ones`, or a file with one value per line.
    #[arg(long, default_value = "gauss")]
    pub rhs: String,
    /// `zero` or a file with one value per line.
    #[arg(long, default_value = "zero")]
    pub x0: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPair {
    /// FOM and randomized FOM.
    Fom,
    /// CG and arCG.
    Cg,
    Both,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_enum, default_value_t = SolverPair::Fom)]
    pub solver: SolverPair,
    #[arg(long, default_value = "srht")]
    pub sketch: SketchKind,
    /// Sketch size.
    #[arg(long, conflicts_with = "ell_mult")]
    pub ell: Option<usize>,
    /// Sketch size as a multiple of the deterministic iteration count (capped at n).
    #[arg(long)]
    pub ell_mult: Option<f64>,
    #[arg(long, default_value_t = 500)]
    pub maxit: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Comma-separated subset of errors,quasi1,alpha-beta,residual,spikes,energy; or all, none.
    #[arg(long, default_value = "errors")]
    pub diagnostics: String,
    /// Error ratio above which an iteration is reported as a spike.
    #[arg(long, default_value_t = 10.0)]
    pub spike_threshold: f64,
    /// CSV output path; with `--solver both`, `_fom` and `_cg` are appended to the file stem.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MatgenArgs {
    #[arg(long)]
    pub spectrum: String,
    /// Overrides the seed of the spec.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path for the key=value spec.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the densified matrix in Matrix Market format (n ≤ 1024).
    #[arg(long)]
    pub mtx: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NoiseArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, default_value = "gaussian")]
    pub sketch: SketchKind,
    #[arg(long)]
    pub ell: usize,
    /// Hessenberg size `k`.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Histogram CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Repeat with this many consecutive sketch seeds and collect one entry.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Entry `i,j` (1-based, `j ≥ i + 2`) collected across seeds.
    #[arg(long, default_value = "1,5")]
    pub entry: String,
    /// CSV for the repeated-seed samples; stdout when absent.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compare(a) => compare::run(&a),
        Command::Matgen(a) => matgen::run(&a),
        Command::Noise(a) => noise::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
