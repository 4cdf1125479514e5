//! Randomized orthogonal projection methods for SPD linear systems.
//!
//! The crate pairs deterministic Krylov baselines (FOM, Lanczos, CG) with their
//! sketched counterparts (randomized FOM built on randomized Gram-Schmidt, and
//! arCG, which replaces the inner products of CG by sketched ones). The
//! [`diagnostics`] module evaluates the quasi-optimality and residual bounds of
//! the randomized solvers per iteration against the deterministic reference.
//!
//! Layout:
//!
//! - [`operators`]: SPD operators (dense, sparse Matrix Market, synthetic spectra,
//!   block-Jacobi wrapper) with optional spectral access.
//! - [`sketch`]: Gaussian and SRHT subspace embeddings, the fast Walsh-Hadamard
//!   transform and empirical embedding-quality estimates.
//! - [`solvers`]: FOM, Lanczos, CG, randomized FOM and arCG.
//! - [`diagnostics`]: error bounds, Hessenberg noise statistics, spike reports.

pub mod diagnostics;
pub mod operators;
pub mod sketch;
pub mod solvers;
pub mod vecops;

pub use operators::{load_matrix_market, OperatorError, PrecondSpec, SpdOperator, SpectrumKind, SpectrumSpec};
pub use sketch::{EpsilonEstimate, SketchError, SketchKind, SketchOperator};
pub use solvers::{IterationTrace, KrylovState, SolverError, Termination, TraceRow};
