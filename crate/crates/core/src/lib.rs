//! Auto-accelerated ILU preconditioning.
//!
//! ILU-family factors `(L + D) D^-1 (D + U)` are rescaled to
//! `(phi L + gamma D) (gamma D)^-1 (gamma D + phi U)`, with `(phi, gamma)`
//! chosen automatically by minimizing `||(A - M) e||^2`. The crate provides
//! the sparse kernels, the factorizations, the parameter optimizer, the
//! preconditioned Krylov solvers and PDE test-matrix generators.

pub mod accel;
pub mod error;
pub mod factor;
pub mod krylov;
pub mod mm;
pub mod pipeline;
pub mod problems;
pub mod scaling;
pub mod sparse;
pub mod triangular;

pub use accel::{
    build_objective, gradient_hessian, gradient_hessian_with, make_preconditioner, objective,
    optimize, AccelReport, AcceleratedIlu, AccelerationParams, Moments, ObjectiveData,
    OptimizeOptions,
};
pub use error::{Error, Result};
pub use factor::{factorize, FactorTriple, FactorizationConfig, Variant};
pub use krylov::{
    bicgstab_solve, cg_solve, classify_convergence, ConvergenceClass, IdentityPreconditioner,
    Method, Preconditioner, SolveStats, SolverConfig,
};
pub use scaling::{diagonal_scale, ScalingRecord};
pub use sparse::{build_rhs_ones, SparseMatrix, Symmetry};
