//! Benchmark harness for auto-accelerated ILU preconditioning.
//!
//! A sweep runs every cell of (matrix, factorization grid value,
//! acceleration on/off) and records iterations, convergence class, the
//! objective before and after tuning, and timings. A collection run applies
//! shifted ILU(0) with and without acceleration to a directory of Matrix
//! Market files and tallies the outcomes per shift.

pub mod collection;
pub mod config;
pub mod error;
pub mod report;
pub mod sweep;

pub use collection::{run_collection, CollectionConfig, CollectionReport};
pub use config::{Acceleration, FactorGrid, OutputFormat, RunConfig, SolverSettings, Source};
pub use error::{BenchError, Result};
pub use report::{emit_report, Report};
pub use sweep::{run_cases, run_sweep, MatrixCase, RunRecord};
