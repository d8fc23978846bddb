//! Scale, factorize, accelerate, solve.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::accel::{
    build_objective, make_preconditioner, objective, optimize, AccelReport, AccelerationParams,
    OptimizeOptions,
};
use crate::error::Result;
use crate::factor::{factorize, FactorizationConfig};
use crate::krylov::{solve, SolveStats, SolverConfig};
use crate::scaling::{diagonal_scale, ScalingRecord};
use crate::sparse::SparseMatrix;

/// A linear system after optional diagonal scaling.
#[derive(Debug, Clone)]
pub struct PreparedSystem {
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub scaling: ScalingRecord,
}

impl PreparedSystem {
    pub fn new(a: &SparseMatrix, b: &[f64], scale: bool) -> Result<Self> {
        if scale {
            let (a_hat, scaling) = diagonal_scale(a)?;
            let b_hat = scaling.scale_rhs(b)?;
            Ok(Self {
                a: a_hat,
                b: b_hat,
                scaling,
            })
        } else {
            Ok(Self {
                a: a.clone(),
                b: b.to_vec(),
                scaling: ScalingRecord::identity(a.n()),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub factor: FactorizationConfig,
    pub accelerate: bool,
    pub optimize: OptimizeOptions,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    /// Solution in the original (unscaled) variables.
    pub x: Vec<f64>,
    pub stats: SolveStats,
    pub params: AccelerationParams,
    /// `f(1, 1)` for the factorization.
    pub f_baseline: f64,
    /// `f` at the parameters actually used.
    pub f_used: f64,
    pub accel: Option<AccelReport>,
    pub factor_time: f64,
    pub accel_time: f64,
    pub solve_time: f64,
}

/// Factorizes `sys.a`, optionally tunes `(phi, gamma)`, and solves.
pub fn run_prepared(sys: &PreparedSystem, opts: &PipelineOptions) -> Result<PipelineResult> {
    let t0 = Instant::now();
    let factors = factorize(&sys.a, &opts.factor)?;
    let factor_time = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let obj = build_objective(&sys.a, &factors)?;
    let (params, accel) = if opts.accelerate {
        let report = optimize(&obj, &opts.optimize);
        (report.params, Some(report))
    } else {
        (AccelerationParams::BASELINE, None)
    };
    let accel_time = if opts.accelerate {
        t1.elapsed().as_secs_f64()
    } else {
        0.0
    };
    let f_baseline = accel.as_ref().map_or_else(
        || objective(&obj, AccelerationParams::BASELINE),
        |r| Ok(r.f_initial),
    )?;
    let f_used = accel.as_ref().map_or(f_baseline, |r| r.f_final);

    let t2 = Instant::now();
    let m = make_preconditioner(&factors, params)?;
    let setup = t2.elapsed().as_secs_f64();
    let (y, mut stats) = solve(&sys.a, &m, &sys.b, None, &opts.solver)?;
    stats.preconditioner_setup_time = factor_time + setup;
    stats.acceleration_time = accel_time;
    let solve_time = stats.wall_time;
    let x = sys.scaling.unscale_solution(&y)?;
    Ok(PipelineResult {
        x,
        stats,
        params,
        f_baseline,
        f_used,
        accel,
        factor_time,
        accel_time,
        solve_time,
    })
}

/// [`PreparedSystem::new`] followed by [`run_prepared`].
pub fn run(
    a: &SparseMatrix,
    b: &[f64],
    scale: bool,
    opts: &PipelineOptions,
) -> Result<PipelineResult> {
    run_prepared(&PreparedSystem::new(a, b, scale)?, opts)
}
