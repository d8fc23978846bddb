use std::path::{Path, PathBuf};
use std::time::Instant;

use a2ilu::mm::read_matrix_market;
use a2ilu::pipeline::{run_prepared, PipelineOptions, PreparedSystem};
use a2ilu::{build_rhs_ones, ConvergenceClass, FactorizationConfig, SparseMatrix, Variant};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Source};
use crate::error::{BenchError, Result};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "A2ILU_THREADS";

/// A matrix with its right-hand side, ready to be swept.
#[derive(Debug, Clone)]
pub struct MatrixCase {
    pub id: String,
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    /// Iteration cap used when the config leaves it unset.
    pub default_max_iters: usize,
}

impl MatrixCase {
    /// Matrix Market convention: `b = A e`, cap `n`.
    pub fn from_matrix(id: impl Into<String>, a: SparseMatrix) -> Self {
        let b = build_rhs_ones(&a);
        let default_max_iters = a.n();
        Self {
            id: id.into(),
            a,
            b,
            default_max_iters,
        }
    }
}

/// One solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub matrix: String,
    pub n: usize,
    pub nnz: usize,
    pub variant: Variant,
    pub alpha: Option<f64>,
    pub omega: Option<f64>,
    pub level_p: Option<usize>,
    pub tol: Option<f64>,
    /// Empty for Crout runs without a fill limit.
    pub fill_ratio_m: Option<f64>,
    pub accelerated: bool,
    pub phi: Option<f64>,
    pub gamma: Option<f64>,
    pub iterations: usize,
    pub convergence_class: ConvergenceClass,
    /// `f(1, 1)`.
    pub f_baseline: Option<f64>,
    /// `f` at the parameters used.
    pub f_final: Option<f64>,
    pub no_improvement: Option<bool>,
    pub projected: Option<bool>,
    /// Final `||b - A x||^2 / ||b||^2` of the (scaled) system.
    pub true_residual_sq: Option<f64>,
    /// `(N_A - N_I) / N_I`, set on accelerated records whose baseline exists.
    pub increase_ratio: Option<f64>,
    pub error: Option<String>,
    pub factor_time: f64,
    pub accel_time: f64,
    pub solve_time: f64,
}

impl RunRecord {
    fn skeleton(case: &MatrixCase, f: &FactorizationConfig, accelerated: bool) -> Self {
        let pick = |v: Variant, x: f64| (f.variant == v).then_some(x);
        Self {
            matrix: case.id.clone(),
            n: case.a.n(),
            nnz: case.a.nnz(),
            variant: f.variant,
            alpha: pick(Variant::ShiftedIlu0, f.alpha),
            omega: pick(Variant::Milu0, f.omega),
            level_p: (f.variant == Variant::LevelIlu).then_some(f.level_p),
            tol: pick(Variant::CroutIlu, f.tol),
            fill_ratio_m: if f.variant == Variant::CroutIlu {
                f.fill_ratio_m
            } else {
                None
            },
            accelerated,
            phi: None,
            gamma: None,
            iterations: 0,
            convergence_class: ConvergenceClass::NotConvergent,
            f_baseline: None,
            f_final: None,
            no_improvement: None,
            projected: None,
            true_residual_sq: None,
            increase_ratio: None,
            error: None,
            factor_time: 0.0,
            accel_time: 0.0,
            solve_time: 0.0,
        }
    }

    /// Identity of the run apart from the acceleration flag.
    pub fn pair_key(&self) -> (String, Variant, [Option<u64>; 5]) {
        let bits = |x: Option<f64>| x.map(f64::to_bits);
        (
            self.matrix.clone(),
            self.variant,
            [
                bits(self.alpha),
                bits(self.omega),
                self.level_p.map(|p| p as u64),
                bits(self.tol),
                bits(self.fill_ratio_m),
            ],
        )
    }

    pub fn is_convergent(&self) -> bool {
        self.error.is_none() && self.convergence_class == ConvergenceClass::Convergent
    }
}

/// Runs one cell. Never fails: errors land in `record.error`.
pub fn run_cell(
    case: &MatrixCase,
    sys: &std::result::Result<PreparedSystem, String>,
    factor: &FactorizationConfig,
    accelerate: bool,
    cfg: &RunConfig,
) -> RunRecord {
    let mut rec = RunRecord::skeleton(case, factor, accelerate);
    let sys = match sys {
        Ok(s) => s,
        Err(e) => {
            rec.error = Some(e.clone());
            return rec;
        }
    };
    let opts = PipelineOptions {
        factor: *factor,
        accelerate,
        optimize: cfg.optimizer,
        solver: cfg
            .solver
            .resolve(sys.a.is_symmetric(), case.default_max_iters),
    };
    let started = Instant::now();
    match run_prepared(sys, &opts) {
        Ok(res) => {
            if accelerate {
                rec.phi = Some(res.params.phi);
                rec.gamma = Some(res.params.gamma);
            }
            rec.iterations = res.stats.iterations;
            rec.convergence_class = res.stats.class();
            rec.f_baseline = Some(res.f_baseline);
            rec.f_final = Some(res.f_used);
            rec.no_improvement = res.accel.as_ref().map(|r| r.no_improvement);
            rec.projected = res.accel.as_ref().map(|r| r.projected);
            let b_sq: f64 = sys.b.iter().map(|v| v * v).sum();
            rec.true_residual_sq = res.stats.true_residual_checkpoints.last().map(|c| {
                if b_sq > 0.0 {
                    c.true_sq / b_sq
                } else {
                    0.0
                }
            });
            rec.error = res.stats.breakdown.clone();
            rec.factor_time = res.factor_time;
            rec.accel_time = res.accel_time;
            rec.solve_time = res.solve_time;
        }
        Err(e) => {
            rec.error = Some(e.to_string());
            rec.solve_time = started.elapsed().as_secs_f64();
        }
    }
    rec
}

/// Loads every matrix named by `source`. Any unreadable input is an error.
pub fn load_source(source: &Source) -> Result<Vec<MatrixCase>> {
    match source {
        Source::Generator(spec) => {
            let (a, b) = spec.generate()?;
            Ok(vec![MatrixCase {
                id: spec.id(),
                a,
                b,
                default_max_iters: 10 * spec.m(),
            }])
        }
        Source::File(path) => Ok(vec![load_file(path)?]),
        Source::Directory(dir) => mtx_files(dir)?.iter().map(|p| load_file(p)).collect(),
    }
}

pub(crate) fn load_file(path: &Path) -> Result<MatrixCase> {
    let a = read_matrix_market(path)?;
    Ok(MatrixCase::from_matrix(file_id(path), a))
}

pub(crate) fn file_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// `.mtx` files in `dir`, sorted by file name.
pub fn mtx_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| BenchError::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "mtx") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Builds the worker pool, honouring [`THREADS_ENV`] when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            BenchError::Config(format!("{THREADS_ENV}={v:?} is not a thread count"))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))
}

/// Runs every (matrix, grid value, acceleration flag) cell of `cfg` over
/// `cases`. Output order follows config order regardless of scheduling.
pub fn run_cases(cases: &[MatrixCase], cfg: &RunConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let factors: Vec<FactorizationConfig> =
        cfg.factorizations.iter().flat_map(|g| g.expand()).collect();
    let flags = cfg.acceleration.flags();
    let pool = thread_pool()?;
    let mut records: Vec<RunRecord> = pool.install(|| {
        let systems: Vec<_> = cases
            .par_iter()
            .map(|c| PreparedSystem::new(&c.a, &c.b, cfg.scaling).map_err(|e| e.to_string()))
            .collect();
        let cells: Vec<(usize, &FactorizationConfig, bool)> = (0..cases.len())
            .flat_map(|c| {
                factors
                    .iter()
                    .flat_map(move |f| flags.iter().map(move |&acc| (c, f, acc)))
            })
            .collect();
        cells
            .par_iter()
            .map(|&(c, f, acc)| run_cell(&cases[c], &systems[c], f, acc, cfg))
            .collect()
    });
    pair_records(&mut records);
    Ok(records)
}

/// Loads `cfg.source` and runs the sweep.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let cases = load_source(&cfg.source)?;
    run_cases(&cases, cfg)
}

/// Fills `increase_ratio` on accelerated records that have a baseline twin.
pub fn pair_records(records: &mut [RunRecord]) {
    use std::collections::HashMap;
    let mut baseline: HashMap<_, (usize, bool)> = HashMap::new();
    for r in records.iter().filter(|r| !r.accelerated) {
        baseline.insert(r.pair_key(), (r.iterations, r.error.is_none()));
    }
    for r in records.iter_mut().filter(|r| r.accelerated) {
        r.increase_ratio = match baseline.get(&r.pair_key()) {
            Some(&(n_i, true)) if n_i > 0 && r.error.is_none() => {
                Some((r.iterations as f64 - n_i as f64) / n_i as f64)
            }
            _ => None,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FactorGrid;
    use a2ilu::problems::ProblemSpec;

    fn cfg(grids: Vec<FactorGrid>) -> RunConfig {
        RunConfig::new(
            Source::Generator(ProblemSpec::PoissonJump {
                m: 6,
                contrast: 1e3,
            }),
            grids,
        )
    }

    #[test]
    fn cardinality_and_order() {
        let c = cfg(vec![FactorGrid::ShiftedIlu0 {
            alpha: vec![0.0, 0.1, 0.2],
        }]);
        let recs = run_sweep(&c).unwrap();
        assert_eq!(recs.len(), 6);
        let got: Vec<(Option<f64>, bool)> = recs.iter().map(|r| (r.alpha, r.accelerated)).collect();
        assert_eq!(
            got,
            vec![
                (Some(0.0), false),
                (Some(0.0), true),
                (Some(0.1), false),
                (Some(0.1), true),
                (Some(0.2), false),
                (Some(0.2), true)
            ]
        );
        for r in &recs {
            assert_eq!(r.increase_ratio.is_some(), r.accelerated);
            assert_eq!(r.phi.is_some(), r.accelerated);
        }
    }

    #[test]
    fn missing_baseline_leaves_ratio_empty() {
        let mut c = cfg(vec![FactorGrid::Ilu0]);
        c.acceleration = crate::config::Acceleration::On;
        let recs = run_sweep(&c).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].increase_ratio, None);
    }

    #[test]
    fn failures_are_recorded() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let case = MatrixCase::from_matrix("singular", a);
        let c = cfg(vec![FactorGrid::Ilu0]);
        let recs = run_cases(&[case], &c).unwrap();
        assert_eq!(recs.len(), 2);
        for r in recs {
            assert!(r.error.is_some());
            assert_eq!(r.convergence_class, ConvergenceClass::NotConvergent);
            assert_eq!(r.increase_ratio, None);
        }
    }
}
