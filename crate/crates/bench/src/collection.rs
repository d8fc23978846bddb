use std::path::Path;

use a2ilu::mm::read_matrix_market;
use a2ilu::{ConvergenceClass, OptimizeOptions};
use serde::{Deserialize, Serialize};

use crate::config::{round, Acceleration, FactorGrid, RunConfig, SolverSettings, Source};
use crate::error::Result;
use crate::sweep::{file_id, mtx_files, run_cases, MatrixCase, RunRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CollectionConfig {
    pub alphas: Vec<f64>,
    pub solver: SolverSettings,
    pub optimizer: OptimizeOptions,
    pub scaling: bool,
}

impl Default for CollectionConfig {
    fn default() -> Self {
        Self {
            alphas: (0..=5).map(|j| round(0.1 * j as f64)).collect(),
            solver: SolverSettings::default(),
            optimizer: OptimizeOptions::default(),
            scaling: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub convergent: usize,
    pub pseudo_convergent: usize,
    pub not_convergent: usize,
}

impl ClassCounts {
    fn add(&mut self, r: &RunRecord) {
        match (r.error.is_some(), r.convergence_class) {
            (false, ConvergenceClass::Convergent) => self.convergent += 1,
            (false, ConvergenceClass::PseudoConvergent) => self.pseudo_convergent += 1,
            _ => self.not_convergent += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.convergent + self.pseudo_convergent + self.not_convergent
    }
}

/// Matrices per increase-ratio class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Histogram {
    pub below_minus_50: usize,
    pub minus_50_to_0: usize,
    pub no_change: usize,
    pub zero_to_plus_50: usize,
    pub above_plus_50: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    BelowMinus50,
    Minus50To0,
    NoChange,
    ZeroToPlus50,
    AbovePlus50,
}

/// Buckets a (baseline, accelerated) pair. Convergence by only one of the
/// two counts as the extreme bucket on that side; neither converging is no
/// change.
pub fn bucket(baseline: &RunRecord, accelerated: &RunRecord) -> Bucket {
    match (baseline.is_convergent(), accelerated.is_convergent()) {
        (false, false) => Bucket::NoChange,
        (false, true) => Bucket::BelowMinus50,
        (true, false) => Bucket::AbovePlus50,
        (true, true) => {
            let (ni, na) = (baseline.iterations as f64, accelerated.iterations as f64);
            if na == ni {
                return Bucket::NoChange;
            }
            let r = (na - ni) / ni.max(1.0);
            if r < -0.5 {
                Bucket::BelowMinus50
            } else if r < 0.0 {
                Bucket::Minus50To0
            } else if r <= 0.5 {
                Bucket::ZeroToPlus50
            } else {
                Bucket::AbovePlus50
            }
        }
    }
}

impl Histogram {
    fn add(&mut self, b: Bucket) {
        match b {
            Bucket::BelowMinus50 => self.below_minus_50 += 1,
            Bucket::Minus50To0 => self.minus_50_to_0 += 1,
            Bucket::NoChange => self.no_change += 1,
            Bucket::ZeroToPlus50 => self.zero_to_plus_50 += 1,
            Bucket::AbovePlus50 => self.above_plus_50 += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaTally {
    pub alpha: f64,
    pub shifted_ilu: ClassCounts,
    pub shifted_a2ilu: ClassCounts,
    pub increase_ratio: Histogram,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub file: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionReport {
    pub matrices: Vec<String>,
    pub skipped: Vec<Skipped>,
    pub tallies: Vec<AlphaTally>,
    pub records: Vec<RunRecord>,
}

/// Runs shifted ILU(0) and shifted A2ILU(0) over every `.mtx` file in `dir`
/// for each shift in `cfg.alphas`.
///
/// Files that cannot be read, have a zero on the diagonal or give `A e = 0`
/// are skipped and listed with the reason.
pub fn run_collection(dir: &Path, cfg: &CollectionConfig) -> Result<CollectionReport> {
    let mut cases = Vec::new();
    let mut skipped = Vec::new();
    for path in mtx_files(dir)? {
        let file = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let reason = match read_matrix_market(&path) {
            Err(e) => Some(e.to_string()),
            Ok(a) => {
                if let Some(row) = a.first_zero_diagonal() {
                    Some(format!("zero diagonal entry in row {row}"))
                } else {
                    let case = MatrixCase::from_matrix(file_id(&path), a);
                    if case.b.iter().all(|&v| v == 0.0) {
                        Some("right-hand side A e is zero".to_string())
                    } else {
                        cases.push(case);
                        None
                    }
                }
            }
        };
        if let Some(reason) = reason {
            skipped.push(Skipped { file, reason });
        }
    }

    let run_cfg = RunConfig {
        source: Source::Directory(dir.to_path_buf()),
        factorizations: vec![FactorGrid::ShiftedIlu0 {
            alpha: cfg.alphas.clone(),
        }],
        acceleration: Acceleration::Both,
        solver: cfg.solver,
        optimizer: cfg.optimizer,
        scaling: cfg.scaling,
        output: Default::default(),
    };
    let records = if cases.is_empty() {
        Vec::new()
    } else {
        run_cases(&cases, &run_cfg)?
    };

    let tallies = cfg
        .alphas
        .iter()
        .map(|&alpha| {
            let mut t = AlphaTally {
                alpha,
                shifted_ilu: ClassCounts::default(),
                shifted_a2ilu: ClassCounts::default(),
                increase_ratio: Histogram::default(),
            };
            let at: Vec<&RunRecord> = records.iter().filter(|r| r.alpha == Some(alpha)).collect();
            for pair in at.chunks(2) {
                let [base, acc] = pair else { continue };
                t.shifted_ilu.add(base);
                t.shifted_a2ilu.add(acc);
                t.increase_ratio.add(bucket(base, acc));
            }
            t
        })
        .collect();

    Ok(CollectionReport {
        matrices: cases.into_iter().map(|c| c.id).collect(),
        skipped,
        tallies,
        records,
    })
}
