use std::path::{Path, PathBuf};

use a2ilu::problems::ProblemSpec;
use a2ilu::{FactorizationConfig, Method, OptimizeOptions, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Where the coefficient matrices come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Generator(ProblemSpec),
    /// A single Matrix Market file.
    File(PathBuf),
    /// Every `.mtx` file in a directory, sorted by name.
    Directory(PathBuf),
}

/// One factorization variant with its parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum FactorGrid {
    Ilu0,
    ShiftedIlu0 {
        alpha: Vec<f64>,
    },
    Milu0 {
        omega: Vec<f64>,
    },
    LevelIlu {
        p: Vec<usize>,
    },
    /// `m = None` means no fill limit.
    CroutIlu {
        tol: Vec<f64>,
        #[serde(default = "unlimited")]
        m: Vec<Option<f64>>,
    },
}

fn unlimited() -> Vec<Option<f64>> {
    vec![None]
}

impl FactorGrid {
    /// Grid values in config order; for Crout the tolerance varies slowest.
    pub fn expand(&self) -> Vec<FactorizationConfig> {
        match self {
            FactorGrid::Ilu0 => vec![FactorizationConfig::ilu0()],
            FactorGrid::ShiftedIlu0 { alpha } => alpha
                .iter()
                .map(|&a| FactorizationConfig::shifted(a))
                .collect(),
            FactorGrid::Milu0 { omega } => omega
                .iter()
                .map(|&w| FactorizationConfig::milu(w))
                .collect(),
            FactorGrid::LevelIlu { p } => {
                p.iter().map(|&p| FactorizationConfig::level(p)).collect()
            }
            FactorGrid::CroutIlu { tol, m } => tol
                .iter()
                .flat_map(|&t| m.iter().map(move |&m| FactorizationConfig::crout(t, m)))
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: &[f64]| {
            if v.is_empty() {
                return Err(BenchError::Config(format!("{name} grid is empty")));
            }
            match v.iter().find(|x| !x.is_finite()) {
                Some(x) => Err(BenchError::Config(format!(
                    "{name} grid has non-finite value {x}"
                ))),
                None => Ok(()),
            }
        };
        match self {
            FactorGrid::Ilu0 => Ok(()),
            FactorGrid::ShiftedIlu0 { alpha } => finite("alpha", alpha),
            FactorGrid::Milu0 { omega } => finite("omega", omega),
            FactorGrid::LevelIlu { p } if p.is_empty() => {
                Err(BenchError::Config("p grid is empty".into()))
            }
            FactorGrid::LevelIlu { .. } => Ok(()),
            FactorGrid::CroutIlu { tol, m } => {
                finite("tol", tol)?;
                if m.is_empty() {
                    return Err(BenchError::Config("m grid is empty".into()));
                }
                let given: Vec<f64> = m.iter().flatten().copied().collect();
                if given.is_empty() {
                    return Ok(());
                }
                finite("m", &given)
            }
        }
        .and_then(|()| {
            for f in self.expand() {
                f.validate()?;
            }
            Ok(())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Acceleration {
    On,
    Off,
    #[default]
    Both,
}

impl Acceleration {
    /// Baseline first so that pairs sit next to each other.
    pub fn flags(self) -> &'static [bool] {
        match self {
            Acceleration::On => &[true],
            Acceleration::Off => &[false],
            Acceleration::Both => &[false, true],
        }
    }
}

/// Krylov settings. Unset fields fall back to problem-dependent defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    /// `None` picks CG for symmetric matrices and BiCGSTAB otherwise.
    pub method: Option<Method>,
    /// Bound on `||r||^2 / ||b||^2`.
    pub epsilon: f64,
    /// `None` means `10 m` for generated problems and `n` for files.
    pub max_iters: Option<usize>,
    pub true_residual_stride: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            method: None,
            epsilon: 1e-16,
            max_iters: None,
            true_residual_stride: 10,
        }
    }
}

impl SolverSettings {
    pub fn resolve(&self, symmetric: bool, default_max: usize) -> SolverConfig {
        let method = self.method.unwrap_or(if symmetric {
            Method::Cg
        } else {
            Method::Bicgstab
        });
        let mut cfg =
            SolverConfig::new(method, self.epsilon, self.max_iters.unwrap_or(default_max));
        cfg.true_residual_stride = self.true_residual_stride;
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSettings {
    /// Path prefix; `.csv`, `.timings.csv` and `.json` are appended.
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

/// A full sweep description, loadable from JSON or TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub source: Source,
    pub factorizations: Vec<FactorGrid>,
    #[serde(default)]
    pub acceleration: Acceleration,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub optimizer: OptimizeOptions,
    #[serde(default = "yes")]
    pub scaling: bool,
    #[serde(default)]
    pub output: OutputSettings,
}

fn yes() -> bool {
    true
}

impl RunConfig {
    pub fn new(source: Source, factorizations: Vec<FactorGrid>) -> Self {
        Self {
            source,
            factorizations,
            acceleration: Acceleration::Both,
            solver: SolverSettings::default(),
            optimizer: OptimizeOptions::default(),
            scaling: true,
            output: OutputSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.factorizations.is_empty() {
            return Err(BenchError::Config("no factorizations given".into()));
        }
        for g in &self.factorizations {
            g.validate()?;
        }
        let eps = self.solver.epsilon;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(BenchError::Config(format!(
                "epsilon {eps} must be positive"
            )));
        }
        if self.solver.true_residual_stride == 0 {
            return Err(BenchError::Config(
                "true_residual_stride must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Reads `.json` or `.toml` (by extension; anything else is tried as JSON).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let cfg: RunConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).map_err(|e| BenchError::Config(e.to_string()))?,
            _ => serde_json::from_str(&text).map_err(|e| BenchError::Config(e.to_string()))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// The parameter grids used for the ILU-family comparisons.
pub fn standard_grids() -> Vec<FactorGrid> {
    let steps =
        |start: f64, count: usize| (0..count).map(|j| round(start + 0.1 * j as f64)).collect();
    vec![
        FactorGrid::Ilu0,
        FactorGrid::ShiftedIlu0 {
            alpha: steps(-0.4, 11),
        },
        FactorGrid::Milu0 {
            omega: steps(-0.5, 17),
        },
        FactorGrid::LevelIlu { p: vec![1, 2, 3] },
        FactorGrid::CroutIlu {
            tol: vec![0.001, 0.002, 0.004, 0.01, 0.02, 0.04, 0.1, 0.2],
            m: vec![Some(1.0), Some(2.0), Some(5.0), Some(10.0)],
        },
    ]
}

/// `0.1 * j` sums drift by an ulp; snap grid values to 10 decimals.
pub(crate) fn round(x: f64) -> f64 {
    (x * 1e10).round() / 1e10
}
