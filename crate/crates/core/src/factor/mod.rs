//! ILU-family factorizations producing the DDU form `M = (L + D) D^-1 (D + U)`.
//!
//! Every variant returns a [`FactorTriple`]: strictly lower `L`, dense
//! diagonal `D`, strictly upper `U`, and the retained pattern `P`. In this
//! form `L` and `U` carry unscaled values, so for a complete factorization
//! `l_ij + d_ij + u_ij = a_ij - sum_k l_ik d_kk^-1 u_kj`.

mod crout;
mod level;
mod numeric;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, Symmetry};

pub use crout::{crout_ilu, fill_cap};
pub use level::{level_ilu, symbolic_levels};
pub use numeric::{factorize_on_pattern, ilu0, milu0, shifted_ilu0};

/// Pivots with magnitude below this are reported as breakdown.
pub const BREAKDOWN_THRESHOLD: f64 = 1e-300;

/// Default cap on the number of retained positions for level-of-fill ILU.
pub const DEFAULT_MAX_FILL_NNZ: usize = 200_000_000;

/// Sparsity pattern (row-wise, columns ascending, diagonal always present).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl Pattern {
    /// Pattern of `a` with the diagonal added where missing.
    pub fn of_matrix(a: &SparseMatrix) -> Self {
        let n = a.n();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(a.nnz() + n);
        row_ptr.push(0);
        for i in 0..n {
            let (cols, _) = a.row(i);
            let split = cols.partition_point(|&j| j < i);
            col_idx.extend_from_slice(&cols[..split]);
            col_idx.push(i);
            let rest = if cols.get(split) == Some(&i) {
                split + 1
            } else {
                split
            };
            col_idx.extend_from_slice(&cols[rest..]);
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
        }
    }

    /// Builds a pattern from per-row sorted column lists. The diagonal must be present.
    pub(crate) fn from_rows(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for (i, r) in rows.into_iter().enumerate() {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]) && r.binary_search(&i).is_ok());
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&j).is_ok()
    }
}

/// Strictly lower `L`, diagonal `D`, strictly upper `U`, and retained pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTriple {
    pub l: SparseMatrix,
    pub d: Vec<f64>,
    pub u: SparseMatrix,
    pub pattern: Pattern,
}

impl FactorTriple {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// `M x = (L + D) D^-1 (D + U) x`.
    pub fn apply_m(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.u.matvec(x)?;
        for i in 0..y.len() {
            y[i] = (y[i] + self.d[i] * x[i]) / self.d[i];
        }
        let mut z = self.l.matvec(&y)?;
        for i in 0..z.len() {
            z[i] += self.d[i] * y[i];
        }
        Ok(z)
    }

    /// Nonzeros stored in `L`, `D` and `U` together.
    pub fn nnz(&self) -> usize {
        self.l.nnz() + self.u.nnz() + self.d.len()
    }
}

/// Which member of the ILU family to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Ilu0,
    ShiftedIlu0,
    Milu0,
    LevelIlu,
    CroutIlu,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Ilu0 => "ilu0",
            Variant::ShiftedIlu0 => "shifted_ilu0",
            Variant::Milu0 => "milu0",
            Variant::LevelIlu => "level_ilu",
            Variant::CroutIlu => "crout_ilu",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ilu0" => Variant::Ilu0,
            "shifted_ilu0" | "shifted" => Variant::ShiftedIlu0,
            "milu0" | "milu" => Variant::Milu0,
            "level_ilu" | "iluk" | "level" => Variant::LevelIlu,
            "crout_ilu" | "crout" => Variant::CroutIlu,
            other => return Err(Error::InvalidArgument(format!("unknown variant {other:?}"))),
        })
    }
}

/// Parameters for [`factorize`]. Only the fields relevant to `variant` are read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FactorizationConfig {
    pub variant: Variant,
    /// Diagonal shift for shifted ILU(0).
    pub alpha: f64,
    /// Relaxation for MILU(0).
    pub omega: f64,
    /// Fill level for level-of-fill ILU.
    pub level_p: usize,
    /// Crout drop tolerance.
    pub tol: f64,
    /// Crout fill ratio; `None` means unlimited.
    pub fill_ratio_m: Option<f64>,
    /// Pattern size budget for level-of-fill ILU.
    pub max_fill_nnz: usize,
}

impl Default for FactorizationConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Ilu0,
            alpha: 0.0,
            omega: 0.0,
            level_p: 0,
            tol: 0.0,
            fill_ratio_m: None,
            max_fill_nnz: DEFAULT_MAX_FILL_NNZ,
        }
    }
}

impl FactorizationConfig {
    pub fn ilu0() -> Self {
        Self::default()
    }

    pub fn shifted(alpha: f64) -> Self {
        Self {
            variant: Variant::ShiftedIlu0,
            alpha,
            ..Self::default()
        }
    }

    pub fn milu(omega: f64) -> Self {
        Self {
            variant: Variant::Milu0,
            omega,
            ..Self::default()
        }
    }

    pub fn level(p: usize) -> Self {
        Self {
            variant: Variant::LevelIlu,
            level_p: p,
            ..Self::default()
        }
    }

    pub fn crout(tol: f64, fill_ratio_m: Option<f64>) -> Self {
        Self {
            variant: Variant::CroutIlu,
            tol,
            fill_ratio_m,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !self.alpha.is_finite() {
            return bad("alpha must be finite");
        }
        if !self.omega.is_finite() {
            return bad("omega must be finite");
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return bad("tol must be finite and nonnegative");
        }
        if let Some(m) = self.fill_ratio_m {
            if !(m >= 1.0) {
                return bad("fill ratio m must be at least 1");
            }
        }
        Ok(())
    }
}

/// Runs the configured variant on `a`.
pub fn factorize(a: &SparseMatrix, cfg: &FactorizationConfig) -> Result<FactorTriple> {
    cfg.validate()?;
    match cfg.variant {
        Variant::Ilu0 => ilu0(a),
        Variant::ShiftedIlu0 => shifted_ilu0(a, cfg.alpha),
        Variant::Milu0 => milu0(a, cfg.omega),
        Variant::LevelIlu => level_ilu(a, cfg.level_p, cfg.max_fill_nnz),
        Variant::CroutIlu => crout_ilu(a, cfg.tol, cfg.fill_ratio_m),
    }
}

pub(crate) fn check_pivot(row: usize, value: f64) -> Result<()> {
    if !value.is_finite() {
        Err(Error::NonFinite { row })
    } else if value.abs() < BREAKDOWN_THRESHOLD {
        Err(Error::Breakdown { row, value })
    } else {
        Ok(())
    }
}

/// Assembles CSR from per-row `(col, value)` lists that are already sorted.
pub(crate) fn csr_from_rows(n: usize, rows: &[Vec<(usize, f64)>]) -> SparseMatrix {
    let nnz = rows.iter().map(Vec::len).sum();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    row_ptr.push(0);
    for r in rows {
        for &(j, v) in r {
            col_idx.push(j);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    SparseMatrix::from_parts(n, row_ptr, col_idx, values, Symmetry::General)
}
