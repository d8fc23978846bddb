//! Symmetric diagonal scaling `S A S` with `S = diag(1/sqrt(|a_ii|))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{check_len, SparseMatrix};

/// Per-row factors of a symmetric diagonal scaling.
///
/// With `Â = S A S`, the system `A x = b` becomes `Â y = S b` and `x = S y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub d_scale: Vec<f64>,
    pub applied: bool,
}

impl ScalingRecord {
    /// A record for an unscaled system (all factors one).
    pub fn identity(n: usize) -> Self {
        Self {
            d_scale: vec![1.0; n],
            applied: false,
        }
    }

    /// `S b`, the right-hand side of the scaled system.
    pub fn scale_rhs(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.d_scale.len(), b.len())?;
        Ok(b.iter().zip(&self.d_scale).map(|(v, s)| v * s).collect())
    }

    /// `x = S y`, mapping a scaled-system solution back to original variables.
    pub fn unscale_solution(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.d_scale.len(), y.len())?;
        Ok(y.iter().zip(&self.d_scale).map(|(v, s)| v * s).collect())
    }
}

/// Scales `A` so that every diagonal entry becomes `sign(a_ii)`.
///
/// Rejects matrices with a zero (or missing) diagonal entry.
pub fn diagonal_scale(a: &SparseMatrix) -> Result<(SparseMatrix, ScalingRecord)> {
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroDiagonal { row });
    }
    let d_scale: Vec<f64> = diag.iter().map(|v| 1.0 / v.abs().sqrt()).collect();
    let symmetric = a.is_symmetric();
    let scaled = a.map_values(|i, j, v| {
        if i == j {
            v.signum()
        } else {
            v * d_scale[i.min(j)] * d_scale[i.max(j)]
        }
    });
    // fixed multiplication order keeps mirrored entries bitwise equal
    debug_assert!(!symmetric || scaled.is_symmetric());
    Ok((
        scaled,
        ScalingRecord {
            d_scale,
            applied: true,
        },
    ))
}
