//! Forward and backward substitution with a strictly triangular CSR part and
//! a separate dense diagonal, i.e. the `(L + D)` and `(D + U)` factors of the
//! DDU form `(L + D) D^-1 (D + U)`.

use crate::error::{Error, Result};
use crate::sparse::{check_len, SparseMatrix};

/// Solves `(L + D) y = b` where `L` is strictly lower triangular.
pub fn lower_solve(l: &SparseMatrix, d: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_shapes(l, d, b)?;
    check_diagonal(d)?;
    let mut y = vec![0.0; b.len()];
    lower_solve_into(l, d, b, &mut y);
    Ok(y)
}

/// Solves `(D + U) y = b` where `U` is strictly upper triangular.
pub fn upper_solve(u: &SparseMatrix, d: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_shapes(u, d, b)?;
    check_diagonal(d)?;
    let mut y = vec![0.0; b.len()];
    upper_solve_into(u, d, b, &mut y);
    Ok(y)
}

/// Unchecked forward substitution; shapes and nonzero diagonal are the caller's job.
#[inline]
pub(crate) fn lower_solve_into(l: &SparseMatrix, d: &[f64], b: &[f64], y: &mut [f64]) {
    for i in 0..b.len() {
        let (cols, vals) = l.row(i);
        let mut acc = b[i];
        for (&j, &v) in cols.iter().zip(vals) {
            acc -= v * y[j];
        }
        y[i] = acc / d[i];
    }
}

/// Unchecked backward substitution.
#[inline]
pub(crate) fn upper_solve_into(u: &SparseMatrix, d: &[f64], b: &[f64], y: &mut [f64]) {
    for i in (0..b.len()).rev() {
        let (cols, vals) = u.row(i);
        let mut acc = b[i];
        for (&j, &v) in cols.iter().zip(vals) {
            acc -= v * y[j];
        }
        y[i] = acc / d[i];
    }
}

fn check_shapes(t: &SparseMatrix, d: &[f64], b: &[f64]) -> Result<()> {
    check_len(t.n(), d.len())?;
    check_len(t.n(), b.len())
}

pub(crate) fn check_diagonal(d: &[f64]) -> Result<()> {
    match d.iter().position(|&v| v == 0.0) {
        Some(row) => Err(Error::Breakdown { row, value: 0.0 }),
        None => Ok(()),
    }
}
