use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, Symmetry};

use super::{check_pivot, FactorTriple, Pattern};

/// ILU(0): factorization restricted to the pattern of `a` (plus diagonal).
pub fn ilu0(a: &SparseMatrix) -> Result<FactorTriple> {
    factorize_on_pattern(a, &Pattern::of_matrix(a), 0.0)
}

/// ILU(0) of `a + alpha * diag(a)`.
///
/// The factors approximate the shifted matrix; solvers still iterate on `a`.
pub fn shifted_ilu0(a: &SparseMatrix, alpha: f64) -> Result<FactorTriple> {
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument("alpha must be finite".into()));
    }
    let shifted = a.map_values(|i, j, v| if i == j { v + alpha * v } else { v });
    factorize_on_pattern(&shifted, &Pattern::of_matrix(a), 0.0)
}

/// MILU(0): every update that would land outside the pattern is scaled by
/// `omega` and subtracted from the diagonal of its row. `omega = 1` preserves
/// row sums, `(A - M) e = 0`.
pub fn milu0(a: &SparseMatrix, omega: f64) -> Result<FactorTriple> {
    if !omega.is_finite() {
        return Err(Error::InvalidArgument("omega must be finite".into()));
    }
    factorize_on_pattern(a, &Pattern::of_matrix(a), omega)
}

/// Row-wise (IKJ) incomplete factorization on a prescribed pattern.
///
/// `pattern` must contain every stored position of `a`. Updates to positions
/// outside the pattern are dropped, with `omega` times their sum moved onto
/// the diagonal. With `omega = 0` this is plain pattern-restricted ILU.
pub fn factorize_on_pattern(
    a: &SparseMatrix,
    pattern: &Pattern,
    omega: f64,
) -> Result<FactorTriple> {
    let n = a.n();
    if pattern.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: pattern.n(),
        });
    }

    let mut l_ptr = Vec::with_capacity(n + 1);
    let mut l_cols = Vec::new();
    let mut l_vals = Vec::new();
    let mut u_ptr = Vec::with_capacity(n + 1);
    let mut u_cols = Vec::new();
    let mut u_vals = Vec::new();
    l_ptr.push(0);
    u_ptr.push(0);
    let mut d = vec![0.0; n];

    // w holds the working row; in_row[j] == i marks pattern membership for row i
    let mut w = vec![0.0; n];
    let mut in_row = vec![usize::MAX; n];

    for i in 0..n {
        let prow = pattern.row(i);
        for &j in prow {
            in_row[j] = i;
        }
        let (acols, avals) = a.row(i);
        for (&j, &v) in acols.iter().zip(avals) {
            if in_row[j] != i {
                return Err(Error::InvalidStructure(format!(
                    "entry ({i}, {j}) of the matrix is outside the factorization pattern"
                )));
            }
            w[j] = v;
        }

        let mut dropped = 0.0;
        let diag_pos = prow.partition_point(|&j| j < i);
        for &k in &prow[..diag_pos] {
            let mult = w[k] / d[k];
            for idx in u_ptr[k]..u_ptr[k + 1] {
                let j = u_cols[idx];
                let update = mult * u_vals[idx];
                if in_row[j] == i {
                    w[j] -= update;
                } else {
                    dropped += update;
                }
            }
        }

        let pivot = if omega != 0.0 {
            w[i] - omega * dropped
        } else {
            w[i]
        };
        check_pivot(i, pivot)?;
        d[i] = pivot;

        for &k in &prow[..diag_pos] {
            l_cols.push(k);
            l_vals.push(w[k]);
        }
        for &j in &prow[diag_pos + 1..] {
            u_cols.push(j);
            u_vals.push(w[j]);
        }
        l_ptr.push(l_cols.len());
        u_ptr.push(u_cols.len());
        for &j in prow {
            w[j] = 0.0;
        }
    }

    Ok(FactorTriple {
        l: SparseMatrix::from_parts(n, l_ptr, l_cols, l_vals, Symmetry::General),
        d,
        u: SparseMatrix::from_parts(n, u_ptr, u_cols, u_vals, Symmetry::General),
        pattern: pattern.clone(),
    })
}
