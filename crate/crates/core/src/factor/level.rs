use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

use super::{factorize_on_pattern, FactorTriple, Pattern};

const INF: usize = usize::MAX;

/// Level-of-fill ILU(p): symbolic level computation followed by numeric
/// factorization on `{(i, j) : lev_ij <= p}`.
pub fn level_ilu(a: &SparseMatrix, p: usize, max_nnz: usize) -> Result<FactorTriple> {
    let (pattern, _) = symbolic_levels(a, p, max_nnz)?;
    factorize_on_pattern(a, &pattern, 0.0)
}

/// Symbolic phase of ILU(p).
///
/// Levels start at 0 on the nonzeros of `a` and the diagonal, and are updated
/// as `lev_ij = min(lev_ij, lev_ik + lev_kj + 1)` in row-wise elimination order.
/// Positions whose final level exceeds `p` are discarded before later rows use
/// them. Returns the retained pattern and the level of each retained position
/// (aligned with the pattern's column order).
pub fn symbolic_levels(
    a: &SparseMatrix,
    p: usize,
    max_nnz: usize,
) -> Result<(Pattern, Vec<usize>)> {
    let n = a.n();
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut row_levels: Vec<Vec<usize>> = Vec::with_capacity(n);
    // upper part of each finished row, as (col, level)
    let mut upper: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
    let mut lev = vec![INF; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
    let mut total = 0usize;

    for i in 0..n {
        touched.clear();
        let (cols, _) = a.row(i);
        for &j in cols.iter().chain(std::iter::once(&i)) {
            if lev[j] == INF {
                lev[j] = 0;
                touched.push(j);
                if j < i {
                    heap.push(Reverse(j));
                }
            }
        }
        while let Some(Reverse(k)) = heap.pop() {
            let lik = lev[k];
            for &(j, lkj) in &upper[k] {
                let candidate = lik + lkj + 1;
                if candidate > p {
                    continue;
                }
                if lev[j] == INF {
                    lev[j] = candidate;
                    touched.push(j);
                    if j < i {
                        heap.push(Reverse(j));
                    }
                } else if candidate < lev[j] {
                    lev[j] = candidate;
                }
            }
        }
        touched.sort_unstable();
        total += touched.len();
        if total > max_nnz {
            return Err(Error::Resource(format!(
                "level-of-fill pattern exceeds {max_nnz} entries at row {i}"
            )));
        }
        let levels: Vec<usize> = touched.iter().map(|&j| lev[j]).collect();
        upper.push(
            touched
                .iter()
                .filter(|&&j| j > i)
                .map(|&j| (j, lev[j]))
                .collect(),
        );
        for &j in &touched {
            lev[j] = INF;
        }
        rows.push(touched.clone());
        row_levels.push(levels);
    }
    Ok((Pattern::from_rows(rows), row_levels.concat()))
}
