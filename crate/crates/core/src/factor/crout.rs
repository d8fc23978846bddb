use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

use super::{check_pivot, csr_from_rows, FactorTriple, Pattern};

/// Crout-ordered ILU with dual dropping.
///
/// At step `k` the row `k` of `U` and the column `k` of `L` are computed from
/// the already finished rows of `U` and columns of `L`. Off-diagonal candidates
/// with magnitude below `tol` times the 2-norm of row `k` (for `U`) or column
/// `k` (for `L`) of `a` are dropped; of the survivors only the
/// `ceil(nnz(a) / (2n) * m)` largest in magnitude are kept. `tol = 0` with
/// `fill_ratio_m = None` gives the complete LU factorization.
pub fn crout_ilu(a: &SparseMatrix, tol: f64, fill_ratio_m: Option<f64>) -> Result<FactorTriple> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(
            "tol must be finite and nonnegative".into(),
        ));
    }
    let n = a.n();
    let cap = match fill_ratio_m {
        None => usize::MAX,
        Some(m) if m >= 1.0 => fill_cap(a.nnz(), n, m),
        Some(_) => {
            return Err(Error::InvalidArgument(
                "fill ratio m must be at least 1".into(),
            ))
        }
    };
    let at = a.transpose();
    let row_norm: Vec<f64> = (0..n).map(|i| l2(a.row(i).1)).collect();
    let col_norm: Vec<f64> = (0..n).map(|j| l2(at.row(j).1)).collect();

    let mut d = vec![0.0; n];
    // U by rows; also by columns for the L update. L is stored by columns with
    // unit-lower multipliers, plus by rows for the U update.
    let mut u_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut u_by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut l_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut l_by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    // DDU-form L values per row, filled as columns finish
    let mut l_ddu_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];

    let mut z = Accumulator::new(n);
    let mut w = Accumulator::new(n);

    for k in 0..n {
        // row k of U (columns >= k)
        let (cols, vals) = a.row(k);
        for (&j, &v) in cols.iter().zip(vals) {
            if j >= k {
                z.add(j, v);
            }
        }
        for &(i, lki) in &l_by_row[k] {
            let row = &u_rows[i];
            let start = row.partition_point(|&(j, _)| j < k);
            for &(j, uij) in &row[start..] {
                z.add(j, -lki * uij);
            }
        }
        // column k of L (rows > k)
        let (rows, vals) = at.row(k);
        for (&j, &v) in rows.iter().zip(vals) {
            if j > k {
                w.add(j, v);
            }
        }
        for &(i, uik) in &u_by_col[k] {
            let col = &l_cols[i];
            let start = col.partition_point(|&(j, _)| j <= k);
            for &(j, lji) in &col[start..] {
                w.add(j, -uik * lji);
            }
        }

        let pivot = z.get(k);
        check_pivot(k, pivot)?;
        d[k] = pivot;

        let urow = select(z.drain_except(k), tol * row_norm[k], cap);
        let lcol = select(w.drain_except(k), tol * col_norm[k], cap);

        for &(j, v) in &urow {
            u_by_col[j].push((k, v));
        }
        for &(j, v) in &lcol {
            let mult = v / pivot;
            l_by_row[j].push((k, mult));
            l_ddu_rows[j].push((k, v));
            l_cols[k].push((j, mult));
        }
        u_rows[k] = urow;
    }

    let l = csr_from_rows(n, &l_ddu_rows);
    let u = csr_from_rows(n, &u_rows);
    let rows = (0..n)
        .map(|i| {
            let mut r: Vec<usize> = l.row(i).0.to_vec();
            r.push(i);
            r.extend_from_slice(u.row(i).0);
            r
        })
        .collect();
    Ok(FactorTriple {
        l,
        d,
        u,
        pattern: Pattern::from_rows(rows),
    })
}

/// Per-column (of `L`) and per-row (of `U`) entry limit `ceil(nnz / (2n) * m)`.
pub fn fill_cap(nnz: usize, n: usize, m: f64) -> usize {
    if n == 0 {
        return 0;
    }
    (nnz as f64 / (2.0 * n as f64) * m).ceil() as usize
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Applies the tolerance and count rules; returns survivors sorted by index.
fn select(mut entries: Vec<(usize, f64)>, threshold: f64, cap: usize) -> Vec<(usize, f64)> {
    entries.retain(|&(_, v)| !(v.abs() < threshold));
    if entries.len() > cap {
        entries.sort_by(|x, y| y.1.abs().total_cmp(&x.1.abs()).then(x.0.cmp(&y.0)));
        entries.truncate(cap);
    }
    entries.sort_unstable_by_key(|&(j, _)| j);
    entries
}

/// Dense scatter buffer with a list of touched indices.
struct Accumulator {
    values: Vec<f64>,
    touched: Vec<usize>,
    present: Vec<bool>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
            touched: Vec::new(),
            present: vec![false; n],
        }
    }

    #[inline]
    fn add(&mut self, j: usize, v: f64) {
        if !self.present[j] {
            self.present[j] = true;
            self.touched.push(j);
        }
        self.values[j] += v;
    }

    fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// Empties the buffer, returning every touched entry except `skip`.
    fn drain_except(&mut self, skip: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.touched.len());
        for &j in &self.touched {
            if j != skip {
                out.push((j, self.values[j]));
            }
            self.values[j] = 0.0;
            self.present[j] = false;
        }
        self.touched.clear();
        out
    }
}
