//! Compressed sparse row storage and the kernels built on it.
//!
//! [`SparseMatrix`] is square, immutable after construction, and keeps the
//! column indices of every row strictly ascending. It is used for the
//! coefficient matrix as well as for the strictly triangular factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a matrix is structurally and numerically symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Symmetric,
    General,
}

/// Square CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetry: Symmetry,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating every structural invariant.
    ///
    /// The symmetry flag is detected from the data (exact equality of mirrored entries).
    pub fn try_new(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        validate_csr(n, &row_ptr, &col_idx, &values)?;
        let mut m = Self {
            n,
            row_ptr,
            col_idx,
            values,
            symmetry: Symmetry::General,
        };
        m.symmetry = m.detect_symmetry();
        Ok(m)
    }

    /// Internal constructor for arrays already known to be valid CSR.
    pub(crate) fn from_parts(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
        symmetry: Symmetry,
    ) -> Self {
        debug_assert!(validate_csr(n, &row_ptr, &col_idx, &values).is_ok());
        Self {
            n,
            row_ptr,
            col_idx,
            values,
            symmetry,
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets in any order.
    /// Duplicate positions are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidStructure(format!(
                    "entry ({i}, {j}) out of bounds for n = {n}"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|&(j, _)| j);
            for &(j, v) in &scratch {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self::try_new(n, row_ptr, col_idx, values)
    }

    /// Builds a matrix from a dense row-major array, storing only nonzeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, &triplets)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts(
            n,
            (0..=n).collect(),
            (0..n).collect(),
            vec![1.0; n],
            Symmetry::Symmetric,
        )
    }

    /// An `n x n` matrix with no stored entries.
    pub fn zeros(n: usize) -> Self {
        Self::from_parts(
            n,
            vec![0; n + 1],
            Vec::new(),
            Vec::new(),
            Symmetry::Symmetric,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetry == Symmetry::Symmetric
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Position of `(i, j)` inside the value array, if stored.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        let (cols, _) = self.row(i);
        cols.binary_search(&j).ok().map(|k| start + k)
    }

    /// Stored value at `(i, j)`, zero when the position is not in the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Diagonal entries; missing diagonal positions read as zero.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// First row whose diagonal is absent or exactly zero.
    pub fn first_zero_diagonal(&self) -> Option<usize> {
        (0..self.n).find(|&i| self.get(i, i) == 0.0)
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x` into a caller-provided buffer.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_len(self.n, x.len())?;
        check_len(self.n, y.len())?;
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
        Ok(())
    }

    /// `A e` with `e` the all-ones vector.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Explicit transpose. Also serves as the CSC view of `self`.
    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut counts = vec![0usize; n + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                col_idx[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
        Self::from_parts(n, counts, col_idx, values, self.symmetry)
    }

    /// Strictly lower (`upper = false`) or strictly upper triangular part.
    pub fn strict_triangle(&self, upper: bool) -> Self {
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if (upper && j > i) || (!upper && j < i) {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self::from_parts(self.n, row_ptr, col_idx, values, Symmetry::General)
    }

    /// Same pattern, values mapped entrywise.
    pub fn map_values(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            values.extend(cols.iter().zip(vals).map(|(&j, &v)| f(i, j, v)));
        }
        let mut m = Self::from_parts(
            self.n,
            self.row_ptr.clone(),
            self.col_idx.clone(),
            values,
            Symmetry::General,
        );
        m.symmetry = m.detect_symmetry();
        m
    }

    /// Same pattern, every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= factor);
        m
    }

    /// Dense row-major copy. Intended for tests and small oracles.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        d
    }

    /// Largest `|a_ij - a_ji|` over all stored positions.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    fn detect_symmetry(&self) -> Symmetry {
        let t = self.transpose();
        if t.row_ptr == self.row_ptr && t.col_idx == self.col_idx && t.values == self.values {
            Symmetry::Symmetric
        } else {
            Symmetry::General
        }
    }
}

fn validate_csr(n: usize, row_ptr: &[usize], col_idx: &[usize], values: &[f64]) -> Result<()> {
    if row_ptr.len() != n + 1 {
        return Err(Error::InvalidStructure(format!(
            "row_ptr has length {}, expected {}",
            row_ptr.len(),
            n + 1
        )));
    }
    if row_ptr[0] != 0 || row_ptr[n] != col_idx.len() || col_idx.len() != values.len() {
        return Err(Error::InvalidStructure(
            "row_ptr endpoints disagree with col_idx/values lengths".into(),
        ));
    }
    for i in 0..n {
        if row_ptr[i] > row_ptr[i + 1] {
            return Err(Error::InvalidStructure(format!(
                "row_ptr decreases at row {i}"
            )));
        }
        let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
        if cols.iter().any(|&j| j >= n) {
            return Err(Error::InvalidStructure(format!(
                "column out of range in row {i}"
            )));
        }
        if cols.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStructure(format!(
                "columns not strictly ascending in row {i}"
            )));
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// `y = A x`.
pub fn matvec(a: &SparseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    a.matvec(x)
}

/// Right-hand side whose exact solution is the all-ones vector.
pub fn build_rhs_ones(a: &SparseMatrix) -> Vec<f64> {
    a.row_sums()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2_sq(a: &[f64]) -> f64 {
    dot(a, a)
}
