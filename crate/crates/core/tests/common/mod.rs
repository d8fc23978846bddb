//! Dense reference implementations used as independent oracles.
#![allow(dead_code)]

use a2ilu::SparseMatrix;
use rand::{Rng, SeedableRng};

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> rand::rngs::StdRng {
    rand::rngs::StdRng::seed_from_u64(seed)
}

pub fn zeros(n: usize) -> Dense {
    vec![vec![0.0; n]; n]
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut c = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k] != 0.0 {
                for j in 0..n {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    c
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|r| r.iter().zip(x).map(|(u, v)| u * v).sum())
        .collect()
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn norm_inf(a: &Dense) -> f64 {
    a.iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn sub(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

/// `(L + D) D^-1 (D + U)` formed densely from strict parts and diagonal.
pub fn ddu_product(l: &Dense, d: &[f64], u: &Dense) -> Dense {
    let n = d.len();
    let mut left = l.clone();
    let mut right = u.clone();
    for i in 0..n {
        left[i][i] = d[i];
        right[i][i] = d[i];
        for j in 0..n {
            right[i][j] /= d[i];
        }
    }
    matmul(&left, &right)
}

/// `(phi L + gamma D) (gamma D)^-1 (gamma D + phi U)` densely.
pub fn accelerated_product(l: &Dense, d: &[f64], u: &Dense, phi: f64, gamma: f64) -> Dense {
    let ls: Dense = l
        .iter()
        .map(|r| r.iter().map(|v| phi * v).collect())
        .collect();
    let us: Dense = u
        .iter()
        .map(|r| r.iter().map(|v| phi * v).collect())
        .collect();
    let ds: Vec<f64> = d.iter().map(|v| gamma * v).collect();
    ddu_product(&ls, &ds, &us)
}

/// Complete LU without pivoting in DDU form: returns strict L, D, strict U.
pub fn dense_lu(a: &Dense) -> (Dense, Vec<f64>, Dense) {
    let n = a.len();
    let mut w = a.clone();
    for k in 0..n {
        for i in k + 1..n {
            let mult = w[i][k] / w[k][k];
            for j in k + 1..n {
                w[i][j] -= mult * w[k][j];
            }
        }
    }
    // w now holds unscaled L (below), D, U; L entries were never divided
    split(&w)
}

fn split(w: &Dense) -> (Dense, Vec<f64>, Dense) {
    let n = w.len();
    let mut l = zeros(n);
    let mut u = zeros(n);
    let mut d = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if j < i {
                l[i][j] = w[i][j];
            } else if j > i {
                u[i][j] = w[i][j];
            } else {
                d[i] = w[i][i];
            }
        }
    }
    (l, d, u)
}

/// Dense MILU restricted to `pattern` (`pattern[i][j]` true where kept):
/// KIJ-ordered elimination where any update at a discarded position is
/// multiplied by `omega` and moved onto the diagonal of its row.
pub fn dense_milu(a: &Dense, pattern: &[Vec<bool>], omega: f64) -> (Dense, Vec<f64>, Dense) {
    let n = a.len();
    let mut w = a.clone();
    let mut dropped = vec![0.0; n];
    for i in 0..n {
        for k in 0..i {
            if !pattern[i][k] {
                continue;
            }
            let mult = w[i][k] / w[k][k];
            for j in k + 1..n {
                if !pattern[k][j] || w[k][j] == 0.0 {
                    continue;
                }
                let upd = mult * w[k][j];
                if pattern[i][j] {
                    w[i][j] -= upd;
                } else {
                    dropped[i] += upd;
                }
            }
        }
        w[i][i] -= omega * dropped[i];
    }
    let mut out = w;
    for i in 0..n {
        for j in 0..n {
            if !pattern[i][j] {
                out[i][j] = 0.0;
            }
        }
    }
    split(&out)
}

/// Fill levels by dense dynamic programming in row-wise elimination order.
/// Returns `Some(level)` where the level is `<= p`.
pub fn dense_levels(a: &Dense, p: usize) -> Vec<Vec<Option<usize>>> {
    let n = a.len();
    let mut lev: Vec<Vec<Option<usize>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if a[i][j] != 0.0 || i == j {
                        Some(0)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    for i in 0..n {
        for k in 0..i {
            let Some(lik) = lev[i][k] else { continue };
            for j in k + 1..n {
                if let Some(lkj) = lev[k][j] {
                    let cand = lik + lkj + 1;
                    lev[i][j] = Some(lev[i][j].map_or(cand, |v| v.min(cand)));
                }
            }
        }
        for j in 0..n {
            if lev[i][j].is_some_and(|v| v > p) {
                lev[i][j] = None;
            }
        }
    }
    lev
}

/// Dense Crout ILU with the same dropping rule as the sparse implementation:
/// drop `|x| < tol * ||row/col of A||_2`, then keep the `cap` largest.
pub fn dense_crout(a: &Dense, tol: f64, cap: usize) -> (Dense, Vec<f64>, Dense) {
    let n = a.len();
    let mut lmult = zeros(n); // unit-lower multipliers
    let mut l = zeros(n); // DDU values
    let mut u = zeros(n);
    let mut d = vec![0.0; n];
    let row_norm: Vec<f64> = (0..n)
        .map(|i| a[i].iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let col_norm: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| a[i][j] * a[i][j]).sum::<f64>().sqrt())
        .collect();
    for k in 0..n {
        let mut z = vec![0.0; n];
        for j in k..n {
            z[j] = a[k][j] - (0..k).map(|i| lmult[k][i] * u[i][j]).sum::<f64>();
        }
        let mut w = vec![0.0; n];
        for j in k + 1..n {
            w[j] = a[j][k] - (0..k).map(|i| u[i][k] * lmult[j][i]).sum::<f64>();
        }
        d[k] = z[k];
        let keep = |vals: Vec<(usize, f64)>, thr: f64| {
            let mut v: Vec<(usize, f64)> = vals
                .into_iter()
                .filter(|&(_, x)| x != 0.0 && x.abs() >= thr)
                .collect();
            v.sort_by(|x, y| {
                y.1.abs()
                    .partial_cmp(&x.1.abs())
                    .unwrap()
                    .then(x.0.cmp(&y.0))
            });
            v.truncate(cap);
            v
        };
        for (j, x) in keep((k + 1..n).map(|j| (j, z[j])).collect(), tol * row_norm[k]) {
            u[k][j] = x;
        }
        for (j, x) in keep((k + 1..n).map(|j| (j, w[j])).collect(), tol * col_norm[k]) {
            l[j][k] = x;
            lmult[j][k] = x / d[k];
        }
    }
    (l, d, u)
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().partial_cmp(&m[j][k].abs()).unwrap())
            .unwrap();
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (x[i] - s) / m[i][i];
    }
    x
}

/// Returns false if the Cholesky factorization meets a nonpositive pivot.
pub fn cholesky_succeeds(a: &Dense) -> bool {
    let n = a.len();
    let mut l = zeros(n);
    for j in 0..n {
        let s: f64 = (0..j).map(|k| l[j][k] * l[j][k]).sum();
        let piv = a[j][j] - s;
        if piv <= 0.0 {
            return false;
        }
        l[j][j] = piv.sqrt();
        for i in j + 1..n {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            l[i][j] = (a[i][j] - s) / l[j][j];
        }
    }
    true
}

/// 2D 5-point Laplacian on a `g x g` grid, lexicographic ordering.
pub fn laplacian_2d(g: usize) -> SparseMatrix {
    let n = g * g;
    let mut t = Vec::new();
    for y in 0..g {
        for x in 0..g {
            let i = x + g * y;
            t.push((i, i, 4.0));
            if x > 0 {
                t.push((i, i - 1, -1.0));
            }
            if x + 1 < g {
                t.push((i, i + 1, -1.0));
            }
            if y > 0 {
                t.push((i, i - g, -1.0));
            }
            if y + 1 < g {
                t.push((i, i + g, -1.0));
            }
        }
    }
    SparseMatrix::from_triplets(n, &t).unwrap()
}

pub fn tridiagonal() -> SparseMatrix {
    SparseMatrix::from_dense(&[
        vec![4.0, 1.0, 0.0],
        vec![1.0, 4.0, 1.0],
        vec![0.0, 1.0, 4.0],
    ])
    .unwrap()
}

/// Random sparse matrix with a dominant diagonal.
pub fn random_diag_dominant(n: usize, density: f64, seed: u64, symmetric: bool) -> SparseMatrix {
    let mut r = rng(seed);
    let mut d = zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && r.gen_bool(density) {
                let v = r.gen_range(-1.0..1.0);
                if symmetric {
                    if j > i {
                        d[i][j] = v;
                        d[j][i] = v;
                    }
                } else {
                    d[i][j] = v;
                }
            }
        }
    }
    for i in 0..n {
        let off: f64 = d[i].iter().map(|v| v.abs()).sum();
        d[i][i] = off + r.gen_range(0.5..1.5);
    }
    SparseMatrix::from_dense(&d).unwrap()
}

pub fn to_dense_strict(m: &SparseMatrix) -> Dense {
    m.to_dense()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
