//! 7-point finite-volume discretizations on the unit cube.
//!
//! The grid has `m` interior lattice points per axis at `x_i = (i + 1) h`,
//! `h = 1 / (m + 1)`, with zero Dirichlet values on the boundary eliminated.
//! Unknowns are ordered lexicographically with `x` fastest:
//! `index(i, j, k) = i + m * (j + m * k)`.
//!
//! Each lattice point owns a cubic control volume of side `h`. A face between
//! two points carries the conductance `kappa_face * h^2 / h`, where
//! `kappa_face` is the harmonic mean of the two point values; faces on the
//! boundary use the boundary point's coefficient in the same mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{build_rhs_ones, SparseMatrix};

/// Upper bound on generated unknowns (`m^3`).
pub const MAX_UNKNOWNS: usize = 64_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// `-div(kappa grad u) = x + y + z` with `kappa = contrast` on
    /// `[1/4, 3/4]^3` and 1 elsewhere.
    PoissonJump {
        m: usize,
        #[serde(default = "default_contrast")]
        contrast: f64,
    },
    /// `-lap u - shift u`, right-hand side `A e`.
    Helmholtz { m: usize, shift: f64 },
    /// `-lap u + v . grad u` with first-order upwinding, right-hand side `A e`.
    AdvectionDiffusion { m: usize, velocity: [f64; 3] },
}

fn default_contrast() -> f64 {
    1e3
}

impl ProblemSpec {
    pub fn m(&self) -> usize {
        match *self {
            ProblemSpec::PoissonJump { m, .. }
            | ProblemSpec::Helmholtz { m, .. }
            | ProblemSpec::AdvectionDiffusion { m, .. } => m,
        }
    }

    pub fn generate(&self) -> Result<(SparseMatrix, Vec<f64>)> {
        match *self {
            ProblemSpec::PoissonJump { m, contrast } => gen_poisson_kappa(m, contrast),
            ProblemSpec::Helmholtz { m, shift } => gen_helmholtz(m, shift),
            ProblemSpec::AdvectionDiffusion { m, velocity } => gen_advection_diffusion(m, velocity),
        }
    }

    /// Short identifier, e.g. `poisson_jump_m40`.
    pub fn id(&self) -> String {
        match *self {
            ProblemSpec::PoissonJump { m, contrast } if contrast == 1e3 => {
                format!("poisson_jump_m{m}")
            }
            ProblemSpec::PoissonJump { m, contrast } => format!("poisson_jump_m{m}_k{contrast}"),
            ProblemSpec::Helmholtz { m, shift } => format!("helmholtz_m{m}_s{shift}"),
            ProblemSpec::AdvectionDiffusion { m, velocity } => {
                format!(
                    "advection_diffusion_m{m}_v{}_{}_{}",
                    velocity[0], velocity[1], velocity[2]
                )
            }
        }
    }
}

/// Lexicographic grid index, `x` fastest.
#[inline]
pub fn grid_index(m: usize, i: usize, j: usize, k: usize) -> usize {
    i + m * (j + m * k)
}

/// Coefficient of the jump problem at a point.
pub fn kappa_jump(x: f64, y: f64, z: f64, contrast: f64) -> f64 {
    let inside = |c: f64| (0.25..=0.75).contains(&c);
    if inside(x) && inside(y) && inside(z) {
        contrast
    } else {
        1.0
    }
}

fn check_size(m: usize) -> Result<usize> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid size m = {m} must be at least 2"
        )));
    }
    match m.checked_pow(3) {
        Some(n) if n <= MAX_UNKNOWNS => Ok(n),
        _ => Err(Error::Resource(format!(
            "grid size m = {m} exceeds the {MAX_UNKNOWNS}-unknown budget"
        ))),
    }
}

const NEIGHBORS: [(isize, isize, isize); 6] = [
    (0, 0, -1),
    (0, -1, 0),
    (-1, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
];

/// Assembles the diffusion operator for a pointwise coefficient. Rows come
/// out with ascending columns because the neighbor order above is sorted by
/// index offset.
fn diffusion(m: usize, kappa: impl Fn(f64, f64, f64) -> f64) -> Result<SparseMatrix> {
    let n = check_size(m)?;
    let h = 1.0 / (m as f64 + 1.0);
    let coord = |i: isize| (i as f64 + 1.0) * h;
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(7 * n);
    let mut values = Vec::with_capacity(7 * n);
    row_ptr.push(0);
    let mi = m as isize;
    for k in 0..mi {
        for j in 0..mi {
            for i in 0..mi {
                let kp = kappa(coord(i), coord(j), coord(k));
                let mut diag = 0.0;
                let mut entries: [(usize, f64); 6] = [(0, 0.0); 6];
                let mut count = 0;
                for &(di, dj, dk) in &NEIGHBORS {
                    let (ni, nj, nk) = (i + di, j + dj, k + dk);
                    let kq = kappa(coord(ni), coord(nj), coord(nk));
                    let face = 2.0 * kp * kq / (kp + kq) * h;
                    diag += face;
                    let interior =
                        (0..mi).contains(&ni) && (0..mi).contains(&nj) && (0..mi).contains(&nk);
                    if interior {
                        entries[count] =
                            (grid_index(m, ni as usize, nj as usize, nk as usize), -face);
                        count += 1;
                    }
                }
                let me = grid_index(m, i as usize, j as usize, k as usize);
                let split = entries[..count].partition_point(|&(c, _)| c < me);
                for &(c, v) in &entries[..split] {
                    col_idx.push(c);
                    values.push(v);
                }
                col_idx.push(me);
                values.push(diag);
                for &(c, v) in &entries[split..count] {
                    col_idx.push(c);
                    values.push(v);
                }
                row_ptr.push(col_idx.len());
            }
        }
    }
    SparseMatrix::try_new(n, row_ptr, col_idx, values)
}

/// Jump-coefficient Poisson problem with `kappa = 1e3` inside `[1/4, 3/4]^3`.
pub fn gen_poisson_jump(m: usize) -> Result<(SparseMatrix, Vec<f64>)> {
    gen_poisson_kappa(m, 1e3)
}

/// Jump-coefficient Poisson problem with a configurable contrast.
/// `contrast = 1` gives the constant-coefficient Laplacian.
pub fn gen_poisson_kappa(m: usize, contrast: f64) -> Result<(SparseMatrix, Vec<f64>)> {
    if !(contrast > 0.0 && contrast.is_finite()) {
        return Err(Error::InvalidArgument(
            "kappa contrast must be positive".into(),
        ));
    }
    let a = diffusion(m, |x, y, z| kappa_jump(x, y, z, contrast))?;
    let h = 1.0 / (m as f64 + 1.0);
    let vol = h * h * h;
    let mut rhs = Vec::with_capacity(a.n());
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                let (x, y, z) = ((i + 1) as f64 * h, (j + 1) as f64 * h, (k + 1) as f64 * h);
                rhs.push((x + y + z) * vol);
            }
        }
    }
    Ok((a, rhs))
}

/// Laplacian minus `shift * h^3` on the diagonal (the volume-integrated
/// shift term), right-hand side `A e`.
pub fn gen_helmholtz(m: usize, shift: f64) -> Result<(SparseMatrix, Vec<f64>)> {
    if !shift.is_finite() {
        return Err(Error::InvalidArgument("shift must be finite".into()));
    }
    let lap = diffusion(m, |_, _, _| 1.0)?;
    let h = 1.0 / (m as f64 + 1.0);
    let vol = h * h * h;
    let a = lap.map_values(|i, j, v| if i == j { v - shift * vol } else { v });
    let rhs = build_rhs_ones(&a);
    Ok((a, rhs))
}

/// Unit diffusion plus first-order upwind advection with constant velocity.
///
/// The convective flux through each face is `(v . n) h^2` times the upwind
/// value, which makes interior row sums of the advection part vanish.
pub fn gen_advection_diffusion(m: usize, velocity: [f64; 3]) -> Result<(SparseMatrix, Vec<f64>)> {
    if velocity.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("velocity must be finite".into()));
    }
    let lap = diffusion(m, |_, _, _| 1.0)?;
    let h = 1.0 / (m as f64 + 1.0);
    let area = h * h;
    let a = lap.map_values(|row, col, v| v + advection_entry(m, row, col, velocity, area));
    let rhs = build_rhs_ones(&a);
    Ok((a, rhs))
}

/// Upwind advection coefficient at `(row, col)` for a 7-point stencil position.
fn advection_entry(m: usize, row: usize, col: usize, vel: [f64; 3], area: f64) -> f64 {
    if row == col {
        // outflow through all six faces
        return vel.iter().map(|v| v.abs()).sum::<f64>() * area;
    }
    let diff = col as isize - row as isize;
    let strides = [1isize, m as isize, (m * m) as isize];
    for (axis, &s) in strides.iter().enumerate() {
        let v = vel[axis];
        if diff == -s && v > 0.0 {
            return -v * area;
        }
        if diff == s && v < 0.0 {
            return v * area;
        }
    }
    0.0
}
