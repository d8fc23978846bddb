//! Regenerates the Matrix Market fixtures under `tests/data/suite`.
//!
//! All matrices are symmetric discretizations of 2D/3D diffusion-type
//! operators with a nonzero diagonal, except `zero_diagonal.mtx`, which the
//! collection harness must skip.

use std::path::Path;

use a2ilu::mm::write_matrix_market;
use a2ilu::problems::{gen_helmholtz, gen_poisson_kappa};
use a2ilu::SparseMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// 2D five-point diffusion with per-cell coefficients and harmonic faces.
fn diffusion_2d(
    g: usize,
    kx: impl Fn(usize, usize) -> f64,
    ky: impl Fn(usize, usize) -> f64,
) -> SparseMatrix {
    let idx = |x: usize, y: usize| x + g * y;
    let face = |a: f64, b: f64| 2.0 * a * b / (a + b);
    let mut t = Vec::new();
    for y in 0..g {
        for x in 0..g {
            let i = idx(x, y);
            let mut diag = 0.0;
            let nbrs: [(isize, isize, bool); 4] =
                [(-1, 0, true), (1, 0, true), (0, -1, false), (0, 1, false)];
            for (dx, dy, horizontal) in nbrs {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                let inside = (0..g as isize).contains(&nx) && (0..g as isize).contains(&ny);
                let k: &dyn Fn(usize, usize) -> f64 = if horizontal { &kx } else { &ky };
                let c = if inside {
                    face(k(x, y), k(nx as usize, ny as usize))
                } else {
                    k(x, y)
                };
                diag += c;
                if inside {
                    t.push((i, idx(nx as usize, ny as usize), -c));
                }
            }
            t.push((i, i, diag));
        }
    }
    SparseMatrix::from_triplets(g * g, &t).unwrap()
}

/// Bilinear finite-element Laplacian on a uniform `g x g` interior grid.
fn fem_q1(g: usize) -> SparseMatrix {
    let mut t = Vec::new();
    for y in 0..g as isize {
        for x in 0..g as isize {
            let i = (x + g as isize * y) as usize;
            t.push((i, i, 8.0 / 3.0));
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx, dy) == (0, 0)
                        || !(0..g as isize).contains(&nx)
                        || !(0..g as isize).contains(&ny)
                    {
                        continue;
                    }
                    t.push((i, (nx + g as isize * ny) as usize, -1.0 / 3.0));
                }
            }
        }
    }
    SparseMatrix::from_triplets(g * g, &t).unwrap()
}

/// 27-point trilinear finite-element Laplacian on an `m^3` grid.
fn fem_q1_3d(m: usize) -> SparseMatrix {
    let mi = m as isize;
    let idx = |x: isize, y: isize, z: isize| (x + mi * (y + mi * z)) as usize;
    let mut t = Vec::new();
    for z in 0..mi {
        for y in 0..mi {
            for x in 0..mi {
                let i = idx(x, y, z);
                for dz in -1..=1isize {
                    for dy in -1..=1isize {
                        for dx in -1..=1isize {
                            let (nx, ny, nz) = (x + dx, y + dy, z + dz);
                            if ![nx, ny, nz].iter().all(|c| (0..mi).contains(c)) {
                                continue;
                            }
                            let v = match dx.abs() + dy.abs() + dz.abs() {
                                0 => 8.0 / 3.0,
                                1 => 0.0,
                                2 => -1.0 / 6.0,
                                _ => -1.0 / 12.0,
                            };
                            if v != 0.0 {
                                t.push((i, idx(nx, ny, nz), v));
                            }
                        }
                    }
                }
            }
        }
    }
    SparseMatrix::from_triplets(m * m * m, &t).unwrap()
}

/// Squared 2D Laplacian (biharmonic, 13-point stencil).
fn biharmonic(g: usize) -> SparseMatrix {
    let l = diffusion_2d(g, |_, _| 1.0, |_, _| 1.0).to_dense();
    let n = l.len();
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v: f64 = (0..n).map(|k| l[i][k] * l[k][j]).sum();
            if v != 0.0 {
                t.push((i, j, v));
            }
        }
    }
    SparseMatrix::from_triplets(n, &t).unwrap()
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/suite");
    std::fs::create_dir_all(&dir).unwrap();
    let mut rng = StdRng::seed_from_u64(2024);
    let field: Vec<f64> = (0..40 * 40)
        .map(|_| 10f64.powf(rng.gen_range(-2.0..2.0)))
        .collect();
    let checker = |x: usize, y: usize| if (x / 5 + y / 5) % 2 == 0 { 1e4 } else { 1.0 };

    let cases: Vec<(&str, SparseMatrix)> = vec![
        ("lap2d_30", diffusion_2d(30, |_, _| 1.0, |_, _| 1.0)),
        ("aniso2d_32", diffusion_2d(32, |_, _| 1.0, |_, _| 1e-2)),
        ("checker2d_30", diffusion_2d(30, checker, checker)),
        (
            "lognormal2d_40",
            diffusion_2d(40, |x, y| field[x + 40 * y], |x, y| field[x + 40 * y]),
        ),
        ("fem_q1_30", fem_q1(30)),
        ("fem_q1_3d_9", fem_q1_3d(9)),
        ("biharmonic_14", biharmonic(14)),
        ("poisson3d_jump_12", gen_poisson_kappa(12, 1e3).unwrap().0),
        (
            "poisson3d_jump_10_k1e5",
            gen_poisson_kappa(10, 1e5).unwrap().0,
        ),
        ("helmholtz3d_12_s25", gen_helmholtz(12, 25.0).unwrap().0),
        ("helmholtz3d_8_s300", gen_helmholtz(8, 300.0).unwrap().0),
    ];
    for (name, a) in &cases {
        assert!(a.is_symmetric(), "{name}");
        write_matrix_market(dir.join(format!("{name}.mtx")), a).unwrap();
        println!("{name}: n = {}, nnz = {}", a.n(), a.nnz());
    }

    // a saddle-point style block with an empty (2,2) block
    let mut t = vec![
        (0, 0, 2.0),
        (1, 1, 2.0),
        (0, 2, 1.0),
        (2, 0, 1.0),
        (1, 2, 1.0),
        (2, 1, 1.0),
    ];
    t.push((0, 1, -1.0));
    t.push((1, 0, -1.0));
    let saddle = SparseMatrix::from_triplets(3, &t).unwrap();
    write_matrix_market(dir.join("zero_diagonal.mtx"), &saddle).unwrap();
    println!("zero_diagonal: n = 3");
}
