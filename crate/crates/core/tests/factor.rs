mod common;

use a2ilu::factor::{
    crout_ilu, factorize, fill_cap, ilu0, level_ilu, milu0, shifted_ilu0, symbolic_levels,
    FactorTriple, Pattern, DEFAULT_MAX_FILL_NNZ,
};
use a2ilu::problems::gen_poisson_kappa;
use a2ilu::{diagonal_scale, Error, FactorizationConfig, SparseMatrix};
use common::*;

fn bitwise_equal(a: &FactorTriple, b: &FactorTriple) -> bool {
    a.l == b.l
        && a.u == b.u
        && a.d.len() == b.d.len()
        && a.d
            .iter()
            .zip(&b.d)
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

fn remainder(a: &SparseMatrix, f: &FactorTriple) -> Dense {
    sub(
        &a.to_dense(),
        &ddu_product(&f.l.to_dense(), &f.d, &f.u.to_dense()),
    )
}

fn assert_pattern_is_matrix_pattern(a: &SparseMatrix, f: &FactorTriple) {
    assert_eq!(f.pattern, Pattern::of_matrix(a));
    for i in 0..a.n() {
        let mut cols: Vec<usize> = f.l.row(i).0.to_vec();
        cols.push(i);
        cols.extend_from_slice(f.u.row(i).0);
        assert_eq!(cols, Pattern::of_matrix(a).row(i), "row {i}");
    }
}

#[test]
fn ilu0_tridiagonal_is_exact_lu() {
    let a = tridiagonal();
    let f = ilu0(&a).unwrap();
    let (l, d, u) = dense_lu(&a.to_dense());
    for i in 0..3 {
        assert!(rel_close(f.d[i], d[i], 1e-15));
    }
    assert!((f.d[2] - 3.733_333_333_333_333).abs() < 1e-14);
    assert_eq!(f.l.get(1, 0), 1.0);
    assert_eq!(f.l.get(2, 1), 1.0);
    assert_eq!(f.u.get(0, 1), 1.0);
    assert_eq!(f.u.get(1, 2), 1.0);
    assert_eq!(f.l.to_dense(), l);
    assert_eq!(f.u.to_dense(), u);
    assert!(max_abs(&remainder(&a, &f)) < 1e-14);
}

#[test]
fn ilu0_identity() {
    let f = ilu0(&SparseMatrix::identity(5)).unwrap();
    assert_eq!(f.l.nnz(), 0);
    assert_eq!(f.u.nnz(), 0);
    assert_eq!(f.d, vec![1.0; 5]);
}

#[test]
fn ilu0_laplacian_remainder_only_at_fill() {
    let a = laplacian_2d(4);
    let f = ilu0(&a).unwrap();
    assert_pattern_is_matrix_pattern(&a, &f);
    let r = remainder(&a, &f);
    let mut fill_seen = false;
    for i in 0..16 {
        for j in 0..16 {
            if f.pattern.contains(i, j) {
                assert!(r[i][j].abs() < 1e-13, "({i},{j}) = {}", r[i][j]);
            } else if r[i][j].abs() > 1e-13 {
                fill_seen = true;
            }
        }
    }
    assert!(fill_seen);
}

#[test]
fn no_fill_equivalence_on_bidiagonal_structures() {
    let mut r = rng(21);
    for n in [5, 12, 30] {
        // tridiagonal, lower bidiagonal, upper bidiagonal
        for kind in 0..3 {
            let mut t = Vec::new();
            for i in 0..n {
                t.push((i, i, 3.0 + rand::Rng::gen_range(&mut r, 0.0..1.0)));
                if i + 1 < n {
                    if kind != 1 {
                        t.push((i, i + 1, rand::Rng::gen_range(&mut r, -1.0..1.0)));
                    }
                    if kind != 2 {
                        t.push((i + 1, i, rand::Rng::gen_range(&mut r, -1.0..1.0)));
                    }
                }
            }
            let a = SparseMatrix::from_triplets(n, &t).unwrap();
            let f = ilu0(&a).unwrap();
            let err = max_abs(&remainder(&a, &f));
            assert!(err <= 1e-12 * a.max_abs(), "n={n} kind={kind} err={err}");
        }
    }
}

#[test]
fn shifted_alpha_zero_is_ilu0() {
    for a in [laplacian_2d(5), random_diag_dominant(40, 0.1, 3, false)] {
        assert!(bitwise_equal(
            &shifted_ilu0(&a, 0.0).unwrap(),
            &ilu0(&a).unwrap()
        ));
    }
}

#[test]
fn shifted_unit_diagonal_adds_identity() {
    let (a, _) = diagonal_scale(&laplacian_2d(4)).unwrap();
    let shifted = a.map_values(|i, j, v| if i == j { v + 0.5 } else { v });
    assert!(bitwise_equal(
        &shifted_ilu0(&a, 0.5).unwrap(),
        &ilu0(&shifted).unwrap()
    ));
}

#[test]
fn shifted_two_by_two() {
    let a = SparseMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 4.0]]).unwrap();
    let f = shifted_ilu0(&a, 0.25).unwrap();
    // ilu0 of [[5,1],[1,5]]: d = (5, 5 - 1/5)
    assert_eq!(f.d[0], 5.0);
    assert!((f.d[1] - 4.8).abs() < 1e-15);
}

#[test]
fn milu_omega_zero_is_ilu0() {
    for a in [laplacian_2d(6), random_diag_dominant(50, 0.08, 9, false)] {
        assert!(bitwise_equal(&milu0(&a, 0.0).unwrap(), &ilu0(&a).unwrap()));
    }
}

#[test]
fn milu_matches_dense_oracle() {
    let a = laplacian_2d(3);
    let pat: Vec<Vec<bool>> = (0..9)
        .map(|i| {
            (0..9)
                .map(|j| Pattern::of_matrix(&a).contains(i, j))
                .collect()
        })
        .collect();
    for omega in [0.5, 1.0, -0.3] {
        let f = milu0(&a, omega).unwrap();
        let (l, d, u) = dense_milu(&a.to_dense(), &pat, omega);
        for i in 0..9 {
            assert!(
                rel_close(f.d[i], d[i], 1e-12),
                "omega {omega} row {i}: {} vs {}",
                f.d[i],
                d[i]
            );
        }
        assert!(max_abs(&sub(&f.l.to_dense(), &l)) < 1e-12);
        assert!(max_abs(&sub(&f.u.to_dense(), &u)) < 1e-12);
    }
}

#[test]
fn milu_row_sum_identity() {
    let (p, _) = gen_poisson_kappa(8, 1e3).unwrap();
    let (a, _) = diagonal_scale(&p).unwrap();
    let fixtures = vec![a, laplacian_2d(7), random_diag_dominant(60, 0.06, 4, false)];
    for a in fixtures {
        let f = milu0(&a, 1.0).unwrap();
        let ones = vec![1.0; a.n()];
        let ae = a.matvec(&ones).unwrap();
        let me = f.apply_m(&ones).unwrap();
        let worst = ae
            .iter()
            .zip(&me)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(worst <= 1e-10 * a.norm_inf(), "worst {worst}");
    }
}

#[test]
fn level_zero_is_ilu0() {
    for a in [laplacian_2d(6), random_diag_dominant(50, 0.08, 5, false)] {
        let lev = level_ilu(&a, 0, DEFAULT_MAX_FILL_NNZ).unwrap();
        assert!(bitwise_equal(&lev, &ilu0(&a).unwrap()));
    }
}

#[test]
fn level_full_is_complete_lu() {
    for seed in 0..5 {
        let a = random_diag_dominant(10, 0.3, seed, seed % 2 == 0);
        let f = level_ilu(&a, 10, DEFAULT_MAX_FILL_NNZ).unwrap();
        let err = norm_inf(&remainder(&a, &f));
        assert!(err <= 1e-11 * a.norm_inf(), "seed {seed}: {err}");
    }
}

#[test]
fn level_pattern_matches_dense_levels() {
    for (a, p) in [
        (laplacian_2d(5), 1),
        (laplacian_2d(5), 2),
        (random_diag_dominant(30, 0.08, 2, false), 1),
        (random_diag_dominant(30, 0.08, 2, false), 3),
    ] {
        let (pattern, levels) = symbolic_levels(&a, p, DEFAULT_MAX_FILL_NNZ).unwrap();
        let oracle = dense_levels(&a.to_dense(), p);
        let mut k = 0;
        for i in 0..a.n() {
            let expected: Vec<usize> = (0..a.n()).filter(|&j| oracle[i][j].is_some()).collect();
            assert_eq!(pattern.row(i), expected.as_slice(), "p={p} row {i}");
            for &j in pattern.row(i) {
                assert_eq!(Some(levels[k]), oracle[i][j]);
                k += 1;
            }
        }
    }
    let a = laplacian_2d(5);
    let (p1, _) = symbolic_levels(&a, 1, DEFAULT_MAX_FILL_NNZ).unwrap();
    assert!(p1.nnz() > Pattern::of_matrix(&a).nnz());
}

#[test]
fn level_budget_exceeded() {
    let a = laplacian_2d(10);
    assert!(matches!(level_ilu(&a, 5, 200), Err(Error::Resource(_))));
}

#[test]
fn crout_complete_when_no_dropping() {
    for seed in 0..4 {
        let a = random_diag_dominant(15, 0.25, 100 + seed, seed % 2 == 1);
        let f = crout_ilu(&a, 0.0, None).unwrap();
        let err = norm_inf(&remainder(&a, &f));
        assert!(err <= 1e-10 * a.norm_inf(), "seed {seed}: {err}");
    }
}

#[test]
fn crout_drop_everything() {
    let a = laplacian_2d(5);
    let f = crout_ilu(&a, 1.0, None).unwrap();
    assert_eq!(f.l.nnz(), 0);
    assert_eq!(f.u.nnz(), 0);
    assert_eq!(f.d, a.diagonal());
}

#[test]
fn crout_matches_dense_oracle_with_dropping() {
    let a = laplacian_2d(6);
    let n = a.n();
    let cap = fill_cap(a.nnz(), n, 5.0);
    assert_eq!(
        cap,
        (a.nnz() as f64 / (2.0 * n as f64) * 5.0).ceil() as usize
    );
    for (tol, m) in [
        (0.01, Some(5.0)),
        (0.01, Some(1.0)),
        (0.1, Some(2.0)),
        (0.001, None),
    ] {
        let f = crout_ilu(&a, tol, m).unwrap();
        let cap = m.map_or(usize::MAX, |m| fill_cap(a.nnz(), n, m));
        let (l, d, u) = dense_crout(&a.to_dense(), tol, cap);
        for i in 0..n {
            assert!(rel_close(f.d[i], d[i], 1e-12));
        }
        assert!(
            max_abs(&sub(&f.l.to_dense(), &l)) < 1e-12,
            "tol {tol} m {m:?}"
        );
        assert!(
            max_abs(&sub(&f.u.to_dense(), &u)) < 1e-12,
            "tol {tol} m {m:?}"
        );
        let lt = f.l.transpose();
        for k in 0..n {
            assert!(lt.row(k).0.len() <= cap);
            assert!(f.u.row(k).0.len() <= cap);
        }
    }
}

#[test]
fn spd_fixtures_give_positive_pivots() {
    let (p, _) = gen_poisson_kappa(6, 1e3).unwrap();
    let (scaled, _) = diagonal_scale(&p).unwrap();
    let fixtures = [
        laplacian_2d(6),
        random_diag_dominant(40, 0.1, 8, true),
        scaled,
    ];
    let configs = [
        FactorizationConfig::ilu0(),
        FactorizationConfig::shifted(0.2),
        FactorizationConfig::milu(0.9),
        FactorizationConfig::level(2),
        FactorizationConfig::crout(0.01, Some(5.0)),
        FactorizationConfig::crout(0.0, None),
    ];
    for a in &fixtures {
        for cfg in &configs {
            let f = factorize(a, cfg).unwrap();
            assert!(f.d.iter().all(|&v| v > 0.0), "{:?}", cfg.variant);
        }
    }
}

#[test]
fn breakdown_reports_row() {
    let a = SparseMatrix::from_dense(&[
        vec![1.0, 1.0, 0.0],
        vec![1.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ])
    .unwrap();
    assert!(matches!(ilu0(&a), Err(Error::Breakdown { row: 1, .. })));
    assert!(matches!(
        crout_ilu(&a, 0.0, None),
        Err(Error::Breakdown { row: 1, .. })
    ));
    let missing = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert!(matches!(
        ilu0(&missing),
        Err(Error::Breakdown { row: 0, .. })
    ));
}

#[test]
fn config_validation() {
    let a = laplacian_2d(3);
    let mut cfg = FactorizationConfig::crout(-1.0, None);
    assert!(factorize(&a, &cfg).is_err());
    cfg = FactorizationConfig::crout(0.1, Some(0.5));
    assert!(factorize(&a, &cfg).is_err());
    cfg = FactorizationConfig::shifted(f64::NAN);
    assert!(factorize(&a, &cfg).is_err());
}
