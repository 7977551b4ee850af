mod common;

use common::*;
use nalgebra::DMatrix;
use ppgbench_core::model::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

fn problem(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|j| rng.random_range(-3.0..3.0) * (j + 1) as f64 + j as f64).collect())
        .collect();
    let w: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y = x
        .iter()
        .map(|r| 5.0 + r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + rng.random_range(-1.0..1.0))
        .collect();
    (x, y)
}

#[test]
fn coefficients_match_normal_equations() {
    for seed in 0..30 {
        let n = 5 + (seed as usize * 7) % 60;
        let p = 1 + (seed as usize) % 8;
        let (x, y) = problem(seed, n, p);
        let alpha = ALPHA_GRID[seed as usize % ALPHA_GRID.len()];
        let m = ridge_fit(&rows_to_matrix(&x).unwrap(), &y, alpha).unwrap();
        let (means, sds) = column_stats(&x);
        let (b0, beta) = ridge_normal_equations(&standardize(&x, &means, &sds), &y, alpha);
        assert!(rel_close(m.intercept, b0, 1e-8));
        for (a, b) in m.coefficients.iter().zip(&beta) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-8), "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn loo_residuals_match_explicit_refits() {
    for seed in 0..20 {
        let n = 6 + seed as usize;
        let (x, y) = problem(100 + seed, n, 3);
        let alpha = [0.1, 1.0, 10.0][seed as usize % 3];
        let got = loo_residuals(&rows_to_matrix(&x).unwrap(), &y, alpha).unwrap();
        let (means, sds) = column_stats(&x);
        let want = loo_by_refit(&standardize(&x, &means, &sds), &y, alpha);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}

#[test]
fn constant_column_gets_zero_coefficient() {
    let (mut x, y) = problem(3, 30, 3);
    for r in &mut x {
        r.insert(1, 4.0);
    }
    let m = ridge_fit_cv(&rows_to_matrix(&x).unwrap(), &y, &ALPHA_GRID).unwrap();
    assert_eq!(m.coefficients[1], 0.0);
    assert!(m.standardizer.constant[1]);
    assert_eq!(m.standardizer.stds[1], 1.0);
}

#[test]
fn alpha_selection_picks_grid_minimum() {
    let (x, y) = problem(9, 40, 5);
    let xm = rows_to_matrix(&x).unwrap();
    let sel = select_alpha_loo(&xm, &y, &ALPHA_GRID).unwrap();
    let (means, sds) = column_stats(&x);
    let z = standardize(&x, &means, &sds);
    let mses: Vec<f64> = ALPHA_GRID
        .iter()
        .map(|&a| loo_by_refit(&z, &y, a).iter().map(|e| e * e).sum::<f64>() / y.len() as f64)
        .collect();
    let best = mses
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert_eq!(sel.alpha, ALPHA_GRID[best]);
}

#[test]
fn standardizer_moments() {
    let (x, _) = problem(11, 50, 4);
    let xm = rows_to_matrix(&x).unwrap();
    let s = Standardizer::fit(&xm);
    let z = s.transform(&xm);
    for col in z.column_iter() {
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 1e-9 && (sd - 1.0).abs() < 1e-9);
    }
    let back = s.inverse_transform(&z);
    assert!((back - xm).abs().max() < 1e-9);
}

#[test]
fn exact_linear_target_small_alpha() {
    let x: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, ((i * 7) % 11) as f64]).collect();
    let y: Vec<f64> = x.iter().map(|r| 3.0 * r[0] - 2.0 * r[1] + 1.0).collect();
    let m = ridge_fit(&rows_to_matrix(&x).unwrap(), &y, 1e-6).unwrap();
    for (r, t) in x.iter().zip(&y) {
        assert!((m.predict_row(r) - t).abs() < 1e-4);
    }
}

proptest! {
    #[test]
    fn predictions_invariant_to_affine_feature_rescaling(
        seed in 0u64..1000,
        scale in prop::collection::vec(prop_oneof![-20.0f64..-0.05, 0.05f64..20.0], 3),
        shift in prop::collection::vec(-100.0f64..100.0, 3),
    ) {
        let (x, y) = problem(seed, 25, 3);
        let x2: Vec<Vec<f64>> = x.iter().map(|r| r.iter().enumerate().map(|(j, v)| v * scale[j] + shift[j]).collect()).collect();
        let a = ridge_fit(&rows_to_matrix(&x).unwrap(), &y, 1.0).unwrap();
        let b = ridge_fit(&rows_to_matrix(&x2).unwrap(), &y, 1.0).unwrap();
        for (r1, r2) in x.iter().zip(&x2) {
            prop_assert!((a.predict_row(r1) - b.predict_row(r2)).abs() < 1e-8);
        }
    }

    #[test]
    fn matrix_and_row_prediction_agree(seed in 0u64..1000) {
        let (x, y) = problem(seed, 20, 4);
        let xm: DMatrix<f64> = rows_to_matrix(&x).unwrap();
        let m = ridge_fit_cv(&xm, &y, &ALPHA_GRID).unwrap();
        for (p, r) in m.predict(&xm).iter().zip(&x) {
            prop_assert!((p - m.predict_row(r)).abs() < 1e-9);
        }
    }
}
