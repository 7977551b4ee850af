//! Independent reference implementations used by the integration tests.
//! None of these call into the library's numerical code.
#![allow(dead_code)]

pub mod frozen;

use std::f64::consts::PI;

use ppgbench_core::dataset::{Sex, SubjectRecord};
use rand::Rng;

/// Fourier resampling by explicit O(n²) DFT, with the truncate/zero-pad and
/// Nyquist conventions spelled out bin by bin.
pub fn dft_resample(x: &[f64], num: usize) -> Vec<f64> {
    let nx = x.len();
    let dft: Vec<(f64, f64)> = (0..nx)
        .map(|k| {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (n, &v)| {
                let a = -2.0 * PI * (k * n % nx) as f64 / nx as f64;
                (re + v * a.cos(), im + v * a.sin())
            })
        })
        .collect();
    let n = nx.min(num);
    let nyq = n / 2 + 1;
    let mut y = vec![(0.0, 0.0); num];
    y[..nyq].copy_from_slice(&dft[..nyq]);
    if n > 2 {
        let tail = n - nyq;
        for i in 0..tail {
            y[num - tail + i] = dft[nx - tail + i];
        }
    }
    if n.is_multiple_of(2) {
        let h = n / 2;
        if num < nx {
            let (a, b) = (y[num - h], dft[nx - h]);
            y[num - h] = (a.0 + b.0, a.1 + b.1);
        } else if nx < num {
            let half = (y[h].0 * 0.5, y[h].1 * 0.5);
            y[h] = half;
            y[num - h] = half;
        }
    }
    (0..num)
        .map(|t| {
            let re: f64 = y
                .iter()
                .enumerate()
                .map(|(k, &(yr, yi))| {
                    let a = 2.0 * PI * (k * t % num) as f64 / num as f64;
                    yr * a.cos() - yi * a.sin()
                })
                .sum();
            re / nx as f64
        })
        .collect()
}

/// Interior local maxima; a flat top counts once at its leftmost sample.
pub fn brute_local_maxima(x: &[f64]) -> Vec<usize> {
    let n = x.len();
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if x[i] <= x[i - 1] {
            continue;
        }
        match (i + 1..n).find(|&j| x[j] != x[i]) {
            Some(j) if x[j] < x[i] => out.push(i),
            _ => {}
        }
    }
    out
}

/// Topographic prominence by exhaustive search on each side.
pub fn brute_prominence(x: &[f64], p: usize) -> f64 {
    let h = x[p];
    let left_start = x[..p].iter().rposition(|&v| v > h).map_or(0, |j| j + 1);
    let right_end = x[p + 1..].iter().position(|&v| v > h).map_or(x.len(), |j| p + 1 + j);
    let left_min = x[left_start..=p].iter().copied().fold(f64::INFINITY, f64::min);
    let right_min = x[p..right_end].iter().copied().fold(f64::INFINITY, f64::min);
    h - left_min.max(right_min)
}

/// Greedy distance thinning by (height desc, index asc), quadratic scan.
pub fn brute_thin(x: &[f64], cands: &[usize], distance: usize) -> Vec<usize> {
    let mut order = cands.to_vec();
    order.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap().then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for c in order {
        if kept.iter().all(|&k| k.abs_diff(c) >= distance) {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    kept
}

/// Full peak pipeline: maxima, distance thinning, then prominence filter.
pub fn brute_peaks(x: &[f64], fs: f64, min_distance_s: f64, min_prom: f64) -> Vec<usize> {
    let distance = ((min_distance_s * fs).round() as usize).max(1);
    brute_thin(x, &brute_local_maxima(x), distance)
        .into_iter()
        .filter(|&p| brute_prominence(x, p) >= min_prom)
        .collect()
}

/// Straight-line HRV features, in column order.
pub fn hrv_oracle(ibi: &[f64]) -> [f64; 7] {
    let n = ibi.len() as f64;
    let mut hr = Vec::new();
    for v in ibi {
        hr.push(60.0 / v);
    }
    let mut hr_sum = 0.0;
    for v in &hr {
        hr_sum += v;
    }
    let hr_mean = hr_sum / n;
    let mut hr_ss = 0.0;
    let mut hr_max = hr[0];
    let mut hr_min = hr[0];
    for v in &hr {
        hr_ss += (v - hr_mean).powi(2);
        hr_max = hr_max.max(*v);
        hr_min = hr_min.min(*v);
    }
    let mut ibi_sum = 0.0;
    for v in ibi {
        ibi_sum += v;
    }
    let ibi_mean = ibi_sum / n;
    let mut ibi_ss = 0.0;
    for v in ibi {
        ibi_ss += (v - ibi_mean).powi(2);
    }
    let mut sq = 0.0;
    let mut nn50 = 0.0;
    for i in 1..ibi.len() {
        let d = ibi[i] - ibi[i - 1];
        sq += d * d;
        if d.abs() > 0.05 {
            nn50 += 1.0;
        }
    }
    let m = (ibi.len() - 1) as f64;
    [
        hr_mean,
        (hr_ss / n).sqrt(),
        hr_max - hr_min,
        ibi_mean,
        (ibi_ss / n).sqrt(),
        (sq / m).sqrt(),
        nn50 / m,
    ]
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())
            .unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            let (top, bottom) = a.split_at_mut(r);
            for (dst, src) in bottom[0][c..].iter_mut().zip(&top[c][c..]) {
                *dst -= f * src;
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Column means and population SDs.
pub fn column_stats(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as f64;
    let p = x[0].len();
    let mut means = vec![0.0; p];
    for row in x {
        for j in 0..p {
            means[j] += row[j] / n;
        }
    }
    let mut sds = vec![0.0; p];
    for row in x {
        for j in 0..p {
            sds[j] += (row[j] - means[j]).powi(2) / n;
        }
    }
    (means, sds.into_iter().map(f64::sqrt).collect())
}

pub fn standardize(x: &[Vec<f64>], means: &[f64], sds: &[f64]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|r| r.iter().enumerate().map(|(j, v)| (v - means[j]) / sds[j]).collect())
        .collect()
}

/// Penalized least squares on `[1, z]` with penalty `alpha` on every column
/// but the intercept. Returns `(intercept, beta)`.
pub fn ridge_normal_equations(z: &[Vec<f64>], y: &[f64], alpha: f64) -> (f64, Vec<f64>) {
    let p = z[0].len() + 1;
    let mut a = vec![vec![0.0; p]; p];
    let mut b = vec![0.0; p];
    for (row, &t) in z.iter().zip(y) {
        let aug: Vec<f64> = std::iter::once(1.0).chain(row.iter().copied()).collect();
        for i in 0..p {
            b[i] += aug[i] * t;
            for j in 0..p {
                a[i][j] += aug[i] * aug[j];
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate().skip(1) {
        row[i] += alpha;
    }
    let sol = gauss_solve(a, b);
    (sol[0], sol[1..].to_vec())
}

/// Leave-one-out residuals by `n` explicit refits on the fixed standardized
/// matrix `z`.
pub fn loo_by_refit(z: &[Vec<f64>], y: &[f64], alpha: f64) -> Vec<f64> {
    (0..y.len())
        .map(|i| {
            let zi: Vec<Vec<f64>> = z.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, r)| r.clone()).collect();
            let yi: Vec<f64> = y.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, v)| *v).collect();
            let (b0, beta) = ridge_normal_equations(&zi, &yi, alpha);
            let pred = b0 + z[i].iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
            y[i] - pred
        })
        .collect()
}

fn corr(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Partial correlation of x and y given z, closed form.
pub fn partial_closed_form(x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    let (rxy, rxz, ryz) = (corr(x, y), corr(x, z), corr(y, z));
    (rxy - rxz * ryz) / ((1.0 - rxz * rxz) * (1.0 - ryz * ryz)).sqrt()
}

pub fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    corr(x, y)
}

pub fn random_record<R: Rng>(rng: &mut R, id: String) -> SubjectRecord {
    SubjectRecord {
        segment_file: format!("segments/{id}.ppgs"),
        subject_id: id,
        age_years: rng.random_range(18.0..95.0),
        sex: if rng.random_bool(0.5) { Sex::M } else { Sex::F },
        height_cm: rng.random_range(150.0..195.0),
        weight_kg: rng.random_range(45.0..120.0),
        bmi_kg_m2: rng.random_range(17.0..40.0),
        sbp_mmhg: rng.random_range(90.0..180.0),
        dbp_mmhg: rng.random_range(50.0..110.0),
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// In-memory cohort. `signal` scales how strongly hr_mean and the first
/// embedding coordinate track age (0 = pure noise).
pub fn feature_cohort(seed: u64, n_subjects: usize, n_segments: usize, signal: f64) -> ppgbench_core::eval::Cohort {
    use ppgbench_core::eval::{Cohort, SubjectData};
    use ppgbench_core::features::HrvFeatures;
    use rand::SeedableRng;
    use rand_distr::StandardNormal;
    let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut subjects = Vec::with_capacity(n_subjects);
    for i in 0..n_subjects {
        let rec = random_record(&mut rng, format!("C{i:04}"));
        let age = rec.age_years;
        let mut hrv = Vec::new();
        let mut emb = Vec::new();
        for _ in 0..n_segments {
            let z: f64 = rng.sample(StandardNormal);
            let hr = 75.0 - signal * 0.3 * (age - 55.0) + 4.0 * z;
            hrv.push(Ok(HrvFeatures {
                hr_mean_bpm: hr,
                hr_std_bpm: rng.random_range(1.0..6.0),
                hr_range_bpm: rng.random_range(3.0..20.0),
                ibi_mean_s: 60.0 / hr,
                sdnn_s: rng.random_range(0.01..0.1),
                rmssd_s: rng.random_range(0.01..0.1),
                pnn50_fraction: rng.random_range(0.0..1.0),
            }));
            let z: f64 = rng.sample(StandardNormal);
            let mut v = vec![signal * (age - 55.0) / 20.0 + 0.5 * z];
            for _ in 0..3 {
                v.push(rng.sample(StandardNormal));
            }
            emb.push(v);
        }
        let mut embeddings = std::collections::BTreeMap::new();
        embeddings.insert("e".to_string(), emb);
        subjects.push(SubjectData {
            record: rec,
            segment_hrv: hrv,
            embeddings,
        });
    }
    Cohort::new(subjects)
}
