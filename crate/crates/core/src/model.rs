//! Feature standardization, closed-form ridge regression with leave-one-out
//! alpha selection, and the predict-the-mean baseline.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regularization grid searched by [`select_alpha_loo`].
pub const ALPHA_GRID: [f64; 6] = [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0];

/// Leverages this close to 1 make the leave-one-out shortcut meaningless.
const LEVERAGE_EPS: f64 = 1e-12;

/// Build a dense row-major design matrix from feature rows.
pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidArgument("ragged feature rows".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn check_finite(x: &DMatrix<f64>, y: &[f64]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} targets",
            x.nrows(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite input".into()));
    }
    Ok(())
}

/// Column-wise z-scoring with the population standard deviation. Columns with
/// no spread keep `std = 1` and are flagged constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> Self {
        let n = x.nrows() as f64;
        let mut means = Vec::with_capacity(x.ncols());
        let mut stds = Vec::with_capacity(x.ncols());
        let mut constant = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            let flat = !(sd > 1e-12 * mean.abs().max(1.0));
            means.push(mean);
            stds.push(if flat { 1.0 } else { sd });
            constant.push(flat);
        }
        Standardizer {
            means,
            stds,
            constant,
        }
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            (x[(i, j)] - self.means[j]) / self.stds[j]
        })
    }

    pub fn inverse_transform(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(z.nrows(), z.ncols(), |i, j| {
            z[(i, j)] * self.stds[j] + self.means[j]
        })
    }

    fn active_columns(&self) -> Vec<usize> {
        (0..self.constant.len()).filter(|&j| !self.constant[j]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub standardizer: Standardizer,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub alpha: f64,
    /// `(alpha, mean squared LOO error)` in grid order; empty for a direct fit.
    pub loo_mse_per_alpha: Vec<(f64, f64)>,
}

impl RidgeModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let s = &self.standardizer;
        self.intercept
            + row
                .iter()
                .enumerate()
                .map(|(j, v)| self.coefficients[j] * (v - s.means[j]) / s.stds[j])
                .sum::<f64>()
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<f64> {
        let z = self.standardizer.transform(x);
        let beta = DVector::from_column_slice(&self.coefficients);
        (z * beta).iter().map(|v| v + self.intercept).collect()
    }
}

/// Thin SVD of the standardized, non-constant columns, shared by every alpha.
struct Decomposition {
    standardizer: Standardizer,
    active: Vec<usize>,
    ncols: usize,
    y_mean: f64,
    y_centered: DVector<f64>,
    u: DMatrix<f64>,
    singular: DVector<f64>,
    v_t: DMatrix<f64>,
    /// Uᵀ(y − ȳ)
    uty: DVector<f64>,
}

impl Decomposition {
    fn new(x: &DMatrix<f64>, y: &[f64]) -> Result<Self> {
        check_finite(x, y)?;
        let n = x.nrows();
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "ridge needs at least 2 rows, got {n}"
            )));
        }
        let standardizer = Standardizer::fit(x);
        let active = standardizer.active_columns();
        let z = standardizer.transform(x).select_columns(&active);
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let y_centered = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
        let (u, singular, v_t) = if active.is_empty() {
            (
                DMatrix::zeros(n, 0),
                DVector::zeros(0),
                DMatrix::zeros(0, 0),
            )
        } else {
            let svd = z.svd(true, true);
            (
                svd.u.expect("U requested"),
                svd.singular_values,
                svd.v_t.expect("V^T requested"),
            )
        };
        let uty = u.tr_mul(&y_centered);
        Ok(Decomposition {
            standardizer,
            active,
            ncols: x.ncols(),
            y_mean,
            y_centered,
            u,
            singular,
            v_t,
            uty,
        })
    }

    fn coefficients(&self, alpha: f64) -> Vec<f64> {
        let shrunk = DVector::from_fn(self.singular.len(), |j, _| {
            let s = self.singular[j];
            s / (s * s + alpha) * self.uty[j]
        });
        let beta_active = self.v_t.tr_mul(&shrunk);
        let mut beta = vec![0.0; self.ncols];
        for (k, &j) in self.active.iter().enumerate() {
            beta[j] = beta_active[k];
        }
        beta
    }

    /// Leave-one-out residuals via `e_i = (y_i − ŷ_i) / (1 − h_ii)`.
    fn loo_residuals(&self, alpha: f64) -> Result<Vec<f64>> {
        let n = self.y_centered.len();
        let shrink = DVector::from_fn(self.singular.len(), |j, _| {
            let s2 = self.singular[j] * self.singular[j];
            s2 / (s2 + alpha)
        });
        let fitted_c = &self.u * shrink.component_mul(&self.uty);
        let inv_n = 1.0 / n as f64;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let h = inv_n
                + self
                    .u
                    .row(i)
                    .iter()
                    .zip(shrink.iter())
                    .map(|(uij, sh)| uij * uij * sh)
                    .sum::<f64>();
            if 1.0 - h <= LEVERAGE_EPS {
                return Err(Error::DegenerateLeverage {
                    row: i,
                    leverage: h,
                    alpha,
                });
            }
            out.push((self.y_centered[i] - fitted_c[i]) / (1.0 - h));
        }
        Ok(out)
    }

    fn model(&self, alpha: f64, loo_mse_per_alpha: Vec<(f64, f64)>) -> RidgeModel {
        RidgeModel {
            standardizer: self.standardizer.clone(),
            coefficients: self.coefficients(alpha),
            intercept: self.y_mean,
            alpha,
            loo_mse_per_alpha,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )))
    }
}

/// Ridge fit at a fixed `alpha`: standardize columns, centre `y`, and solve
/// `(ZᵀZ + αI)β = Zᵀ(y − ȳ)`. The intercept is `ȳ` and is never penalized.
pub fn ridge_fit(x: &DMatrix<f64>, y: &[f64], alpha: f64) -> Result<RidgeModel> {
    check_alpha(alpha)?;
    Ok(Decomposition::new(x, y)?.model(alpha, Vec::new()))
}

/// Leave-one-out residuals of a ridge fit at `alpha`, holding the
/// standardization of the full matrix fixed.
pub fn loo_residuals(x: &DMatrix<f64>, y: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    Decomposition::new(x, y)?.loo_residuals(alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSelection {
    pub alpha: f64,
    pub loo_mse_per_alpha: Vec<(f64, f64)>,
}

fn select_from(dec: &Decomposition, grid: &[f64]) -> Result<AlphaSelection> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty alpha grid".into()));
    }
    let mut scores = Vec::with_capacity(grid.len());
    for &alpha in grid {
        check_alpha(alpha)?;
        let r = dec.loo_residuals(alpha)?;
        let mse = r.iter().map(|e| e * e).sum::<f64>() / r.len() as f64;
        scores.push((alpha, mse));
    }
    let mut best = scores[0];
    for &(alpha, mse) in &scores[1..] {
        if mse < best.1 || (mse == best.1 && alpha < best.0) {
            best = (alpha, mse);
        }
    }
    Ok(AlphaSelection {
        alpha: best.0,
        loo_mse_per_alpha: scores,
    })
}

/// Pick the alpha with the smallest mean squared leave-one-out error
/// (ties go to the smaller alpha).
pub fn select_alpha_loo(x: &DMatrix<f64>, y: &[f64], grid: &[f64]) -> Result<AlphaSelection> {
    if x.nrows() < 3 {
        return Err(Error::InvalidArgument(format!(
            "alpha selection needs at least 3 rows, got {}",
            x.nrows()
        )));
    }
    select_from(&Decomposition::new(x, y)?, grid)
}

/// Alpha selection followed by the final fit, sharing one decomposition.
pub fn ridge_fit_cv(x: &DMatrix<f64>, y: &[f64], grid: &[f64]) -> Result<RidgeModel> {
    if x.nrows() < 3 {
        return Err(Error::InvalidArgument(format!(
            "alpha selection needs at least 3 rows, got {}",
            x.nrows()
        )));
    }
    let dec = Decomposition::new(x, y)?;
    let sel = select_from(&dec, grid)?;
    Ok(dec.model(sel.alpha, sel.loo_mse_per_alpha))
}

/// Predicts the training mean for every input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub mean: f64,
}

impl Baseline {
    pub fn fit(y: &[f64]) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidArgument("baseline needs at least one target".into()));
        }
        Ok(Baseline {
            mean: y.iter().sum::<f64>() / y.len() as f64,
        })
    }

    pub fn predict(&self) -> f64 {
        self.mean
    }
}
