//! Age-gap associations: Pearson correlation with two-sided Student-t
//! p-values, linear residualization on age, and the partial-correlation table.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Smallest reported p-value.
pub const P_FLOOR: f64 = 1e-300;
pub const SIGNIFICANCE: f64 = 0.05;

/// `predicted − chronological`, per subject.
pub fn age_gap(predictions: &[f64], true_ages: &[f64]) -> Result<Vec<f64>> {
    if predictions.len() != true_ages.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions vs {} ages",
            predictions.len(),
            true_ages.len()
        )));
    }
    Ok(predictions
        .iter()
        .zip(true_ages)
        .map(|(p, a)| p - a)
        .collect())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "pearson needs two equal-length vectors of length >= 2 ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::UndefinedCorrelation("constant input vector".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Two-sided p-value of a correlation `r` with `df` residual degrees of
/// freedom: `P(|T| >= |t|)` with `t = r·sqrt(df / (1 − r²))`, evaluated as
/// `I_{df/(df+t²)}(df/2, 1/2)`.
pub fn correlation_p_value(r: f64, df: f64) -> f64 {
    let r2 = r * r;
    if r2 >= 1.0 {
        return P_FLOOR;
    }
    // df / (df + t²) simplifies to 1 − r²
    let x = 1.0 - r2;
    beta_reg(df / 2.0, 0.5, x).clamp(P_FLOOR, 1.0)
}

/// Pearson `r` with its two-sided p-value; `df = n − 2 − df_reduction`.
pub fn pearson_with_p(x: &[f64], y: &[f64], df_reduction: usize) -> Result<(f64, f64)> {
    let n = x.len();
    if n < 3 + df_reduction {
        return Err(Error::InvalidArgument(format!(
            "need at least {} observations, got {n}",
            3 + df_reduction
        )));
    }
    let r = pearson(x, y)?;
    let df = (n - 2 - df_reduction) as f64;
    Ok((r, correlation_p_value(r, df)))
}

/// Residuals of the least-squares line of `v` on `covariate` (with intercept).
pub fn residualize(v: &[f64], covariate: &[f64]) -> Result<Vec<f64>> {
    if v.len() != covariate.len() || v.is_empty() {
        return Err(Error::InvalidArgument("residualize: length mismatch".into()));
    }
    let (mv, mc) = (mean(v), mean(covariate));
    let scc: f64 = covariate.iter().map(|c| (c - mc) * (c - mc)).sum();
    if scc <= 0.0 {
        return Err(Error::UndefinedCorrelation("constant covariate".into()));
    }
    let svc: f64 = v
        .iter()
        .zip(covariate)
        .map(|(a, c)| (a - mv) * (c - mc))
        .sum();
    let slope = svc / scc;
    Ok(v.iter()
        .zip(covariate)
        .map(|(a, c)| (a - mv) - slope * (c - mc))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationRow {
    pub marker: String,
    pub r: f64,
    pub p: f64,
    pub r_partial: f64,
    pub p_partial: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgeGapResult {
    pub rows: Vec<AssociationRow>,
    pub bonferroni_threshold: f64,
}

/// Raw and age-adjusted correlations of the age gap with each marker.
/// The partial correlation correlates the age residuals of both variables and
/// tests it with `n − 3` degrees of freedom.
pub fn age_gap_associations(
    gaps: &[f64],
    ages: &[f64],
    markers: &[(&str, &[f64])],
) -> Result<AgeGapResult> {
    let gap_resid = residualize(gaps, ages)?;
    let mut rows = Vec::with_capacity(markers.len());
    for (name, values) in markers {
        if values.len() != gaps.len() {
            return Err(Error::InvalidArgument(format!(
                "marker {name}: {} values for {} subjects",
                values.len(),
                gaps.len()
            )));
        }
        let (r, p) = pearson_with_p(gaps, values, 0)?;
        let marker_resid = residualize(values, ages)?;
        let (r_partial, p_partial) = pearson_with_p(&gap_resid, &marker_resid, 1)?;
        rows.push(AssociationRow {
            marker: name.to_string(),
            r,
            p,
            r_partial,
            p_partial,
            n: gaps.len(),
        });
    }
    let tests = markers.len().max(1) as f64;
    Ok(AgeGapResult {
        rows,
        bonferroni_threshold: SIGNIFICANCE / tests,
    })
}

pub fn write_associations_csv(path: impl AsRef<std::path::Path>, res: &AgeGapResult) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["marker", "r", "p", "r_partial", "p_partial", "n", "bonferroni_threshold"])?;
    for row in &res.rows {
        w.write_record([
            row.marker.clone(),
            row.r.to_string(),
            row.p.to_string(),
            row.r_partial.to_string(),
            row.p_partial.to_string(),
            row.n.to_string(),
            res.bonferroni_threshold.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
