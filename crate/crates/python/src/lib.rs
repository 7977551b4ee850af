//! Python bindings for `ppgbench_core`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use ppgbench_core::dataset::{self, DataDir};
use ppgbench_core::eval::{self, Cohort, FeatureConfig};
use ppgbench_core::features::{self, IbiSequence, HRV_COLUMNS};
use ppgbench_core::model;
use ppgbench_core::signal::{self, PeakParams, PeakSet, PpgSegment};
use ppgbench_core::stats;
use ppgbench_core::synth::{self, SynthSpec};
use ppgbench_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn segment(samples: Vec<f64>, fs_hz: f64) -> PyResult<PpgSegment> {
    PpgSegment::new(samples, fs_hz).map_err(to_py)
}

fn feature_map(f: &features::HrvFeatures) -> BTreeMap<String, f64> {
    HRV_COLUMNS
        .iter()
        .zip(f.to_array())
        .map(|((name, _), v)| (name.to_string(), v))
        .collect()
}

/// Fourier resampling to `target_len` samples.
#[pyfunction]
fn resample_fourier(samples: Vec<f64>, target_len: usize) -> PyResult<Vec<f64>> {
    signal::resample_samples(&samples, target_len).map_err(to_py)
}

/// Per-segment z-score (population SD).
#[pyfunction]
#[pyo3(signature = (samples, fs_hz = 125.0))]
fn zscore(samples: Vec<f64>, fs_hz: f64) -> PyResult<Vec<f64>> {
    Ok(signal::zscore(&segment(samples, fs_hz)?)
        .map_err(to_py)?
        .into_samples())
}

/// Systolic peaks of an already z-scored segment: `(indices, prominences)`.
#[pyfunction]
#[pyo3(signature = (samples, fs_hz, min_distance_s = 0.4, min_prominence = 0.1))]
fn detect_systolic_peaks(
    samples: Vec<f64>,
    fs_hz: f64,
    min_distance_s: f64,
    min_prominence: f64,
) -> PyResult<(Vec<usize>, Vec<f64>)> {
    let p = signal::detect_systolic_peaks(
        &segment(samples, fs_hz)?,
        PeakParams {
            min_distance_s,
            min_prominence,
        },
    );
    Ok((p.indices, p.prominences))
}

/// Averaged 100-sample beat template: `(template, n_beats_averaged)`.
#[pyfunction]
fn extract_beat_template(samples: Vec<f64>, fs_hz: f64, peaks: Vec<usize>) -> PyResult<(Vec<f64>, usize)> {
    let n = peaks.len();
    let peaks = PeakSet {
        indices: peaks,
        prominences: vec![0.0; n],
    };
    let t = signal::extract_beat_template(&segment(samples, fs_hz)?, &peaks).map_err(to_py)?;
    Ok((t.samples, t.n_beats_averaged))
}

/// The seven HR/HRV features of an IBI sequence (seconds).
#[pyfunction]
fn hrv_features(ibis_s: Vec<f64>, n_peaks: usize) -> PyResult<BTreeMap<String, f64>> {
    let f = features::hrv_features(&IbiSequence { intervals_s: ibis_s }, n_peaks).map_err(to_py)?;
    Ok(feature_map(&f))
}

/// Full segment path (z-score, peaks, IBIs, features). `None` if the segment
/// is dropped.
#[pyfunction]
fn segment_features(samples: Vec<f64>, fs_hz: f64) -> PyResult<Option<BTreeMap<String, f64>>> {
    Ok(features::segment_features(&segment(samples, fs_hz)?, PeakParams::default())
        .ok()
        .map(|f| feature_map(&f)))
}

/// Ridge regression with standardization and leave-one-out alpha selection.
#[pyclass(name = "RidgeModel", frozen)]
struct PyRidgeModel {
    inner: model::RidgeModel,
}

#[pymethods]
impl PyRidgeModel {
    #[staticmethod]
    #[pyo3(signature = (x, y, alphas = None))]
    fn fit(x: Vec<Vec<f64>>, y: Vec<f64>, alphas: Option<Vec<f64>>) -> PyResult<Self> {
        let m = model::rows_to_matrix(&x).map_err(to_py)?;
        let grid = alphas.unwrap_or_else(|| model::ALPHA_GRID.to_vec());
        let inner = model::ridge_fit_cv(&m, &y, &grid).map_err(to_py)?;
        Ok(PyRidgeModel { inner })
    }

    fn predict(&self, x: Vec<Vec<f64>>) -> Vec<f64> {
        x.iter().map(|r| self.inner.predict_row(r)).collect()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn intercept(&self) -> f64 {
        self.inner.intercept
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients.clone()
    }

    #[getter]
    fn loo_mse(&self) -> Vec<(f64, f64)> {
        self.inner.loo_mse_per_alpha.clone()
    }
}

/// Leave-one-out residuals of a ridge fit at a fixed alpha.
#[pyfunction]
fn loo_residuals(x: Vec<Vec<f64>>, y: Vec<f64>, alpha: f64) -> PyResult<Vec<f64>> {
    let m = model::rows_to_matrix(&x).map_err(to_py)?;
    model::loo_residuals(&m, &y, alpha).map_err(to_py)
}

/// Pearson r and two-sided p with `df = n - 2 - df_reduction`.
#[pyfunction]
#[pyo3(signature = (x, y, df_reduction = 0))]
fn pearson_with_p(x: Vec<f64>, y: Vec<f64>, df_reduction: usize) -> PyResult<(f64, f64)> {
    stats::pearson_with_p(&x, &y, df_reduction).map_err(to_py)
}

#[pyfunction]
fn residualize(v: Vec<f64>, covariate: Vec<f64>) -> PyResult<Vec<f64>> {
    stats::residualize(&v, &covariate).map_err(to_py)
}

type AssociationRow = (String, f64, f64, f64, f64, usize);

/// Rows of `(marker, r, p, r_partial, p_partial, n)` plus the Bonferroni threshold.
#[pyfunction]
fn age_gap_associations(
    gaps: Vec<f64>,
    ages: Vec<f64>,
    markers: BTreeMap<String, Vec<f64>>,
) -> PyResult<(Vec<AssociationRow>, f64)> {
    let named: Vec<(&str, &[f64])> = markers
        .iter()
        .map(|(k, v)| (k.as_str(), v.as_slice()))
        .collect();
    let res = stats::age_gap_associations(&gaps, &ages, &named).map_err(to_py)?;
    Ok((
        res.rows
            .into_iter()
            .map(|r| (r.marker, r.r, r.p, r.r_partial, r.p_partial, r.n))
            .collect(),
        res.bonferroni_threshold,
    ))
}

/// Write a synthetic population to `out`; returns the subject ids.
#[pyfunction]
#[pyo3(signature = (out, n_subjects = 200, seed = 7))]
fn synth_population(py: Python<'_>, out: PathBuf, n_subjects: usize, seed: u64) -> PyResult<Vec<String>> {
    let spec = SynthSpec {
        n_subjects,
        seed,
        ..SynthSpec::default()
    };
    let recs = py
        .detach(|| synth::synth_population(&spec, &DataDir::new(out)))
        .map_err(to_py)?;
    Ok(recs.into_iter().map(|r| r.subject_id).collect())
}

/// `(subject_id, fs_hz, segments)` from a PPGS file.
#[pyfunction]
fn read_segment_store(path: PathBuf) -> PyResult<(String, f32, Vec<Vec<f32>>)> {
    let s = dataset::read_segment_store(path).map_err(to_py)?;
    Ok((s.subject_id, s.fs_hz, s.segments))
}

#[pyfunction]
fn write_segment_store(path: PathBuf, subject_id: String, fs_hz: f32, segments: Vec<Vec<f32>>) -> PyResult<()> {
    let store = dataset::SegmentStore {
        subject_id,
        fs_hz,
        segments,
    };
    dataset::write_segment_store(&store, path).map_err(to_py)
}

/// `(subject_id, model_name, dim, vectors)` from a PPGE file.
#[pyfunction]
fn read_embedding_store(path: PathBuf) -> PyResult<(String, String, usize, Vec<Vec<f32>>)> {
    let e = dataset::read_embedding_store(path).map_err(to_py)?;
    Ok((e.subject_id, e.model_name, e.dim, e.vectors))
}

#[pyfunction]
fn write_embedding_store(
    path: PathBuf,
    subject_id: String,
    model_name: String,
    vectors: Vec<Vec<f32>>,
) -> PyResult<()> {
    let dim = vectors.first().map_or(0, Vec::len);
    let store = dataset::EmbeddingStore {
        subject_id,
        model_name,
        dim,
        vectors,
    };
    dataset::write_embedding_store(&store, path).map_err(to_py)
}

/// Cross-validated evaluation report.
#[pyclass(name = "EvalReport", frozen)]
struct PyEvalReport {
    inner: eval::EvalReport,
}

#[pymethods]
impl PyEvalReport {
    #[getter]
    fn config(&self) -> String {
        self.inner.config.clone()
    }

    #[getter]
    fn n_subjects(&self) -> usize {
        self.inner.n_subjects
    }

    #[getter]
    fn mae(&self) -> f64 {
        self.inner.mae
    }

    #[getter]
    fn r2(&self) -> f64 {
        self.inner.r2
    }

    #[getter]
    fn pearson_r(&self) -> Option<f64> {
        self.inner.pearson_r
    }

    #[getter]
    fn fold_maes(&self) -> Vec<f64> {
        self.inner.fold_maes.clone()
    }

    #[getter]
    fn fold_mae_sd(&self) -> f64 {
        self.inner.fold_mae_sd
    }

    /// `(subject_id, age, predicted_age)` per subject.
    #[getter]
    fn predictions(&self) -> Vec<(String, f64, f64)> {
        self.inner
            .predictions
            .iter()
            .map(|p| (p.subject_id.clone(), p.age_years, p.predicted_age_years))
            .collect()
    }

    /// `(age_group, n, mae)` rows.
    #[getter]
    fn decades(&self) -> Vec<(String, usize, f64)> {
        self.inner
            .decades
            .rows
            .iter()
            .map(|r| (r.label.clone(), r.n, r.mae))
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "EvalReport(config={:?}, n_subjects={}, mae={:.3}, r2={:.3})",
            self.inner.config, self.inner.n_subjects, self.inner.mae, self.inner.r2
        )
    }
}

/// k-fold subject-stratified evaluation of a feature configuration on a data directory.
#[pyfunction]
#[pyo3(signature = (data, config, embeddings = None, folds = 5))]
fn evaluate(
    py: Python<'_>,
    data: PathBuf,
    config: &str,
    embeddings: Option<String>,
    folds: usize,
) -> PyResult<PyEvalReport> {
    let cfg = FeatureConfig::new(config.parse().map_err(to_py)?, embeddings).map_err(to_py)?;
    let inner = py
        .detach(|| {
            let models: Vec<String> = cfg.embedding_model.iter().cloned().collect();
            let cohort = Cohort::load(&DataDir::new(data), &models, PeakParams::default())?;
            eval::run_cv(&cfg, &cohort, folds)
        })
        .map_err(to_py)?;
    Ok(PyEvalReport { inner })
}

#[pymodule]
fn ppgbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(resample_fourier, m)?)?;
    m.add_function(wrap_pyfunction!(zscore, m)?)?;
    m.add_function(wrap_pyfunction!(detect_systolic_peaks, m)?)?;
    m.add_function(wrap_pyfunction!(extract_beat_template, m)?)?;
    m.add_function(wrap_pyfunction!(hrv_features, m)?)?;
    m.add_function(wrap_pyfunction!(segment_features, m)?)?;
    m.add_function(wrap_pyfunction!(loo_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(pearson_with_p, m)?)?;
    m.add_function(wrap_pyfunction!(residualize, m)?)?;
    m.add_function(wrap_pyfunction!(age_gap_associations, m)?)?;
    m.add_function(wrap_pyfunction!(synth_population, m)?)?;
    m.add_function(wrap_pyfunction!(read_segment_store, m)?)?;
    m.add_function(wrap_pyfunction!(write_segment_store, m)?)?;
    m.add_function(wrap_pyfunction!(read_embedding_store, m)?)?;
    m.add_function(wrap_pyfunction!(write_embedding_store, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_class::<PyRidgeModel>()?;
    m.add_class::<PyEvalReport>()?;
    m.add("HRV_COLUMNS", HRV_COLUMNS.iter().map(|(n, _)| *n).collect::<Vec<_>>())?;
    Ok(())
}
