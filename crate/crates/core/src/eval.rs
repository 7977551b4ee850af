//! Subject-stratified cross-validation over the feature configurations,
//! subject-level aggregation and metrics, decade breakdown, learning curves
//! and zero-shot evaluation of external predictions.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    read_embedding_store, read_segment_store, DataDir, ExternalPredictions, SubjectRecord,
    DEMOGRAPHIC_COLUMNS,
};
use crate::error::{Error, Result};
use crate::features::{segment_features, DropReason, HrvFeatures, HRV_COLUMNS};
use crate::model::{ridge_fit_cv, rows_to_matrix, Baseline, ALPHA_GRID};
use crate::signal::PeakParams;
use crate::stats::pearson;

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigName {
    Baseline,
    HrOnly,
    HrHrv,
    DemogOnly,
    SexOnly,
    HrHrvDemog,
    PpgOnly,
    PpgDemog,
}

impl ConfigName {
    pub const ALL: [ConfigName; 8] = [
        ConfigName::Baseline,
        ConfigName::HrOnly,
        ConfigName::HrHrv,
        ConfigName::DemogOnly,
        ConfigName::SexOnly,
        ConfigName::HrHrvDemog,
        ConfigName::PpgOnly,
        ConfigName::PpgDemog,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConfigName::Baseline => "baseline",
            ConfigName::HrOnly => "hr_only",
            ConfigName::HrHrv => "hr_hrv",
            ConfigName::DemogOnly => "demog_only",
            ConfigName::SexOnly => "sex_only",
            ConfigName::HrHrvDemog => "hr_hrv_demog",
            ConfigName::PpgOnly => "ppg_only",
            ConfigName::PpgDemog => "ppg_demog",
        }
    }

    pub fn needs_embeddings(self) -> bool {
        matches!(self, ConfigName::PpgOnly | ConfigName::PpgDemog)
    }

    fn uses_hrv(self) -> bool {
        matches!(
            self,
            ConfigName::HrOnly | ConfigName::HrHrv | ConfigName::HrHrvDemog
        )
    }
}

impl fmt::Display for ConfigName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConfigName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConfigName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ConfigName::ALL.iter().map(|c| c.as_str()).collect();
                Error::InvalidArgument(format!(
                    "unknown config {s:?} (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub name: ConfigName,
    pub embedding_model: Option<String>,
}

impl FeatureConfig {
    pub fn new(name: ConfigName, embedding_model: Option<String>) -> Result<Self> {
        match (name.needs_embeddings(), &embedding_model) {
            (true, None) => Err(Error::InvalidArgument(format!(
                "config {name} requires an embedding model"
            ))),
            (false, Some(m)) => Err(Error::InvalidArgument(format!(
                "config {name} does not take an embedding model (got {m:?})"
            ))),
            _ => Ok(FeatureConfig {
                name,
                embedding_model,
            }),
        }
    }

    pub fn label(&self) -> String {
        match &self.embedding_model {
            Some(m) => format!("{}[{m}]", self.name),
            None => self.name.to_string(),
        }
    }

    /// Column names of the design matrix. Embedding columns are `emb_<i>`.
    pub fn column_names(&self, embedding_dim: usize) -> Vec<String> {
        let hr = || vec![format!("{}_{}", HRV_COLUMNS[0].0, HRV_COLUMNS[0].1)];
        let hrv = || {
            HRV_COLUMNS
                .iter()
                .map(|(n, u)| format!("{n}_{u}"))
                .collect::<Vec<_>>()
        };
        let demog = || DEMOGRAPHIC_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let emb = || (0..embedding_dim).map(|i| format!("emb_{i}")).collect::<Vec<_>>();
        match self.name {
            ConfigName::Baseline => Vec::new(),
            ConfigName::HrOnly => hr(),
            ConfigName::HrHrv => hrv(),
            ConfigName::DemogOnly => demog(),
            ConfigName::SexOnly => vec!["sex".into()],
            ConfigName::HrHrvDemog => [hrv(), demog()].concat(),
            ConfigName::PpgOnly => emb(),
            ConfigName::PpgDemog => [emb(), demog()].concat(),
        }
    }
}

/// Everything the evaluator needs about one subject: its manifest record,
/// per-segment HR/HRV outcomes, and any loaded embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectData {
    pub record: SubjectRecord,
    pub segment_hrv: Vec<std::result::Result<HrvFeatures, DropReason>>,
    pub embeddings: BTreeMap<String, Vec<Vec<f64>>>,
}

impl SubjectData {
    pub fn n_segments(&self) -> usize {
        self.segment_hrv.len()
    }

    pub fn valid_hrv(&self) -> impl Iterator<Item = &HrvFeatures> {
        self.segment_hrv.iter().filter_map(|r| r.as_ref().ok())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentDrops {
    pub total_segments: usize,
    pub flat: usize,
    pub too_few_peaks: usize,
    pub too_few_ibis: usize,
}

impl SegmentDrops {
    pub fn dropped(&self) -> usize {
        self.flat + self.too_few_peaks + self.too_few_ibis
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Cohort {
    pub subjects: Vec<SubjectData>,
}

impl Cohort {
    /// Subjects are kept in the order given; callers normally sort by id.
    pub fn new(subjects: Vec<SubjectData>) -> Self {
        Cohort { subjects }
    }

    /// Load a prepared data directory, extracting HR/HRV features for every
    /// segment and reading the embeddings of each model in `models`.
    pub fn load(dir: &DataDir, models: &[String], params: PeakParams) -> Result<Cohort> {
        let manifest = dir.load_manifest()?;
        let mut records = manifest.records;
        records.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
        let subjects = records
            .into_par_iter()
            .map(|record| {
                let store = read_segment_store(dir.segment_path(&record))?;
                let segment_hrv = store
                    .to_segments()?
                    .iter()
                    .map(|s| segment_features(s, params))
                    .collect();
                let mut embeddings = BTreeMap::new();
                for m in models {
                    let e = read_embedding_store(dir.embedding_path(&record.subject_id, m))?;
                    let vectors = e
                        .vectors
                        .iter()
                        .map(|v| v.iter().map(|&x| f64::from(x)).collect())
                        .collect();
                    embeddings.insert(m.clone(), vectors);
                }
                Ok(SubjectData {
                    record,
                    segment_hrv,
                    embeddings,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Cohort { subjects })
    }

    pub fn records(&self) -> Vec<SubjectRecord> {
        self.subjects.iter().map(|s| s.record.clone()).collect()
    }

    pub fn drops(&self) -> SegmentDrops {
        let mut d = SegmentDrops::default();
        for s in &self.subjects {
            for r in &s.segment_hrv {
                d.total_segments += 1;
                match r {
                    Ok(_) => {}
                    Err(DropReason::Flat) => d.flat += 1,
                    Err(DropReason::TooFewPeaks) => d.too_few_peaks += 1,
                    Err(DropReason::TooFewIbis) => d.too_few_ibis += 1,
                }
            }
        }
        d
    }
}

/// Segment-level design rows for one subject under `config`.
pub fn subject_rows(config: &FeatureConfig, subject: &SubjectData) -> Result<Vec<Vec<f64>>> {
    let id = &subject.record.subject_id;
    let demog = subject.record.demographics();
    let rows: Vec<Vec<f64>> = match config.name {
        ConfigName::Baseline => vec![Vec::new(); subject.n_segments().max(1)],
        ConfigName::DemogOnly => vec![demog.to_vec(); subject.n_segments()],
        ConfigName::SexOnly => vec![vec![demog[0]]; subject.n_segments()],
        ConfigName::HrOnly | ConfigName::HrHrv | ConfigName::HrHrvDemog => subject
            .valid_hrv()
            .map(|f| {
                let a = f.to_array();
                match config.name {
                    ConfigName::HrOnly => vec![a[0]],
                    ConfigName::HrHrv => a.to_vec(),
                    _ => [&a[..], &demog[..]].concat(),
                }
            })
            .collect(),
        ConfigName::PpgOnly | ConfigName::PpgDemog => {
            let model = config.embedding_model.as_deref().unwrap_or_default();
            let vecs = subject.embeddings.get(model).ok_or_else(|| {
                Error::Missing(format!("subject {id}: no embeddings for model {model:?}"))
            })?;
            if vecs.len() != subject.n_segments() {
                return Err(Error::Missing(format!(
                    "subject {id}: {} embeddings for {} selected segments (model {model})",
                    vecs.len(),
                    subject.n_segments()
                )));
            }
            vecs.iter()
                .map(|v| {
                    if config.name == ConfigName::PpgOnly {
                        v.clone()
                    } else {
                        [&v[..], &demog[..]].concat()
                    }
                })
                .collect()
        }
    };
    if rows.is_empty() {
        return Err(Error::NoValidSegments(id.clone()));
    }
    Ok(rows)
}

/// Rows of per-segment feature vectors with their subject ids and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub subject_ids: Vec<String>,
    pub ages: Vec<f64>,
}

pub fn build_feature_matrix(config: &FeatureConfig, cohort: &Cohort) -> Result<FeatureMatrix> {
    let mut fm = FeatureMatrix {
        columns: Vec::new(),
        rows: Vec::new(),
        subject_ids: Vec::new(),
        ages: Vec::new(),
    };
    for s in &cohort.subjects {
        for row in subject_rows(config, s)? {
            fm.subject_ids.push(s.record.subject_id.clone());
            fm.ages.push(s.record.age_years);
            fm.rows.push(row);
        }
    }
    let dim = fm.rows.first().map_or(0, Vec::len);
    fm.columns = config.column_names(dim.saturating_sub(match config.name {
        ConfigName::PpgDemog => DEMOGRAPHIC_COLUMNS.len(),
        _ => 0,
    }));
    Ok(fm)
}

/// Subject-to-fold assignment, aligned with the input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub subject_ids: Vec<String>,
    pub folds: Vec<usize>,
}

impl FoldAssignment {
    pub fn fold_of(&self, subject_id: &str) -> Option<usize> {
        self.subject_ids
            .iter()
            .position(|s| s == subject_id)
            .map(|i| self.folds[i])
    }

    pub fn members(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] == fold).collect()
    }
}

/// Age decade used for stratification.
pub fn age_decade(age: f64) -> i64 {
    (age / 10.0).floor() as i64
}

/// Group subjects by age decade, sort each stratum by subject id and deal
/// them round-robin to folds `0, 1, …, k−1, 0, …`.
pub fn assign_stratified_folds(subjects: &[SubjectRecord], k: usize) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need k >= 2 folds, got {k}")));
    }
    if subjects.len() < k {
        return Err(Error::InvalidArgument(format!(
            "{} subjects cannot fill {k} folds",
            subjects.len()
        )));
    }
    let mut strata: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, s) in subjects.iter().enumerate() {
        strata.entry(age_decade(s.age_years)).or_default().push(i);
    }
    let mut folds = vec![0; subjects.len()];
    for members in strata.values_mut() {
        members.sort_by(|&a, &b| subjects[a].subject_id.cmp(&subjects[b].subject_id).then(a.cmp(&b)));
        for (pos, &i) in members.iter().enumerate() {
            folds[i] = pos % k;
        }
    }
    Ok(FoldAssignment {
        k,
        subject_ids: subjects.iter().map(|s| s.subject_id.clone()).collect(),
        folds,
    })
}

fn check_no_leakage(cohort: &Cohort, train: &[usize], test: &[usize], fold: usize) -> Result<()> {
    let train_ids: HashSet<&str> = train
        .iter()
        .map(|&i| cohort.subjects[i].record.subject_id.as_str())
        .collect();
    for &i in test {
        let id = &cohort.subjects[i].record.subject_id;
        if train_ids.contains(id.as_str()) {
            return Err(Error::Leakage(id.clone(), fold));
        }
    }
    Ok(())
}

struct FoldFit {
    alpha: Option<f64>,
    predictions: Vec<f64>,
}

/// Fit on `train` subjects (segment rows), predict each `test` subject as
/// the mean of its segment predictions.
fn fit_and_predict(
    config: &FeatureConfig,
    cohort: &Cohort,
    rows: &[Vec<Vec<f64>>],
    train: &[usize],
    test: &[usize],
) -> Result<FoldFit> {
    if config.name == ConfigName::Baseline {
        let ages: Vec<f64> = train.iter().map(|&i| cohort.subjects[i].record.age_years).collect();
        let b = Baseline::fit(&ages)?;
        return Ok(FoldFit {
            alpha: None,
            predictions: vec![b.predict(); test.len()],
        });
    }
    let mut x_rows = Vec::new();
    let mut y = Vec::new();
    for &i in train {
        let age = cohort.subjects[i].record.age_years;
        for r in &rows[i] {
            x_rows.push(r.clone());
            y.push(age);
        }
    }
    let x = rows_to_matrix(&x_rows)?;
    let model = ridge_fit_cv(&x, &y, &ALPHA_GRID)?;
    let predictions = test
        .iter()
        .map(|&i| {
            let preds: Vec<f64> = rows[i].iter().map(|r| model.predict_row(r)).collect();
            preds.iter().sum::<f64>() / preds.len() as f64
        })
        .collect();
    Ok(FoldFit {
        alpha: Some(model.alpha),
        predictions,
    })
}

pub fn mean_absolute_error(pred: &[f64], truth: &[f64]) -> f64 {
    pred.iter()
        .zip(truth)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / pred.len() as f64
}

/// `1 − SS_res / SS_tot`.
pub fn r2_score(pred: &[f64], truth: &[f64]) -> Result<f64> {
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot <= 0.0 {
        return Err(Error::InvalidArgument("R² undefined: constant targets".into()));
    }
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

fn population_sd(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectPrediction {
    pub subject_id: String,
    pub age_years: f64,
    pub predicted_age_years: f64,
    /// Held-out fold; `None` for zero-shot evaluation.
    pub fold: Option<usize>,
    pub n_rows: usize,
    pub sbp_mmhg: f64,
    pub dbp_mmhg: f64,
    pub bmi_kg_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecadeRow {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecadeTable {
    pub rows: Vec<DecadeRow>,
    /// Subjects outside [20, 100).
    pub excluded: usize,
}

pub const DECADE_BINS: [(f64, f64); 6] = [
    (20.0, 40.0),
    (40.0, 50.0),
    (50.0, 60.0),
    (60.0, 70.0),
    (70.0, 80.0),
    (80.0, 100.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeDiagnostic {
    pub prediction_min: f64,
    pub prediction_max: f64,
    pub true_min: f64,
    pub true_max: f64,
    /// (prediction range) / (true age range).
    pub range_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurvePoint {
    /// Requested size, or `"all"`.
    pub size: String,
    pub n_train_mean: f64,
    pub mae: f64,
    pub fold_maes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: String,
    pub embedding_model: Option<String>,
    /// Fold count; 0 for zero-shot evaluation.
    pub k: usize,
    pub n_subjects: usize,
    pub mae: f64,
    pub r2: f64,
    /// Undefined (`None`) when predictions are constant.
    pub pearson_r: Option<f64>,
    pub fold_maes: Vec<f64>,
    pub fold_mae_sd: f64,
    pub fold_alphas: Vec<Option<f64>>,
    pub decades: DecadeTable,
    pub drops: SegmentDrops,
    pub predictions: Vec<SubjectPrediction>,
    pub range_diagnostic: Option<RangeDiagnostic>,
    pub learning_curve: Option<Vec<LearningCurvePoint>>,
}

impl EvalReport {
    pub fn predicted(&self) -> Vec<f64> {
        self.predictions.iter().map(|p| p.predicted_age_years).collect()
    }

    pub fn ages(&self) -> Vec<f64> {
        self.predictions.iter().map(|p| p.age_years).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// MAE per decade bin over the report's subjects. Empty bins are omitted.
pub fn decade_breakdown(predictions: &[SubjectPrediction]) -> DecadeTable {
    let mut rows = Vec::new();
    let mut binned = 0;
    for &(lo, hi) in &DECADE_BINS {
        let members: Vec<&SubjectPrediction> = predictions
            .iter()
            .filter(|p| p.age_years >= lo && p.age_years < hi)
            .collect();
        if members.is_empty() {
            continue;
        }
        binned += members.len();
        let mae = members
            .iter()
            .map(|p| (p.predicted_age_years - p.age_years).abs())
            .sum::<f64>()
            / members.len() as f64;
        rows.push(DecadeRow {
            label: format!("{lo:.0}-{hi:.0}"),
            lo,
            hi,
            n: members.len(),
            mae,
        });
    }
    DecadeTable {
        rows,
        excluded: predictions.len() - binned,
    }
}

fn subject_prediction(rec: &SubjectRecord, pred: f64, fold: Option<usize>, n_rows: usize) -> SubjectPrediction {
    SubjectPrediction {
        subject_id: rec.subject_id.clone(),
        age_years: rec.age_years,
        predicted_age_years: pred,
        fold,
        n_rows,
        sbp_mmhg: rec.sbp_mmhg,
        dbp_mmhg: rec.dbp_mmhg,
        bmi_kg_m2: rec.bmi_kg_m2,
    }
}

fn build_report(
    config: &FeatureConfig,
    k: usize,
    predictions: Vec<SubjectPrediction>,
    fold_maes: Vec<f64>,
    fold_alphas: Vec<Option<f64>>,
    drops: SegmentDrops,
) -> Result<EvalReport> {
    let pred: Vec<f64> = predictions.iter().map(|p| p.predicted_age_years).collect();
    let truth: Vec<f64> = predictions.iter().map(|p| p.age_years).collect();
    let mae = mean_absolute_error(&pred, &truth);
    let r2 = r2_score(&pred, &truth)?;
    let pearson_r = match pearson(&pred, &truth) {
        Ok(r) => Some(r),
        Err(Error::UndefinedCorrelation(_)) => None,
        Err(e) => return Err(e),
    };
    let fold_mae_sd = if fold_maes.is_empty() {
        0.0
    } else {
        population_sd(&fold_maes)
    };
    Ok(EvalReport {
        config: config.name.to_string(),
        embedding_model: config.embedding_model.clone(),
        k,
        n_subjects: predictions.len(),
        mae,
        r2,
        pearson_r,
        fold_maes,
        fold_mae_sd,
        fold_alphas,
        decades: decade_breakdown(&predictions),
        drops,
        predictions,
        range_diagnostic: None,
        learning_curve: None,
    })
}

fn all_subject_rows(config: &FeatureConfig, cohort: &Cohort) -> Result<Vec<Vec<Vec<f64>>>> {
    cohort
        .subjects
        .iter()
        .map(|s| subject_rows(config, s))
        .collect()
}

/// k-fold subject-stratified cross-validation of one feature configuration.
///
/// Training uses segment-level rows; each held-out subject's prediction is
/// the mean over its segment rows. Metrics are pooled over all subjects and
/// the per-fold subject-level MAEs are reported with their SD.
pub fn run_cv(config: &FeatureConfig, cohort: &Cohort, k: usize) -> Result<EvalReport> {
    let assignment = assign_stratified_folds(&cohort.records(), k)?;
    run_cv_with(config, cohort, &assignment)
}

pub fn run_cv_with(config: &FeatureConfig, cohort: &Cohort, assignment: &FoldAssignment) -> Result<EvalReport> {
    let rows = all_subject_rows(config, cohort)?;
    let k = assignment.k;
    let fits = (0..k)
        .into_par_iter()
        .map(|fold| {
            let test = assignment.members(fold);
            let train: Vec<usize> = (0..cohort.subjects.len())
                .filter(|&i| assignment.folds[i] != fold)
                .collect();
            check_no_leakage(cohort, &train, &test, fold)?;
            if test.is_empty() {
                return Err(Error::InvalidArgument(format!("fold {fold} is empty")));
            }
            let fit = fit_and_predict(config, cohort, &rows, &train, &test)?;
            Ok((test, fit))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut slots: Vec<Option<SubjectPrediction>> = vec![None; cohort.subjects.len()];
    let mut fold_maes = Vec::with_capacity(k);
    let mut fold_alphas = Vec::with_capacity(k);
    for (fold, (test, fit)) in fits.into_iter().enumerate() {
        let truth: Vec<f64> = test.iter().map(|&i| cohort.subjects[i].record.age_years).collect();
        fold_maes.push(mean_absolute_error(&fit.predictions, &truth));
        fold_alphas.push(fit.alpha);
        for (&i, &p) in test.iter().zip(&fit.predictions) {
            let rec = &cohort.subjects[i].record;
            slots[i] = Some(subject_prediction(rec, p, Some(fold), rows[i].len()));
        }
    }
    let predictions = slots
        .into_iter()
        .map(|p| p.ok_or_else(|| Error::Missing("subject without a held-out prediction".into())))
        .collect::<Result<Vec<_>>>()?;
    let drops = if config.name.uses_hrv() {
        cohort.drops()
    } else {
        SegmentDrops {
            total_segments: cohort.subjects.iter().map(SubjectData::n_segments).sum(),
            ..SegmentDrops::default()
        }
    };
    build_report(config, k, predictions, fold_maes, fold_alphas, drops)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainSize {
    N(usize),
    All,
}

impl FromStr for TrainSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(TrainSize::All);
        }
        s.parse()
            .map(TrainSize::N)
            .map_err(|_| Error::InvalidArgument(format!("bad training size {s:?}")))
    }
}

impl fmt::Display for TrainSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainSize::N(n) => write!(f, "{n}"),
            TrainSize::All => f.write_str("all"),
        }
    }
}

pub const DEFAULT_CURVE_SIZES: [TrainSize; 7] = [
    TrainSize::N(20),
    TrainSize::N(50),
    TrainSize::N(100),
    TrainSize::N(200),
    TrainSize::N(400),
    TrainSize::N(700),
    TrainSize::All,
];

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub points: Vec<LearningCurvePoint>,
    /// Requested sizes larger than the smallest training fold.
    pub skipped: Vec<usize>,
}

/// MAE against training-set size. Per fold, the training subjects are
/// shuffled once with a generator seeded from `seed` and the fold index; each
/// size takes a prefix of that order, so subsets are nested. The test fold is
/// never subsampled.
pub fn learning_curve(
    config: &FeatureConfig,
    cohort: &Cohort,
    k: usize,
    sizes: &[TrainSize],
    seed: u64,
) -> Result<LearningCurve> {
    if let Some(TrainSize::N(n)) = sizes.iter().find(|s| matches!(s, TrainSize::N(n) if *n < 2)) {
        return Err(Error::InvalidArgument(format!(
            "training size must be at least 2, got {n}"
        )));
    }
    let assignment = assign_stratified_folds(&cohort.records(), k)?;
    let rows = all_subject_rows(config, cohort)?;
    let n = cohort.subjects.len();

    let orders: Vec<(Vec<usize>, Vec<usize>)> = (0..k)
        .map(|fold| {
            let mut train: Vec<usize> = (0..n).filter(|&i| assignment.folds[i] != fold).collect();
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed.wrapping_add(fold as u64));
            train.shuffle(&mut rng);
            (train, assignment.members(fold))
        })
        .collect();
    let min_train = orders.iter().map(|(t, _)| t.len()).min().unwrap_or(0);

    let mut skipped = Vec::new();
    let mut points = Vec::new();
    for &size in sizes {
        if let TrainSize::N(m) = size {
            if m > min_train {
                skipped.push(m);
                continue;
            }
        }
        let fold_maes = orders
            .par_iter()
            .enumerate()
            .map(|(fold, (order, test))| {
                let take = match size {
                    TrainSize::N(m) => m,
                    TrainSize::All => order.len(),
                };
                let mut train = order[..take].to_vec();
                train.sort_unstable();
                check_no_leakage(cohort, &train, test, fold)?;
                let fit = fit_and_predict(config, cohort, &rows, &train, test)?;
                let truth: Vec<f64> = test.iter().map(|&i| cohort.subjects[i].record.age_years).collect();
                Ok((take, mean_absolute_error(&fit.predictions, &truth)))
            })
            .collect::<Result<Vec<_>>>()?;
        let n_train_mean = fold_maes.iter().map(|(t, _)| *t as f64).sum::<f64>() / k as f64;
        let maes: Vec<f64> = fold_maes.into_iter().map(|(_, m)| m).collect();
        points.push(LearningCurvePoint {
            size: size.to_string(),
            n_train_mean,
            mae: maes.iter().sum::<f64>() / k as f64,
            fold_maes: maes,
        });
    }
    Ok(LearningCurve { points, skipped })
}

/// Zero-shot evaluation of segment-level predictions from an external model.
pub fn evaluate_external_predictions(
    preds: &ExternalPredictions,
    subjects: &[SubjectRecord],
) -> Result<EvalReport> {
    let known: BTreeSet<&str> = subjects.iter().map(|s| s.subject_id.as_str()).collect();
    if let Some(unknown) = preds.keys().find(|id| !known.contains(id.as_str())) {
        return Err(Error::Missing(format!(
            "prediction for unknown subject {unknown:?}"
        )));
    }
    let mut rows = Vec::with_capacity(subjects.len());
    for rec in subjects {
        let p = preds
            .get(&rec.subject_id)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| Error::Missing(format!("no predictions for subject {}", rec.subject_id)))?;
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        rows.push(subject_prediction(rec, mean, None, p.len()));
    }
    let config = FeatureConfig {
        name: ConfigName::Baseline,
        embedding_model: None,
    };
    let mut report = build_report(&config, 0, rows, Vec::new(), Vec::new(), SegmentDrops::default())?;
    report.config = "zero_shot".into();
    report.range_diagnostic = Some(range_diagnostic(&report.predicted(), &report.ages())?);
    Ok(report)
}

pub fn range_diagnostic(pred: &[f64], truth: &[f64]) -> Result<RangeDiagnostic> {
    let min_max = |v: &[f64]| {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    };
    let (pmin, pmax) = min_max(pred);
    let (tmin, tmax) = min_max(truth);
    if !(tmax > tmin) {
        return Err(Error::InvalidArgument("true ages have zero range".into()));
    }
    Ok(RangeDiagnostic {
        prediction_min: pmin,
        prediction_max: pmax,
        true_min: tmin,
        true_max: tmax,
        range_ratio: (pmax - pmin) / (tmax - tmin),
    })
}

/// Write `<stem>_predictions.csv`, `<stem>_decades.csv` and `<stem>_folds.csv`
/// next to a JSON report path. Returns the paths written.
pub fn write_report_tables(report: &EvalReport, json_path: &Path) -> Result<Vec<PathBuf>> {
    let sibling = |suffix: &str| {
        let stem = json_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "report".into());
        json_path.with_file_name(format!("{stem}_{suffix}.csv"))
    };
    let mut written = Vec::new();

    let p = sibling("predictions");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["subject_id", "age_years", "predicted_age_years", "fold", "n_rows"])?;
    for s in &report.predictions {
        w.write_record([
            s.subject_id.clone(),
            s.age_years.to_string(),
            s.predicted_age_years.to_string(),
            s.fold.map_or_else(String::new, |f| f.to_string()),
            s.n_rows.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&p, e))?;
    written.push(p);

    let p = sibling("decades");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["age_group", "n", "mae"])?;
    for r in &report.decades.rows {
        w.write_record([r.label.clone(), r.n.to_string(), r.mae.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&p, e))?;
    written.push(p);

    let p = sibling("folds");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["fold", "mae", "alpha"])?;
    for (i, (m, a)) in report.fold_maes.iter().zip(&report.fold_alphas).enumerate() {
        w.write_record([
            i.to_string(),
            m.to_string(),
            a.map_or_else(String::new, |a| a.to_string()),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&p, e))?;
    written.push(p);
    Ok(written)
}

pub fn write_learning_curve_csv(path: &Path, points: &[LearningCurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["size", "n_train_mean", "mae"])?;
    for p in points {
        w.write_record([p.size.clone(), p.n_train_mean.to_string(), p.mae.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
