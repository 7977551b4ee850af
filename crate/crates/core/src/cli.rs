//! `ppgbench` command-line interface.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand};

use crate::dataset::{
    load_external_predictions, load_manifest, read_segment_store, select_even_indices,
    write_manifest, write_segment_store, DataDir, SubjectRecord, DEFAULT_MAX_SEGMENTS,
    DEFAULT_MIN_AGE,
};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_external_predictions, learning_curve, run_cv, write_learning_curve_csv,
    write_report_tables, Cohort, ConfigName, EvalReport, FeatureConfig, TrainSize,
    DEFAULT_CURVE_SIZES, DEFAULT_FOLDS,
};
use crate::features::{DropReason, HRV_COLUMNS};
use crate::plot::{line_svg, scatter_svg, LinePlot, Scatter};
use crate::signal::PeakParams;
use crate::stats::{age_gap, age_gap_associations, write_associations_csv};
use crate::synth::{synth_population, SynthSpec};

pub const THREADS_ENV: &str = "PPGBENCH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ppgbench", version, about = "PPG biological-age benchmarking toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a manifest and copy up to --max-segments evenly spaced segments per subject.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_SEGMENTS)]
        max_segments: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_AGE)]
        min_age: f64,
    },
    /// Generate a synthetic population.
    Synth {
        #[arg(long, default_value_t = 200)]
        subjects: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-segment HR/HRV feature table and drop report.
    Features {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated evaluation of one feature configuration.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: String,
        /// Embedding model name; required for ppg_only and ppg_demog.
        #[arg(long)]
        embeddings: Option<String>,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also compute a learning curve over these comma-separated sizes ("all" allowed).
        #[arg(long, value_delimiter = ',')]
        learning_curve: Option<Vec<String>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate external segment-level age predictions without training.
    ZeroShot {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// MAE against training-set size.
    LearningCurve {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: String,
        #[arg(long)]
        embeddings: Option<String>,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<String>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Raw and age-adjusted correlations of the age gap with markers.
    Agegap {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "sbp,dbp,bmi")]
        markers: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render SVG figures and their CSV tables from a report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        plots: PathBuf,
    },
}

/// Tracks files and directories created by a command and removes them unless
/// the command completes.
#[derive(Default)]
struct Outputs {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    done: bool,
}

impl Outputs {
    fn file(&mut self, p: impl Into<PathBuf>) -> PathBuf {
        let p = p.into();
        self.files.push(p.clone());
        p
    }

    fn dir(&mut self, p: &Path) -> Result<()> {
        if !p.exists() {
            fs::create_dir_all(p).map_err(|e| Error::io(p, e))?;
            self.dirs.push(p.to_path_buf());
        }
        Ok(())
    }

    fn commit(mut self) {
        self.done = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.done {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir_all(d);
        }
    }
}

/// Exact text used for MAE in figure annotations and the summary table.
pub fn mae_label(mae: f64) -> String {
    format!("{mae:.2}")
}

pub fn mae_annotation(mae: f64) -> String {
    format!("MAE = {} years", mae_label(mae))
}

fn feature_config(name: &str, embeddings: Option<String>) -> Result<FeatureConfig> {
    FeatureConfig::new(name.parse()?, embeddings)
}

fn parse_sizes(raw: Option<Vec<String>>) -> Result<Vec<TrainSize>> {
    match raw {
        None => Ok(DEFAULT_CURVE_SIZES.to_vec()),
        Some(v) => v.iter().map(|s| s.trim().parse()).collect(),
    }
}

fn load_cohort(data: &Path, config: &FeatureConfig) -> Result<Cohort> {
    let models: Vec<String> = config.embedding_model.iter().cloned().collect();
    Cohort::load(&DataDir::new(data), &models, PeakParams::default())
}

fn write_json(path: &Path, report: &EvalReport) -> Result<()> {
    fs::write(path, report.to_json()? + "\n").map_err(|e| Error::io(path, e))
}

fn read_report(path: &Path) -> Result<EvalReport> {
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EvalReport::from_json(&s)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}"))
}

fn create_parent(out: &mut Outputs, path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => out.dir(p),
        _ => Ok(()),
    }
}

fn cmd_ingest(manifest: &Path, out_dir: &Path, max_segments: usize, min_age: f64) -> Result<()> {
    if max_segments == 0 {
        return Err(Error::InvalidArgument("--max-segments must be positive".into()));
    }
    let m = load_manifest(manifest, min_age)?;
    let src_root = manifest.parent().unwrap_or(Path::new("."));
    let dir = DataDir::new(out_dir);
    let mut out = Outputs::default();
    out.dir(out_dir)?;
    out.dir(&dir.segments_dir())?;
    let mut records = Vec::with_capacity(m.records.len());
    for rec in m.records {
        let store = read_segment_store(src_root.join(&rec.segment_file))?;
        if store.subject_id != rec.subject_id {
            return Err(Error::Manifest {
                path: manifest.to_path_buf(),
                msg: format!(
                    "segment file {} holds subject {:?}, manifest says {:?}",
                    rec.segment_file, store.subject_id, rec.subject_id
                ),
            });
        }
        let picked = store.select(&select_even_indices(store.segments.len(), max_segments));
        let rec = SubjectRecord {
            segment_file: DataDir::relative_segment_file(&rec.subject_id),
            ..rec
        };
        write_segment_store(&picked, out.file(dir.segment_path(&rec)))?;
        records.push(rec);
    }
    write_manifest(out.file(dir.manifest_path()), &records)?;
    out.commit();
    println!(
        "ingested {} subjects ({} excluded under age {min_age})",
        records.len(),
        m.excluded_underage
    );
    Ok(())
}

fn cmd_synth(subjects: usize, seed: u64, out_dir: &Path) -> Result<()> {
    let spec = SynthSpec {
        n_subjects: subjects,
        seed,
        ..SynthSpec::default()
    };
    let mut out = Outputs::default();
    out.dir(out_dir)?;
    let dir = DataDir::new(out_dir);
    for d in [dir.segments_dir(), dir.embeddings_dir()] {
        out.dir(&d)?;
    }
    let records = synth_population(&spec, &dir)?;
    out.commit();
    println!(
        "wrote {} synthetic subjects to {} (embedding model {:?})",
        records.len(),
        out_dir.display(),
        spec.embedding_model
    );
    Ok(())
}

fn cmd_features(data: &Path, out_path: &Path) -> Result<()> {
    let cohort = Cohort::load(&DataDir::new(data), &[], PeakParams::default())?;
    let mut out = Outputs::default();
    create_parent(&mut out, out_path)?;
    let table = out.file(out_path);
    let mut w = csv::Writer::from_path(&table)?;
    let mut header = vec!["subject_id".to_string(), "segment".into(), "status".into()];
    header.extend(HRV_COLUMNS.iter().map(|(n, u)| format!("{n}_{u}")));
    w.write_record(&header)?;
    for s in &cohort.subjects {
        for (i, r) in s.segment_hrv.iter().enumerate() {
            let mut row = vec![s.record.subject_id.clone(), i.to_string()];
            match r {
                Ok(f) => {
                    row.push("ok".into());
                    row.extend(f.to_array().iter().map(|v| v.to_string()));
                }
                Err(reason) => {
                    row.push(drop_label(*reason).into());
                    row.extend(std::iter::repeat_n(String::new(), HRV_COLUMNS.len()));
                }
            }
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| Error::io(&table, e))?;

    let drops = cohort.drops();
    let drop_path = out.file(sibling(out_path, "drops.csv"));
    let mut w = csv::Writer::from_path(&drop_path)?;
    w.write_record(["reason", "segments"])?;
    for (label, n) in [
        ("flat", drops.flat),
        ("too_few_peaks", drops.too_few_peaks),
        ("too_few_ibis", drops.too_few_ibis),
        ("total_dropped", drops.dropped()),
        ("total_segments", drops.total_segments),
    ] {
        w.write_record([label.to_string(), n.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&drop_path, e))?;
    out.commit();
    println!(
        "{} segments, {} dropped ({} flat, {} too few peaks, {} too few IBIs)",
        drops.total_segments,
        drops.dropped(),
        drops.flat,
        drops.too_few_peaks,
        drops.too_few_ibis
    );
    Ok(())
}

fn drop_label(r: DropReason) -> &'static str {
    match r {
        DropReason::Flat => "flat",
        DropReason::TooFewPeaks => "too_few_peaks",
        DropReason::TooFewIbis => "too_few_ibis",
    }
}

fn emit_report(out: &mut Outputs, path: &Path, report: &EvalReport) -> Result<()> {
    create_parent(out, path)?;
    write_json(&out.file(path), report)?;
    for p in [
        sibling(path, "predictions.csv"),
        sibling(path, "decades.csv"),
        sibling(path, "folds.csv"),
    ] {
        out.file(p);
    }
    write_report_tables(report, path)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    data: &Path,
    config: &str,
    embeddings: Option<String>,
    folds: usize,
    out_path: &Path,
    curve: Option<Vec<String>>,
    seed: u64,
) -> Result<()> {
    let config = feature_config(config, embeddings)?;
    let cohort = load_cohort(data, &config)?;
    let mut report = run_cv(&config, &cohort, folds)?;
    if curve.is_some() {
        let lc = learning_curve(&config, &cohort, folds, &parse_sizes(curve)?, seed)?;
        for s in &lc.skipped {
            eprintln!("notice: learning-curve size {s} exceeds the smallest training fold; skipped");
        }
        report.learning_curve = Some(lc.points);
    }
    let mut out = Outputs::default();
    emit_report(&mut out, out_path, &report)?;
    out.commit();
    println!(
        "{}: n = {}, MAE = {} ± {:.2} years, R² = {:.3}, r = {}",
        config.label(),
        report.n_subjects,
        mae_label(report.mae),
        report.fold_mae_sd,
        report.r2,
        report.pearson_r.map_or_else(|| "undefined".into(), |r| format!("{r:.3}"))
    );
    Ok(())
}

fn cmd_zero_shot(data: &Path, predictions: &Path, out_path: &Path) -> Result<()> {
    let manifest = DataDir::new(data).load_manifest()?;
    let mut subjects = manifest.records;
    subjects.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    let preds = load_external_predictions(predictions)?;
    let report = evaluate_external_predictions(&preds, &subjects)?;
    let mut out = Outputs::default();
    emit_report(&mut out, out_path, &report)?;
    out.commit();
    if let Some(d) = &report.range_diagnostic {
        println!(
            "zero-shot: n = {}, MAE = {} years, predictions in [{:.1}, {:.1}] (range ratio {:.3})",
            report.n_subjects,
            mae_label(report.mae),
            d.prediction_min,
            d.prediction_max,
            d.range_ratio
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_learning_curve(
    data: &Path,
    config: &str,
    embeddings: Option<String>,
    sizes: Option<Vec<String>>,
    seed: u64,
    folds: usize,
    out_path: &Path,
) -> Result<()> {
    let config = feature_config(config, embeddings)?;
    let sizes = parse_sizes(sizes)?;
    let cohort = load_cohort(data, &config)?;
    let lc = learning_curve(&config, &cohort, folds, &sizes, seed)?;
    for s in &lc.skipped {
        eprintln!("notice: learning-curve size {s} exceeds the smallest training fold; skipped");
    }
    let mut out = Outputs::default();
    create_parent(&mut out, out_path)?;
    write_learning_curve_csv(&out.file(out_path), &lc.points)?;
    out.commit();
    for p in &lc.points {
        println!("n = {:>6}: MAE = {:.3}", p.size, p.mae);
    }
    Ok(())
}

fn marker_values(preds: &[crate::eval::SubjectPrediction], recs: &HashMap<&str, &SubjectRecord>, marker: &str) -> Result<Vec<f64>> {
    preds
        .iter()
        .map(|p| {
            let r = recs
                .get(p.subject_id.as_str())
                .ok_or_else(|| Error::Missing(format!("subject {} not in manifest", p.subject_id)))?;
            match marker {
                "sbp" => Ok(r.sbp_mmhg),
                "dbp" => Ok(r.dbp_mmhg),
                "bmi" => Ok(r.bmi_kg_m2),
                "height" => Ok(r.height_cm),
                "weight" => Ok(r.weight_kg),
                other => Err(Error::InvalidArgument(format!(
                    "unknown marker {other:?} (expected sbp, dbp, bmi, height or weight)"
                ))),
            }
        })
        .collect()
}

fn cmd_agegap(report_path: &Path, data: &Path, markers: &[String], out_path: &Path) -> Result<()> {
    let report = read_report(report_path)?;
    let manifest = DataDir::new(data).load_manifest()?;
    let recs: HashMap<&str, &SubjectRecord> = manifest
        .records
        .iter()
        .map(|r| (r.subject_id.as_str(), r))
        .collect();
    let ages = report.ages();
    let gaps = age_gap(&report.predicted(), &ages)?;
    let values = markers
        .iter()
        .map(|m| marker_values(&report.predictions, &recs, m.trim()))
        .collect::<Result<Vec<_>>>()?;
    let named: Vec<(&str, &[f64])> = markers
        .iter()
        .map(|m| m.trim())
        .zip(values.iter().map(Vec::as_slice))
        .collect();
    let res = age_gap_associations(&gaps, &ages, &named)?;
    let mut out = Outputs::default();
    create_parent(&mut out, out_path)?;
    write_associations_csv(out.file(out_path), &res)?;
    out.commit();
    for r in &res.rows {
        println!(
            "{:<6} r = {:+.3} (p = {:.2e})  partial r = {:+.3} (p = {:.2e}){}",
            r.marker,
            r.r,
            r.p,
            r.r_partial,
            r.p_partial,
            if r.p_partial < res.bonferroni_threshold { "  *" } else { "" }
        );
    }
    Ok(())
}

fn write_csv_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, s: &str) -> Result<()> {
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn cmd_report(input: &Path, plots: &Path) -> Result<()> {
    let report = read_report(input)?;
    let mut out = Outputs::default();
    out.dir(plots)?;
    let ages = report.ages();
    let pred = report.predicted();

    write_csv_rows(
        &out.file(plots.join("summary.csv")),
        &["config", "embedding_model", "n_subjects", "mae", "mae_sd", "r2", "pearson_r"],
        [vec![
            report.config.clone(),
            report.embedding_model.clone().unwrap_or_default(),
            report.n_subjects.to_string(),
            mae_label(report.mae),
            format!("{:.2}", report.fold_mae_sd),
            format!("{:.3}", report.r2),
            report.pearson_r.map_or_else(String::new, |r| format!("{r:.3}")),
        ]],
    )?;

    let title = match &report.embedding_model {
        Some(m) => format!("{} [{m}]", report.config),
        None => report.config.clone(),
    };
    write_text(
        &out.file(plots.join("scatter.svg")),
        &scatter_svg(&Scatter {
            title: &title,
            x_label: "chronological age (years)",
            y_label: "predicted age (years)",
            xs: &ages,
            ys: &pred,
            identity_line: true,
            annotation: Some(mae_annotation(report.mae)),
        }),
    )?;
    write_csv_rows(
        &out.file(plots.join("scatter.csv")),
        &["subject_id", "age_years", "predicted_age_years"],
        report.predictions.iter().map(|p| {
            vec![
                p.subject_id.clone(),
                p.age_years.to_string(),
                p.predicted_age_years.to_string(),
            ]
        }),
    )?;

    if let Some(points) = &report.learning_curve {
        let xs: Vec<f64> = points.iter().map(|p| p.n_train_mean).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.mae).collect();
        write_text(
            &out.file(plots.join("learning_curve.svg")),
            &line_svg(&LinePlot {
                title: "learning curve",
                x_label: "training subjects",
                y_label: "MAE (years)",
                xs: &xs,
                ys: &ys,
            }),
        )?;
        write_learning_curve_csv(&out.file(plots.join("learning_curve.csv")), points)?;
    }

    let gaps = age_gap(&pred, &ages)?;
    let markers: [(&str, &str, Vec<f64>); 3] = [
        ("sbp", "SBP (mmHg)", report.predictions.iter().map(|p| p.sbp_mmhg).collect()),
        ("dbp", "DBP (mmHg)", report.predictions.iter().map(|p| p.dbp_mmhg).collect()),
        ("bmi", "BMI (kg/m²)", report.predictions.iter().map(|p| p.bmi_kg_m2).collect()),
    ];
    for (name, label, values) in &markers {
        write_text(
            &out.file(plots.join(format!("agegap_{name}.svg"))),
            &scatter_svg(&Scatter {
                title: &format!("age gap vs {name}"),
                x_label: label,
                y_label: "age gap (years)",
                xs: values,
                ys: &gaps,
                identity_line: false,
                annotation: None,
            }),
        )?;
        write_csv_rows(
            &out.file(plots.join(format!("agegap_{name}.csv"))),
            &["subject_id", "age_years", "age_gap_years", name],
            report
                .predictions
                .iter()
                .zip(&gaps)
                .zip(values)
                .map(|((p, g), v)| {
                    vec![p.subject_id.clone(), p.age_years.to_string(), g.to_string(), v.to_string()]
                }),
        )?;
    }
    out.commit();
    println!("wrote figures and tables to {}", plots.display());
    Ok(())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Ingest {
            manifest,
            out,
            max_segments,
            min_age,
        } => cmd_ingest(&manifest, &out, max_segments, min_age),
        Command::Synth { subjects, seed, out } => cmd_synth(subjects, seed, &out),
        Command::Features { data, out } => cmd_features(&data, &out),
        Command::Evaluate {
            data,
            config,
            embeddings,
            folds,
            out,
            learning_curve,
            seed,
        } => cmd_evaluate(&data, &config, embeddings, folds, &out, learning_curve, seed),
        Command::ZeroShot {
            data,
            predictions,
            out,
        } => cmd_zero_shot(&data, &predictions, &out),
        Command::LearningCurve {
            data,
            config,
            embeddings,
            sizes,
            seed,
            folds,
            out,
        } => cmd_learning_curve(&data, &config, embeddings, sizes, seed, folds, &out),
        Command::Agegap {
            report,
            data,
            markers,
            out,
        } => cmd_agegap(&report, &data, &markers, &out),
        Command::Report { input, plots } => cmd_report(&input, &plots),
    }
}

/// Flag combinations clap cannot express: ppg configs need --embeddings.
fn usage_check(cmd: &Command) -> std::result::Result<(), clap::Error> {
    let (config, embeddings) = match cmd {
        Command::Evaluate {
            config, embeddings, ..
        }
        | Command::LearningCurve {
            config, embeddings, ..
        } => (config, embeddings),
        _ => return Ok(()),
    };
    let name: ConfigName = config.parse().map_err(|e: Error| {
        Cli::command().error(clap::error::ErrorKind::InvalidValue, e.to_string())
    })?;
    if name.needs_embeddings() && embeddings.is_none() {
        return Err(Cli::command().error(
            clap::error::ErrorKind::MissingRequiredArgument,
            format!("--config {name} requires --embeddings MODEL"),
        ));
    }
    Ok(())
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// Parse `args` and run the command. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Err(e) = usage_check(&cli.command) {
        let _ = e.print();
        return e.exit_code();
    }
    let result = thread_pool().and_then(|pool| pool.install(|| dispatch(cli.command)));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
