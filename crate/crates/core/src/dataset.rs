//! On-disk formats: the subject manifest (CSV), per-subject waveform stores
//! (PPGS), per-subject embedding stores (PPGE) and external prediction CSVs.
//!
//! Both binary formats are little-endian with a 4-byte ASCII magic and a
//! `u32` version:
//!
//! ```text
//! PPGS v1: "PPGS" u32 version=1, f32 fs_hz, u32 n_segments, u32 segment_length,
//!          n_segments * segment_length f32 samples, segment-major
//! PPGE v1: "PPGE" u32 version=1, u32 n_segments, u32 dim,
//!          n_segments * dim f32 values, vector-major
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::PpgSegment;

pub const PPGS_MAGIC: [u8; 4] = *b"PPGS";
pub const PPGE_MAGIC: [u8; 4] = *b"PPGE";
pub const FORMAT_VERSION: u32 = 1;

pub const DEFAULT_MIN_AGE: f64 = 18.0;
pub const DEFAULT_MAX_SEGMENTS: usize = 50;

pub const MANIFEST_COLUMNS: [&str; 9] = [
    "subject_id",
    "age_years",
    "sex",
    "height_cm",
    "weight_kg",
    "bmi_kg_m2",
    "sbp_mmhg",
    "dbp_mmhg",
    "segment_file",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    M,
    F,
}

impl Sex {
    /// Regression encoding: M = 1, F = 0.
    pub fn encode(self) -> f64 {
        match self {
            Sex::M => 1.0,
            Sex::F => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sex::M => "M",
            Sex::F => "F",
        }
    }

    fn parse(s: &str) -> Option<Sex> {
        match s.trim() {
            "M" | "m" => Some(Sex::M),
            "F" | "f" => Some(Sex::F),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub age_years: f64,
    pub sex: Sex,
    pub height_cm: f64,
    pub weight_kg: f64,
    pub bmi_kg_m2: f64,
    pub sbp_mmhg: f64,
    pub dbp_mmhg: f64,
    /// Path of the subject's PPGS store, relative to the manifest directory.
    pub segment_file: String,
}

impl SubjectRecord {
    /// sex, BMI, height, weight, SBP, DBP.
    pub fn demographics(&self) -> [f64; 6] {
        [
            self.sex.encode(),
            self.bmi_kg_m2,
            self.height_cm,
            self.weight_kg,
            self.sbp_mmhg,
            self.dbp_mmhg,
        ]
    }
}

pub const DEMOGRAPHIC_COLUMNS: [&str; 6] = ["sex", "bmi", "height", "weight", "sbp", "dbp"];

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub records: Vec<SubjectRecord>,
    /// Rows dropped for being under the minimum age.
    pub excluded_underage: usize,
}

pub fn load_manifest(path: impl AsRef<Path>, min_age: f64) -> Result<Manifest> {
    let path = path.as_ref();
    let err = |msg: String| Error::Manifest {
        path: path.to_path_buf(),
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let headers = rdr.headers()?.clone();
    let mut col = [0usize; 9];
    for (slot, name) in col.iter_mut().zip(MANIFEST_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| err(format!("missing column {name:?}")))?;
    }

    let mut records = Vec::new();
    let mut excluded_underage = 0;
    let mut seen = HashSet::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        // 1-based data row, header excluded
        let rowno = i + 1;
        let cell = |k: usize| -> Result<&str> {
            let name = MANIFEST_COLUMNS[k];
            match row.get(col[k]) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(err(format!("row {rowno}: empty {name}"))),
            }
        };
        let num = |k: usize| -> Result<f64> {
            let name = MANIFEST_COLUMNS[k];
            let v: f64 = cell(k)?
                .parse()
                .map_err(|_| err(format!("row {rowno}: {name} is not a number")))?;
            if !v.is_finite() || v <= 0.0 {
                return Err(err(format!(
                    "row {rowno}: {name} must be finite and positive, got {v}"
                )));
            }
            Ok(v)
        };
        let subject_id = cell(0)?.to_string();
        let sex_raw = cell(2)?;
        let sex = Sex::parse(sex_raw)
            .ok_or_else(|| err(format!("row {rowno}: sex must be M or F, got {sex_raw:?}")))?;
        let rec = SubjectRecord {
            age_years: num(1)?,
            sex,
            height_cm: num(3)?,
            weight_kg: num(4)?,
            bmi_kg_m2: num(5)?,
            sbp_mmhg: num(6)?,
            dbp_mmhg: num(7)?,
            segment_file: cell(8)?.to_string(),
            subject_id,
        };
        if !seen.insert(rec.subject_id.clone()) {
            return Err(err(format!(
                "row {rowno}: duplicate subject_id {:?}",
                rec.subject_id
            )));
        }
        if rec.age_years < min_age {
            excluded_underage += 1;
            continue;
        }
        records.push(rec);
    }
    Ok(Manifest {
        records,
        excluded_underage,
    })
}

pub fn write_manifest(path: impl AsRef<Path>, records: &[SubjectRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(MANIFEST_COLUMNS)?;
    for r in records {
        w.write_record([
            r.subject_id.clone(),
            r.age_years.to_string(),
            r.sex.as_str().to_string(),
            r.height_cm.to_string(),
            r.weight_kg.to_string(),
            r.bmi_kg_m2.to_string(),
            r.sbp_mmhg.to_string(),
            r.dbp_mmhg.to_string(),
            r.segment_file.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Evenly spaced segment indices: everything when `n_available <= k_max`,
/// otherwise `floor(i * n_available / k_max)` for `i in 0..k_max`.
pub fn select_even_indices(n_available: usize, k_max: usize) -> Vec<usize> {
    if n_available <= k_max {
        return (0..n_available).collect();
    }
    (0..k_max).map(|i| i * n_available / k_max).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentStore {
    pub subject_id: String,
    pub fs_hz: f32,
    pub segments: Vec<Vec<f32>>,
}

impl SegmentStore {
    pub fn segment_length(&self) -> usize {
        self.segments.first().map_or(0, Vec::len)
    }

    pub fn to_segments(&self) -> Result<Vec<PpgSegment>> {
        self.segments
            .iter()
            .map(|s| PpgSegment::new(s.iter().map(|&v| f64::from(v)).collect(), f64::from(self.fs_hz)))
            .collect()
    }

    /// Keep only the segments at `indices`, in order.
    pub fn select(&self, indices: &[usize]) -> SegmentStore {
        SegmentStore {
            subject_id: self.subject_id.clone(),
            fs_hz: self.fs_hz,
            segments: indices.iter().map(|&i| self.segments[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    pub subject_id: String,
    pub model_name: String,
    pub dim: usize,
    pub vectors: Vec<Vec<f32>>,
}

pub fn segment_file_name(subject_id: &str) -> String {
    format!("{subject_id}.ppgs")
}

pub fn embedding_file_name(subject_id: &str, model_name: &str) -> String {
    format!("{subject_id}.{model_name}.ppge")
}

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn to_u32(path: &Path, what: &str, v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| format_err(path, format!("{what} {v} exceeds u32")))
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_segment_store(store: &SegmentStore, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if store.segments.is_empty() {
        return Err(format_err(path, "store has no segments"));
    }
    let len = store.segment_length();
    if len == 0 || store.segments.iter().any(|s| s.len() != len) {
        return Err(format_err(path, "segments must be non-empty and equal length"));
    }
    let mut buf = Vec::with_capacity(20 + 4 * len * store.segments.len());
    buf.extend_from_slice(&PPGS_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&store.fs_hz.to_le_bytes());
    buf.extend_from_slice(&to_u32(path, "n_segments", store.segments.len())?.to_le_bytes());
    buf.extend_from_slice(&to_u32(path, "segment_length", len)?.to_le_bytes());
    for s in &store.segments {
        for v in s {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    write_atomically(path, &buf)
}

pub fn write_embedding_store(store: &EmbeddingStore, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if store.dim == 0 {
        return Err(format_err(path, "dim must be positive"));
    }
    if store.vectors.iter().any(|v| v.len() != store.dim) {
        return Err(format_err(path, "vector length differs from dim"));
    }
    let mut buf = Vec::with_capacity(16 + 4 * store.dim * store.vectors.len());
    buf.extend_from_slice(&PPGE_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&to_u32(path, "n_segments", store.vectors.len())?.to_le_bytes());
    buf.extend_from_slice(&to_u32(path, "dim", store.dim)?.to_le_bytes());
    for v in &store.vectors {
        for x in v {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    write_atomically(path, &buf)
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take4(&mut self) -> Result<[u8; 4]> {
        let end = self.pos + 4;
        if end > self.bytes.len() {
            return Err(Error::Truncated {
                path: self.path.to_path_buf(),
                expected: end as u64,
                found: self.bytes.len() as u64,
            });
        }
        let mut out = [0u8; 4];
        out.copy_from_slice(&self.bytes[self.pos..end]);
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take4()?))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take4()?))
    }

    fn expect_magic(&mut self, magic: [u8; 4]) -> Result<()> {
        let found = self.take4()?;
        if found != magic {
            return Err(Error::BadMagic {
                path: self.path.to_path_buf(),
                found,
                expected: magic,
            });
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::BadVersion {
                path: self.path.to_path_buf(),
                version,
            });
        }
        Ok(())
    }

    /// Read `rows * cols` f32 values, checking the payload length exactly.
    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Vec<Vec<f32>>> {
        let need = (rows as u64) * (cols as u64) * 4;
        let have = (self.bytes.len() - self.pos) as u64;
        if have < need {
            return Err(Error::Truncated {
                path: self.path.to_path_buf(),
                expected: self.pos as u64 + need,
                found: self.bytes.len() as u64,
            });
        }
        if have > need {
            return Err(format_err(
                self.path,
                format!("{} trailing bytes after payload", have - need),
            ));
        }
        let payload = &self.bytes[self.pos..];
        Ok(payload
            .chunks_exact(cols * 4)
            .map(|row| {
                row.chunks_exact(4)
                    .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                    .collect()
            })
            .collect())
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn file_stem_without(path: &Path, suffix: &str) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.strip_suffix(suffix).unwrap_or(&name).to_string()
}

/// Read a PPGS store. The subject id is taken from the file name
/// (`<subject_id>.ppgs`).
pub fn read_segment_store(path: impl AsRef<Path>) -> Result<SegmentStore> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let mut c = Cursor {
        path,
        bytes: &bytes,
        pos: 0,
    };
    c.expect_magic(PPGS_MAGIC)?;
    let fs_hz = c.f32()?;
    let n = c.u32()? as usize;
    let len = c.u32()? as usize;
    if !(fs_hz.is_finite() && fs_hz > 0.0) {
        return Err(format_err(path, format!("invalid fs_hz {fs_hz}")));
    }
    if n == 0 || len == 0 {
        return Err(format_err(path, "empty store"));
    }
    let segments = c.matrix(n, len)?;
    Ok(SegmentStore {
        subject_id: file_stem_without(path, ".ppgs"),
        fs_hz,
        segments,
    })
}

/// Read a PPGE store. Subject id and model name come from the file name
/// (`<subject_id>.<model_name>.ppge`).
pub fn read_embedding_store(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let mut c = Cursor {
        path,
        bytes: &bytes,
        pos: 0,
    };
    c.expect_magic(PPGE_MAGIC)?;
    let n = c.u32()? as usize;
    let dim = c.u32()? as usize;
    if dim == 0 {
        return Err(format_err(path, "dim must be positive"));
    }
    let vectors = c.matrix(n, dim)?;
    let stem = file_stem_without(path, ".ppge");
    let (subject_id, model_name) = match stem.rsplit_once('.') {
        Some((s, m)) => (s.to_string(), m.to_string()),
        None => (stem, String::new()),
    };
    Ok(EmbeddingStore {
        subject_id,
        model_name,
        dim,
        vectors,
    })
}

/// Per-subject segment-level predictions from an external model, ordered by
/// segment index.
pub type ExternalPredictions = BTreeMap<String, Vec<f64>>;

pub fn load_external_predictions(path: impl AsRef<Path>) -> Result<ExternalPredictions> {
    let path = path.as_ref();
    let err = |msg: String| Error::Predictions {
        path: path.to_path_buf(),
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| err(format!("missing column {name:?}")))
    };
    let (c_id, c_seg, c_pred) = (
        find("subject_id")?,
        find("segment_index")?,
        find("predicted_age_years")?,
    );
    let mut grouped: BTreeMap<String, BTreeMap<u64, f64>> = BTreeMap::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let rowno = i + 1;
        let id = row.get(c_id).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(err(format!("row {rowno}: empty subject_id")));
        }
        let seg: u64 = row
            .get(c_seg)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err(format!("row {rowno}: bad segment_index")))?;
        let pred: f64 = row
            .get(c_pred)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err(format!("row {rowno}: bad predicted_age_years")))?;
        if !pred.is_finite() {
            return Err(err(format!("row {rowno}: non-finite prediction")));
        }
        if grouped.entry(id.clone()).or_default().insert(seg, pred).is_some() {
            return Err(err(format!(
                "row {rowno}: duplicate ({id}, {seg})"
            )));
        }
    }
    Ok(grouped
        .into_iter()
        .map(|(id, m)| (id, m.into_values().collect()))
        .collect())
}

pub fn write_external_predictions(
    path: impl AsRef<Path>,
    preds: &ExternalPredictions,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["subject_id", "segment_index", "predicted_age_years"])?;
    for (id, v) in preds {
        for (i, p) in v.iter().enumerate() {
            w.write_record([id.clone(), i.to_string(), p.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Layout of a prepared data directory:
/// `manifest.csv`, `segments/<id>.ppgs`, `embeddings/<id>.<model>.ppge`.
#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.csv")
    }

    pub fn segments_dir(&self) -> PathBuf {
        self.root.join("segments")
    }

    pub fn embeddings_dir(&self) -> PathBuf {
        self.root.join("embeddings")
    }

    /// Relative path stored in the manifest's `segment_file` column.
    pub fn relative_segment_file(subject_id: &str) -> String {
        format!("segments/{}", segment_file_name(subject_id))
    }

    pub fn segment_path(&self, rec: &SubjectRecord) -> PathBuf {
        self.root.join(&rec.segment_file)
    }

    pub fn embedding_path(&self, subject_id: &str, model_name: &str) -> PathBuf {
        self.embeddings_dir()
            .join(embedding_file_name(subject_id, model_name))
    }

    pub fn create(&self) -> Result<()> {
        for d in [self.root.clone(), self.segments_dir(), self.embeddings_dir()] {
            fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        }
        Ok(())
    }

    pub fn load_manifest(&self) -> Result<Manifest> {
        load_manifest(self.manifest_path(), DEFAULT_MIN_AGE)
    }
}
