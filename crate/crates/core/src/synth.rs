//! Deterministic synthetic PPG cohorts with planted ground truth.
//!
//! Each beat is a unit-amplitude Gaussian systolic pulse followed by a smaller
//! delayed Gaussian (the dicrotic wave). Heart rate, beat-to-beat jitter and
//! dicrotic amplitude depend affinely on age, demographics carry planted age
//! trends (BMI is pure noise), and synthetic embeddings encode age in their
//! first coordinate only.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::dataset::{
    write_embedding_store, write_manifest, write_segment_store, DataDir, EmbeddingStore,
    SegmentStore, Sex, SubjectRecord,
};
use crate::error::{Error, Result};
use crate::signal::PpgSegment;

/// Generated IBIs are clipped to this range (seconds).
pub const SYNTH_IBI_RANGE_S: (f64, f64) = (0.35, 1.9);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Morphology {
    pub systolic_width_s: f64,
    pub dicrotic_amplitude: f64,
    pub dicrotic_delay_s: f64,
    pub dicrotic_width_s: f64,
}

impl Default for Morphology {
    fn default() -> Self {
        Morphology {
            systolic_width_s: 0.05,
            dicrotic_amplitude: 0.3,
            dicrotic_delay_s: 0.25,
            dicrotic_width_s: 0.08,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSegment {
    pub segment: PpgSegment,
    /// Sample index of every rendered systolic maximum (noise-free waveform).
    pub planted_peaks: Vec<usize>,
}

fn gauss(t: f64, centre: f64, width: f64) -> f64 {
    let u = (t - centre) / width;
    (-0.5 * u * u).exp()
}

/// Render `n_samples` of PPG at `fs_hz` from an IBI sequence.
///
/// The first systolic peak sits at `ibis[0] / 2`; peak `k + 1` follows peak
/// `k` by `ibis[k]`. A beat is rendered only while its half-interval fits in
/// the window, so no pulse is cut at the edges. Noise is white Gaussian with
/// standard deviation `noise_sd` (systolic amplitude is 1).
pub fn synth_segment<R: Rng + ?Sized>(
    ibis: &[f64],
    morph: &Morphology,
    fs_hz: f64,
    n_samples: usize,
    noise_sd: f64,
    rng: &mut R,
) -> Result<SynthSegment> {
    let (lo, hi) = SYNTH_IBI_RANGE_S;
    if ibis.is_empty() || ibis.iter().any(|v| !(lo..=hi).contains(v)) {
        return Err(Error::InvalidArgument(format!(
            "IBIs must lie in [{lo}, {hi}] s"
        )));
    }
    let duration = n_samples as f64 / fs_hz;
    let mut centres = Vec::new();
    let mut t = ibis[0] / 2.0;
    for &ibi in ibis {
        if t + ibi / 2.0 > duration {
            break;
        }
        centres.push(t);
        t += ibi;
    }

    let mut clean = vec![0.0; n_samples];
    let mut add_pulse = |centre: f64, width: f64, amp: f64| {
        if amp == 0.0 {
            return;
        }
        // beyond 10 widths the pulse is below 2e-22
        let lo = ((centre - 10.0 * width) * fs_hz).floor().max(0.0) as usize;
        let hi = (((centre + 10.0 * width) * fs_hz).ceil().max(0.0) as usize).min(n_samples);
        for (i, v) in clean.iter_mut().enumerate().take(hi).skip(lo) {
            *v += amp * gauss(i as f64 / fs_hz, centre, width);
        }
    };
    for &c in &centres {
        add_pulse(c, morph.systolic_width_s, 1.0);
        add_pulse(
            c + morph.dicrotic_delay_s,
            morph.dicrotic_width_s,
            morph.dicrotic_amplitude,
        );
    }

    let mut planted = Vec::with_capacity(centres.len());
    for &c in &centres {
        let guess = (c * fs_hz).round() as isize;
        let lo_i = (guess - 3).max(0) as usize;
        let hi_i = ((guess + 3).max(0) as usize).min(n_samples.saturating_sub(1));
        if lo_i > hi_i {
            continue;
        }
        let best = (lo_i..=hi_i)
            .max_by(|&a, &b| clean[a].total_cmp(&clean[b]).then(b.cmp(&a)))
            .expect("non-empty window");
        if best >= 1 && best + 1 < n_samples {
            planted.push(best);
        }
    }

    let samples = clean
        .into_iter()
        .map(|v| {
            let z: f64 = rng.sample(StandardNormal);
            v + noise_sd * z
        })
        .collect();
    Ok(SynthSegment {
        segment: PpgSegment::new(samples, fs_hz)?,
        planted_peaks: planted,
    })
}

/// IBIs around `mean_ibi` with Gaussian jitter, clipped to the synthetic range.
pub fn synth_ibis<R: Rng + ?Sized>(mean_ibi: f64, jitter_sd: f64, count: usize, rng: &mut R) -> Vec<f64> {
    let (lo, hi) = SYNTH_IBI_RANGE_S;
    (0..count)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            (mean_ibi + jitter_sd * z).clamp(lo, hi)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_subjects: usize,
    pub seed: u64,
    pub age_range: (f64, f64),
    pub fs_hz: f64,
    pub segment_len: usize,
    pub segments_per_subject: usize,
    /// Mean IBI (s) at the reference age and its change per year.
    pub ibi_at_ref_age: f64,
    pub ibi_per_year: f64,
    /// Between-subject SD of mean IBI not explained by age.
    pub ibi_subject_sd: f64,
    pub jitter_at_ref_age: f64,
    pub jitter_per_year: f64,
    /// Between-subject spread of the jitter SD, as a log-scale SD.
    pub jitter_subject_log_sd: f64,
    pub dicrotic_at_ref_age: f64,
    pub dicrotic_per_year: f64,
    pub noise_sd: f64,
    pub embedding_dim: usize,
    pub embedding_model: String,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_subjects: 200,
            seed: 7,
            age_range: (18.0, 90.0),
            fs_hz: 125.0,
            segment_len: 1250,
            segments_per_subject: 20,
            ibi_at_ref_age: 0.72,
            ibi_per_year: 0.0035,
            ibi_subject_sd: 0.12,
            jitter_at_ref_age: 0.05,
            jitter_per_year: -0.0002,
            jitter_subject_log_sd: 0.35,
            dicrotic_at_ref_age: 0.5,
            dicrotic_per_year: -0.005,
            noise_sd: 0.002,
            embedding_dim: 16,
            embedding_model: "synth".into(),
        }
    }
}

impl SynthSpec {
    const REF_AGE: f64 = 18.0;

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("synth spec: {m}")));
        if self.n_subjects == 0 || self.segments_per_subject == 0 {
            return bad("need at least one subject and one segment");
        }
        if !(self.age_range.0 < self.age_range.1) {
            return bad("empty age range");
        }
        if !(self.fs_hz > 0.0) || self.segment_len < 2 {
            return bad("bad sampling grid");
        }
        if self.embedding_dim == 0 {
            return bad("embedding_dim must be positive");
        }
        Ok(())
    }
}

/// One generated subject, before it is written to disk.
#[derive(Debug, Clone)]
pub struct SynthSubject {
    pub record: SubjectRecord,
    pub store: SegmentStore,
    pub embeddings: EmbeddingStore,
    pub planted_peaks: Vec<Vec<usize>>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-subject stream: population seed XOR a hash of the subject ordinal.
pub fn subject_rng(seed: u64, ordinal: usize) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed ^ splitmix64(ordinal as u64))
}

pub fn subject_id(ordinal: usize) -> String {
    format!("S{:04}", ordinal + 1)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn synth_subject(spec: &SynthSpec, ordinal: usize) -> Result<SynthSubject> {
    spec.validate()?;
    let mut rng = subject_rng(spec.seed, ordinal);
    let id = subject_id(ordinal);
    let (a0, a1) = spec.age_range;
    let age = a0 + (a1 - a0) * rng.random::<f64>();
    let years = age - SynthSpec::REF_AGE;

    let sex = if rng.random_bool(0.56) { Sex::M } else { Sex::F };
    let base_height = if sex == Sex::M { 175.0 } else { 162.0 };
    let height = (base_height - 0.08 * years + 6.5 * normal(&mut rng)).clamp(140.0, 205.0);
    let bmi = (25.0 + 4.0 * normal(&mut rng)).clamp(16.0, 45.0);
    let weight = bmi * (height / 100.0).powi(2);
    let sbp = (105.0 + 0.55 * years + 14.0 * normal(&mut rng)).clamp(80.0, 210.0);
    let dbp = (82.0 - 0.15 * years + 8.0 * normal(&mut rng)).clamp(40.0, 125.0);

    let mean_ibi = (spec.ibi_at_ref_age + spec.ibi_per_year * years
        + spec.ibi_subject_sd * normal(&mut rng))
    .clamp(0.45, 1.4);
    let jitter = ((spec.jitter_at_ref_age + spec.jitter_per_year * years)
        * (spec.jitter_subject_log_sd * normal(&mut rng)).exp())
    .max(0.005);
    let morph = Morphology {
        dicrotic_amplitude: (spec.dicrotic_at_ref_age + spec.dicrotic_per_year * years
            + 0.05 * normal(&mut rng))
        .clamp(0.0, 0.8),
        ..Morphology::default()
    };
    let emb_offset = normal(&mut rng);

    let duration = spec.segment_len as f64 / spec.fs_hz;
    let beats = (duration / SYNTH_IBI_RANGE_S.0).ceil() as usize + 2;
    let mut segments = Vec::with_capacity(spec.segments_per_subject);
    let mut planted_peaks = Vec::with_capacity(spec.segments_per_subject);
    let mut vectors = Vec::with_capacity(spec.segments_per_subject);
    for _ in 0..spec.segments_per_subject {
        let seg_mean = (mean_ibi + 0.03 * normal(&mut rng)).clamp(0.45, 1.4);
        let ibis = synth_ibis(seg_mean, jitter, beats, &mut rng);
        let s = synth_segment(&ibis, &morph, spec.fs_hz, spec.segment_len, spec.noise_sd, &mut rng)?;
        segments.push(s.segment.samples().iter().map(|&v| v as f32).collect());
        planted_peaks.push(s.planted_peaks);

        let mut v = Vec::with_capacity(spec.embedding_dim);
        v.push(((age - 54.0) / 18.0 + emb_offset + 0.5 * normal(&mut rng)) as f32);
        for _ in 1..spec.embedding_dim {
            v.push(normal(&mut rng) as f32);
        }
        vectors.push(v);
    }

    let record = SubjectRecord {
        subject_id: id.clone(),
        age_years: age,
        sex,
        height_cm: height,
        weight_kg: weight,
        bmi_kg_m2: bmi,
        sbp_mmhg: sbp,
        dbp_mmhg: dbp,
        segment_file: DataDir::relative_segment_file(&id),
    };
    Ok(SynthSubject {
        record,
        store: SegmentStore {
            subject_id: id.clone(),
            fs_hz: spec.fs_hz as f32,
            segments,
        },
        embeddings: EmbeddingStore {
            subject_id: id,
            model_name: spec.embedding_model.clone(),
            dim: spec.embedding_dim,
            vectors,
        },
        planted_peaks,
    })
}

/// Generate a cohort and write it as a data directory (manifest, PPGS and
/// PPGE stores). Returns the manifest records.
pub fn synth_population(spec: &SynthSpec, out: &DataDir) -> Result<Vec<SubjectRecord>> {
    spec.validate()?;
    out.create()?;
    let records = (0..spec.n_subjects)
        .into_par_iter()
        .map(|i| {
            let s = synth_subject(spec, i)?;
            write_segment_store(&s.store, out.segment_path(&s.record))?;
            write_embedding_store(
                &s.embeddings,
                out.embedding_path(&s.record.subject_id, &spec.embedding_model),
            )?;
            Ok(s.record)
        })
        .collect::<Result<Vec<_>>>()?;
    write_manifest(out.manifest_path(), &records)?;
    Ok(records)
}
