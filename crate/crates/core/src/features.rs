//! Inter-beat intervals and the seven time-domain HR/HRV features.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{detect_systolic_peaks, zscore, PeakParams, PeakSet, PpgSegment};

/// Physiologically plausible inter-beat interval range in seconds (30-200 BPM).
pub const IBI_RANGE_S: (f64, f64) = (0.3, 2.0);
pub const MIN_PEAKS: usize = 4;
pub const MIN_IBIS: usize = 3;
/// pNN50 threshold on |successive IBI difference|, seconds.
pub const NN50_THRESHOLD_S: f64 = 0.050;

/// Column names and units, in feature-vector order.
pub const HRV_COLUMNS: [(&str, &str); 7] = [
    ("hr_mean", "bpm"),
    ("hr_std", "bpm"),
    ("hr_range", "bpm"),
    ("ibi_mean", "s"),
    ("sdnn", "s"),
    ("rmssd", "s"),
    ("pnn50", "fraction"),
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IbiSequence {
    pub intervals_s: Vec<f64>,
}

impl IbiSequence {
    pub fn len(&self) -> usize {
        self.intervals_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals_s.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HrvFeatures {
    pub hr_mean_bpm: f64,
    pub hr_std_bpm: f64,
    pub hr_range_bpm: f64,
    pub ibi_mean_s: f64,
    pub sdnn_s: f64,
    pub rmssd_s: f64,
    pub pnn50_fraction: f64,
}

impl HrvFeatures {
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.hr_mean_bpm,
            self.hr_std_bpm,
            self.hr_range_bpm,
            self.ibi_mean_s,
            self.sdnn_s,
            self.rmssd_s,
            self.pnn50_fraction,
        ]
    }
}

/// Successive peak differences in seconds, keeping only intervals inside
/// [`IBI_RANGE_S`]. Order is preserved.
pub fn peaks_to_ibis(peaks: &PeakSet, fs_hz: f64) -> IbiSequence {
    let (lo, hi) = IBI_RANGE_S;
    let intervals_s = peaks
        .indices
        .windows(2)
        .map(|w| (w[1] - w[0]) as f64 / fs_hz)
        .filter(|ibi| (lo..=hi).contains(ibi))
        .collect();
    IbiSequence { intervals_s }
}

fn mean_and_pop_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn hrv_features(ibis: &IbiSequence, n_peaks: usize) -> Result<HrvFeatures> {
    if n_peaks < MIN_PEAKS {
        return Err(Error::InvalidHrvSegment(format!(
            "{n_peaks} peaks detected, need {MIN_PEAKS}"
        )));
    }
    if ibis.len() < MIN_IBIS {
        return Err(Error::InvalidHrvSegment(format!(
            "{} valid IBIs, need {MIN_IBIS}",
            ibis.len()
        )));
    }
    let ibi = &ibis.intervals_s;
    let hr: Vec<f64> = ibi.iter().map(|v| 60.0 / v).collect();
    let (hr_mean, hr_std) = mean_and_pop_std(&hr);
    let hr_max = hr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hr_min = hr.iter().copied().fold(f64::INFINITY, f64::min);
    let (ibi_mean, sdnn) = mean_and_pop_std(ibi);

    let diffs: Vec<f64> = ibi.windows(2).map(|w| w[1] - w[0]).collect();
    let rmssd = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    let nn50 = diffs.iter().filter(|d| d.abs() > NN50_THRESHOLD_S).count();
    let pnn50 = nn50 as f64 / diffs.len() as f64;

    Ok(HrvFeatures {
        hr_mean_bpm: hr_mean,
        hr_std_bpm: hr_std,
        hr_range_bpm: hr_max - hr_min,
        ibi_mean_s: ibi_mean,
        sdnn_s: sdnn,
        rmssd_s: rmssd,
        pnn50_fraction: pnn50,
    })
}

/// Why a segment produced no features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DropReason {
    Flat,
    TooFewPeaks,
    TooFewIbis,
}

/// Full per-segment path: z-score, detect peaks, IBIs, features.
pub fn segment_features(seg: &PpgSegment, params: PeakParams) -> std::result::Result<HrvFeatures, DropReason> {
    let z = zscore(seg).map_err(|_| DropReason::Flat)?;
    let peaks = detect_systolic_peaks(&z, params);
    if peaks.len() < MIN_PEAKS {
        return Err(DropReason::TooFewPeaks);
    }
    let ibis = peaks_to_ibis(&peaks, z.fs_hz());
    hrv_features(&ibis, peaks.len()).map_err(|_| DropReason::TooFewIbis)
}
