//! Waveform-level primitives: Fourier resampling, per-segment z-scoring,
//! prominence-based systolic-peak detection and averaged beat templates.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Number of samples in an averaged beat template.
pub const BEAT_TEMPLATE_LEN: usize = 100;

/// Accepted peak-to-peak gap for beats entering a template, in seconds.
pub const BEAT_GAP_RANGE_S: (f64, f64) = (0.3, 2.0);

/// One fixed-rate PPG window.
#[derive(Debug, Clone, PartialEq)]
pub struct PpgSegment {
    samples: Vec<f64>,
    fs_hz: f64,
}

impl PpgSegment {
    pub fn new(samples: Vec<f64>, fs_hz: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidSegment(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        if !(fs_hz.is_finite() && fs_hz > 0.0) {
            return Err(Error::InvalidSegment(format!(
                "sampling rate must be positive, got {fs_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSegment(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(PpgSegment { samples, fs_hz })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn fs_hz(&self) -> f64 {
        self.fs_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs_hz
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Detected systolic peaks: strictly increasing interior indices with their
/// topographic prominences.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeakSet {
    pub indices: Vec<usize>,
    pub prominences: Vec<f64>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeatTemplate {
    pub samples: Vec<f64>,
    pub n_beats_averaged: usize,
}

/// Peak detector settings. Defaults cap heart rate at 150 BPM and require a
/// prominence of 0.1 on the z-scored scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakParams {
    pub min_distance_s: f64,
    pub min_prominence: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        PeakParams {
            min_distance_s: 0.4,
            min_prominence: 0.1,
        }
    }
}

/// Fourier-domain resampling of a raw sample slice to `target_len` points.
///
/// The spectrum is truncated (downsampling) or zero-padded (upsampling)
/// symmetrically about DC. An even-length target keeps a single Nyquist bin
/// holding the sum of both conjugate source bins; an even-length source being
/// upsampled has its Nyquist bin split evenly between the two target bins.
pub fn resample_samples(x: &[f64], target_len: usize) -> Result<Vec<f64>> {
    if target_len < 2 {
        return Err(Error::InvalidArgument(format!(
            "target length must be at least 2, got {target_len}"
        )));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty input".into()));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidSegment(format!(
            "non-finite sample at index {i}"
        )));
    }
    let nx = x.len();
    let num = target_len;
    if nx == num {
        return Ok(x.to_vec());
    }

    let mut planner = FftPlanner::<f64>::new();
    let mut spec: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(nx).process(&mut spec);

    let n = nx.min(num);
    let n_pos = n / 2 + 1;
    let mut out = vec![Complex64::new(0.0, 0.0); num];
    out[..n_pos].copy_from_slice(&spec[..n_pos]);
    let n_neg = n - n_pos;
    if n_neg > 0 {
        out[num - n_neg..].copy_from_slice(&spec[nx - n_neg..]);
    }
    if n.is_multiple_of(2) {
        let half = n / 2;
        if num < nx {
            out[half] = spec[half] + spec[nx - half];
        } else {
            let split = spec[half] * 0.5;
            out[half] = split;
            out[num - half] = split;
        }
    }

    planner.plan_fft_inverse(num).process(&mut out);
    // rustfft is unnormalised: 1/num for the inverse, times num/nx amplitude scaling.
    let scale = 1.0 / nx as f64;
    Ok(out.into_iter().map(|c| c.re * scale).collect())
}

/// Resample a segment to `target_len` samples; the sampling rate scales by
/// `target_len / len`.
pub fn resample_fourier(seg: &PpgSegment, target_len: usize) -> Result<PpgSegment> {
    let samples = resample_samples(seg.samples(), target_len)?;
    let fs = seg.fs_hz() * target_len as f64 / seg.len() as f64;
    PpgSegment::new(samples, fs)
}

/// Per-segment z-score with the population (divisor N) standard deviation.
pub fn zscore(seg: &PpgSegment) -> Result<PpgSegment> {
    let x = seg.samples();
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if !(sd > 0.0) || sd <= f64::EPSILON * mean.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::FlatSegment);
    }
    let samples = x.iter().map(|v| (v - mean) / sd).collect();
    PpgSegment::new(samples, seg.fs_hz())
}

/// Interior local maxima. A flat run bordered by strictly lower samples
/// counts once, at its leftmost index.
pub fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    if x.len() < 3 {
        return peaks;
    }
    let last = x.len() - 1;
    let mut i = 1;
    while i < last {
        if x[i - 1] < x[i] {
            let mut ahead = i + 1;
            while ahead < last && x[ahead] == x[i] {
                ahead += 1;
            }
            if x[ahead] < x[i] {
                peaks.push(i);
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    peaks
}

/// Topographic prominence of the sample at `peak`: its height above the
/// higher of the lowest points on each side before strictly higher terrain
/// (or the signal edge) is reached.
pub fn peak_prominence(x: &[f64], peak: usize) -> f64 {
    let height = x[peak];
    let mut left_min = height;
    for &v in x[..=peak].iter().rev() {
        if v > height {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = height;
    for &v in &x[peak..] {
        if v > height {
            break;
        }
        right_min = right_min.min(v);
    }
    height - left_min.max(right_min)
}

/// Greedy distance thinning: candidates are visited by descending height
/// (ties by ascending index) and kept only if no already-kept peak lies
/// fewer than `distance` samples away.
pub fn thin_by_distance(x: &[f64], candidates: &[usize], distance: usize) -> Vec<usize> {
    if distance <= 1 || candidates.len() < 2 {
        return candidates.to_vec();
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        x[candidates[b]]
            .total_cmp(&x[candidates[a]])
            .then(candidates[a].cmp(&candidates[b]))
    });
    let mut keep = vec![true; candidates.len()];
    for &pos in &order {
        if !keep[pos] {
            continue;
        }
        let here = candidates[pos];
        for k in (0..pos).rev() {
            if here - candidates[k] >= distance {
                break;
            }
            keep[k] = false;
        }
        for k in pos + 1..candidates.len() {
            if candidates[k] - here >= distance {
                break;
            }
            keep[k] = false;
        }
    }
    candidates
        .iter()
        .zip(keep)
        .filter_map(|(&c, k)| k.then_some(c))
        .collect()
}

/// Systolic-peak detection on a z-scored segment.
///
/// Local maxima are first thinned to the minimum inter-peak distance
/// (`round(min_distance_s * fs)` samples), then filtered by prominence.
pub fn detect_systolic_peaks(seg: &PpgSegment, params: PeakParams) -> PeakSet {
    let x = seg.samples();
    let distance = (params.min_distance_s * seg.fs_hz()).round().max(0.0) as usize;
    let candidates = local_maxima(x);
    let thinned = thin_by_distance(x, &candidates, distance);

    let mut out = PeakSet::default();
    for idx in thinned {
        let prom = peak_prominence(x, idx);
        if prom >= params.min_prominence {
            out.indices.push(idx);
            out.prominences.push(prom);
        }
    }
    out
}

/// Average of the peak-to-peak waveforms, each resampled to
/// [`BEAT_TEMPLATE_LEN`] samples. Only gaps within [`BEAT_GAP_RANGE_S`] count.
pub fn extract_beat_template(seg: &PpgSegment, peaks: &PeakSet) -> Result<BeatTemplate> {
    if peaks.len() < 2 {
        return Err(Error::NoValidBeats(format!(
            "need at least 2 peaks, got {}",
            peaks.len()
        )));
    }
    let fs = seg.fs_hz();
    let x = seg.samples();
    let (lo, hi) = BEAT_GAP_RANGE_S;
    let mut acc = vec![0.0; BEAT_TEMPLATE_LEN];
    let mut n_beats = 0usize;
    for pair in peaks.indices.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let gap_s = (b - a) as f64 / fs;
        if !(lo..=hi).contains(&gap_s) || b > x.len() || b - a < 2 {
            continue;
        }
        let beat = resample_samples(&x[a..b], BEAT_TEMPLATE_LEN)?;
        for (s, v) in acc.iter_mut().zip(beat) {
            *s += v;
        }
        n_beats += 1;
    }
    if n_beats == 0 {
        return Err(Error::NoValidBeats(
            "no peak-to-peak gap within 0.3-2.0 s".into(),
        ));
    }
    let inv = 1.0 / n_beats as f64;
    acc.iter_mut().for_each(|v| *v *= inv);
    Ok(BeatTemplate {
        samples: acc,
        n_beats_averaged: n_beats,
    })
}
