//! Recordings, segments and signal preparation.
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Analysis sampling rate.
pub const ANALYSIS_RATE: u32 = 16_000;
/// Segment length in seconds.
pub const SEGMENT_SECONDS: f64 = 20.0;

/// Clinical label of a knee. Positive class is `Abnormal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Normal,
    Abnormal,
}

impl Label {
    /// -1 for normal, +1 for abnormal.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Normal => -1.0,
            Label::Abnormal => 1.0,
        }
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self == Label::Abnormal
    }

    pub fn from_sign(s: f64) -> Label {
        if s > 0.0 {
            Label::Abnormal
        } else {
            Label::Normal
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Normal => "normal",
            Label::Abnormal => "abnormal",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "healthy" | "0" | "-1" => Some(Label::Normal),
            "abnormal" | "oa" | "1" | "+1" => Some(Label::Abnormal),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub knee_id: String,
    pub subject_id: String,
    pub label: Label,
}

impl Recording {
    pub fn new(
        samples: Vec<f64>,
        sample_rate: u32,
        knee_id: impl Into<String>,
        subject_id: impl Into<String>,
        label: Label,
    ) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidParameter(String::from("sample rate must be positive")));
        }
        if samples.is_empty() {
            return Err(Error::EmptyInput("recording has no samples"));
        }
        Ok(Self { samples, sample_rate, knee_id: knee_id.into(), subject_id: subject_id.into(), label })
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }
}

/// A fixed-length, labelled chunk of one knee's recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub knee_id: String,
    pub label: Label,
    /// Index of the segment within its knee, counting across that knee's recordings.
    pub index: usize,
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Scale every recording to unit RMS.
///
/// Equalisation is per recording.
pub fn rms_normalize(corpus: &[Recording]) -> Result<Vec<Recording>> {
    corpus
        .iter()
        .map(|rec| {
            let level = rec.rms();
            if !(level > 0.0) || !level.is_finite() {
                return Err(Error::DegenerateSignal(format!(
                    "recording of knee {} has RMS {level}",
                    rec.knee_id
                )));
            }
            let mut out = rec.clone();
            let g = 1.0 / level;
            out.samples.iter_mut().for_each(|v| *v *= g);
            Ok(out)
        })
        .collect()
}

/// Cut `rec` into non-overlapping segments of `seconds`, discarding the
/// trailing remainder. Segment indices start at `first_index`.
pub fn segment(rec: &Recording, seconds: f64, first_index: usize) -> Result<Vec<Segment>> {
    if !(seconds > 0.0) {
        return Err(Error::InvalidParameter(format!("segment length {seconds} s")));
    }
    let len = (seconds * rec.sample_rate as f64).round() as usize;
    if len == 0 {
        return Err(Error::InvalidParameter(format!("segment length {seconds} s is below one sample")));
    }
    Ok(rec
        .samples
        .chunks_exact(len)
        .enumerate()
        .map(|(j, chunk)| Segment {
            samples: chunk.to_vec(),
            sample_rate: rec.sample_rate,
            knee_id: rec.knee_id.clone(),
            label: rec.label,
            index: first_index + j,
        })
        .collect())
}

/// Check that no knee carries two labels.
pub fn check_labels(corpus: &[Recording]) -> Result<()> {
    let mut seen: BTreeMap<&str, Label> = BTreeMap::new();
    for rec in corpus {
        if let Some(prev) = seen.insert(&rec.knee_id, rec.label) {
            if prev != rec.label {
                return Err(Error::InconsistentLabel(rec.knee_id.clone()));
            }
        }
    }
    Ok(())
}

/// Full preparation: resample to `rate`, equalise RMS, then segment.
/// The result is ordered by `(knee_id, index)`.
pub fn prepare_segments(corpus: &[Recording], rate: u32, seconds: f64) -> Result<Vec<Segment>> {
    check_labels(corpus)?;
    let resampled: Vec<Recording> = corpus.iter().map(|r| resample(r, rate)).collect::<Result<_>>()?;
    let normalised = rms_normalize(&resampled)?;
    let mut next_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for rec in &normalised {
        let first = next_index.get(&rec.knee_id).copied().unwrap_or(0);
        let segs = segment(rec, seconds, first)?;
        next_index.insert(rec.knee_id.clone(), first + segs.len());
        out.extend(segs);
    }
    out.sort_by(|a, b| a.knee_id.cmp(&b.knee_id).then(a.index.cmp(&b.index)));
    Ok(out)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Modified Bessel function of the first kind, order zero.
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

const RESAMPLE_ZERO_CROSSINGS: f64 = 32.0;
const RESAMPLE_KAISER_BETA: f64 = 9.0;
const RESAMPLE_ROLLOFF: f64 = 0.92;

/// Rational-ratio resampler: Kaiser-windowed sinc evaluated through a
/// polyphase table.
pub fn resample(rec: &Recording, target_rate: u32) -> Result<Recording> {
    if target_rate == 0 {
        return Err(Error::InvalidParameter(String::from("target rate must be positive")));
    }
    if rec.sample_rate == target_rate {
        return Ok(rec.clone());
    }
    let samples = resample_samples(&rec.samples, rec.sample_rate, target_rate);
    Ok(Recording { samples, sample_rate: target_rate, ..rec.clone() })
}

pub fn resample_samples(x: &[f64], from: u32, to: u32) -> Vec<f64> {
    let g = gcd(from as u64, to as u64);
    let up = (to as u64 / g) as usize; // L
    let down = (from as u64 / g) as usize; // M
    // cutoff in cycles per input sample
    let cutoff = 0.5 * RESAMPLE_ROLLOFF * (to as f64 / from as f64).min(1.0);
    let half_width = RESAMPLE_ZERO_CROSSINGS / (2.0 * cutoff); // input samples
    let taps_half = half_width.ceil() as isize;
    let i0_beta = bessel_i0(RESAMPLE_KAISER_BETA);
    let kernel = |t: f64| -> f64 {
        if t.abs() > half_width {
            return 0.0;
        }
        let arg = 2.0 * cutoff * t;
        let sinc = if arg.abs() < 1e-12 { 1.0 } else { (PI * arg).sin() / (PI * arg) };
        let r = t / half_width;
        let w = bessel_i0(RESAMPLE_KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
        2.0 * cutoff * sinc * w
    };
    // Output n sits at input position n*M/L = base + phase/L.
    let ntaps = (2 * taps_half + 1) as usize;
    let table: Vec<Vec<f64>> = (0..up)
        .map(|phase| {
            let frac = phase as f64 / up as f64;
            (0..ntaps).map(|j| kernel(frac - (j as isize - taps_half) as f64)).collect()
        })
        .collect();
    let out_len = (x.len() * up).div_ceil(down);
    let n_in = x.len() as isize;
    (0..out_len)
        .map(|n| {
            let pos = n * down;
            let base = (pos / up) as isize;
            let phase = pos % up;
            let h = &table[phase];
            let mut acc = 0.0;
            for (j, &w) in h.iter().enumerate() {
                let k = base + j as isize - taps_half;
                if k >= 0 && k < n_in {
                    acc += w * x[k as usize];
                }
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(samples: Vec<f64>, rate: u32) -> Recording {
        Recording::new(samples, rate, "k1", "s1", Label::Normal).unwrap()
    }

    #[test]
    fn constructor_rejects_empty_and_zero_rate() {
        assert!(Recording::new(vec![], 16000, "k", "s", Label::Normal).is_err());
        assert!(Recording::new(vec![1.0], 0, "k", "s", Label::Normal).is_err());
    }

    #[test]
    fn constant_two_normalises_to_one() {
        let out = rms_normalize(&[rec(vec![2.0; 100], 16000)]).unwrap();
        assert!(out[0].samples.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn zero_rms_is_degenerate() {
        let err = rms_normalize(&[rec(vec![0.0; 10], 16000)]).unwrap_err();
        assert!(matches!(err, Error::DegenerateSignal(_)));
    }

    #[test]
    fn scale_invariance_of_normalisation() {
        let x: Vec<f64> = (0..1000).map(|i| ((i * 37 % 101) as f64 - 50.0) / 13.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v * 7.0).collect();
        let a = rms_normalize(&[rec(x, 16000)]).unwrap();
        let b = rms_normalize(&[rec(y, 16000)]).unwrap();
        for (p, q) in a[0].samples.iter().zip(&b[0].samples) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn short_recording_gives_no_segments() {
        let r = rec(vec![0.1; 19 * 16000 + 14400], 16000); // 19.9 s
        assert!(segment(&r, 20.0, 0).unwrap().is_empty());
    }

    #[test]
    fn segments_discard_remainder_and_inherit_label() {
        let mut r = rec(vec![0.5; 16000 * 45], 16000);
        r.label = Label::Abnormal;
        let segs = segment(&r, 20.0, 3).unwrap();
        assert_eq!(segs.len(), 2);
        assert!(segs.iter().all(|s| s.samples.len() == 320_000 && s.label == Label::Abnormal));
        assert_eq!(segs[1].index, 4);
    }

    #[test]
    fn inconsistent_knee_labels_rejected() {
        let a = rec(vec![1.0; 10], 16000);
        let mut b = a.clone();
        b.label = Label::Abnormal;
        assert!(matches!(check_labels(&[a, b]), Err(Error::InconsistentLabel(_))));
    }

    #[test]
    fn resample_identity_and_length() {
        let x: Vec<f64> = (0..480).map(|i| (i as f64 * 0.01).sin()).collect();
        let r = rec(x.clone(), 16000);
        assert_eq!(resample(&r, 16000).unwrap().samples, x);
        let r48 = rec(vec![0.0; 48000 * 3], 48000);
        assert_eq!(resample(&r48, 16000).unwrap().samples.len(), 48000);
        let r441 = rec(vec![0.0; 44100], 44100);
        let n = resample(&r441, 16000).unwrap().samples.len();
        assert!((n as i64 - 16000).abs() <= 1);
    }

    #[test]
    fn resample_preserves_low_tone_amplitude() {
        let x: Vec<f64> = (0..48000).map(|i| (2.0 * PI * 1000.0 * i as f64 / 48000.0).sin()).collect();
        let y = resample_samples(&x, 48000, 16000);
        // compare against the ideal tone away from the edges
        for (n, v) in y.iter().enumerate().skip(1000).take(14000) {
            let ideal = (2.0 * PI * 1000.0 * n as f64 / 16000.0).sin();
            assert!((v - ideal).abs() < 1e-3, "n={n} {v} vs {ideal}");
        }
    }
}
