//! Framing, windowed magnitude spectra and triangular filterbanks.
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{forward_real_pair, FftPlan};
use crate::matrix::Matrix;
use crate::signal::Segment;

/// Frames of a segment, one per row, with 50% overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    pub values: Matrix,
    pub frame_ms: f64,
    pub hop: usize,
    pub sample_rate: u32,
}

impl FrameMatrix {
    pub fn frame_len(&self) -> usize {
        self.values.cols()
    }

    pub fn frames(&self) -> usize {
        self.values.rows()
    }
}

/// Magnitude spectra of the frames: `T_f x K`, `K = floor(1 + l_s/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramMatrix {
    pub values: Matrix,
    pub frame_len: usize,
    pub bin_hz: f64,
}

impl SpectrogramMatrix {
    pub fn bins(&self) -> usize {
        self.values.cols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Mel,
}

/// `K x N_B` triangular weights, one band per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Filterbank {
    pub weights: Matrix,
    pub spacing: Spacing,
    /// `N_B + 2` band edges in Hz; band `m` spans `edges[m]..edges[m+2]`
    /// and peaks at `edges[m+1]`.
    pub edges: Vec<f64>,
}

impl Filterbank {
    pub fn bands(&self) -> usize {
        self.weights.cols()
    }

    pub fn centers(&self) -> &[f64] {
        &self.edges[1..self.edges.len() - 1]
    }
}

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Frame length in samples for `ms` at `rate`.
pub fn frame_samples(ms: f64, rate: u32) -> usize {
    (ms * rate as f64 / 1000.0).round() as usize
}

/// Number of bins kept from an `l_s`-point DFT.
pub fn bin_count(frame_len: usize) -> usize {
    1 + frame_len / 2
}

/// Number of 50%-overlapped frames of length `frame_len` in `n` samples.
pub fn frame_count(n: usize, frame_len: usize) -> usize {
    let hop = frame_len / 2;
    if frame_len > n || hop == 0 {
        0
    } else {
        (n - frame_len) / hop + 1
    }
}

/// Periodic Hann window.
pub fn hann(len: usize) -> Vec<f64> {
    (0..len).map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos()).collect()
}

fn checked_frame_len(ms: f64, rate: u32, available: usize) -> Result<usize> {
    let ls = frame_samples(ms, rate);
    if !(ms > 0.0) || ls < 2 || ls > available {
        return Err(Error::InvalidFrameLength { samples: ls, segment_len: available });
    }
    Ok(ls)
}

/// Split a segment into frames of `frame_ms` with 50% overlap. The final
/// partial frame is dropped.
pub fn enframe(seg: &Segment, frame_ms: f64) -> Result<FrameMatrix> {
    let ls = checked_frame_len(frame_ms, seg.sample_rate, seg.samples.len())?;
    let hop = ls / 2;
    let tf = frame_count(seg.samples.len(), ls);
    let mut data = Vec::with_capacity(tf * ls);
    for t in 0..tf {
        data.extend_from_slice(&seg.samples[t * hop..t * hop + ls]);
    }
    Ok(FrameMatrix { values: Matrix::from_vec(tf, ls, data)?, frame_ms, hop, sample_rate: seg.sample_rate })
}

/// Reusable window + FFT plan for one frame length.
#[derive(Debug, Clone)]
pub struct Analyzer {
    plan: FftPlan,
    window: Vec<f64>,
}

impl Analyzer {
    pub fn new(frame_len: usize) -> Self {
        Self { plan: FftPlan::new(frame_len), window: hann(frame_len) }
    }

    pub fn frame_len(&self) -> usize {
        self.window.len()
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Magnitude spectra of consecutive 50%-overlapped frames of `samples`.
    pub fn spectrogram(&self, samples: &[f64]) -> Matrix {
        let ls = self.frame_len();
        let tf = frame_count(samples.len(), ls);
        self.spectrogram_of(tf, |t| &samples[t * (ls / 2)..t * (ls / 2) + ls])
    }

    fn spectrogram_of<'a>(&self, tf: usize, frame: impl Fn(usize) -> &'a [f64]) -> Matrix {
        let ls = self.frame_len();
        let k = bin_count(ls);
        let mut out = Matrix::zeros(tf, k);
        let windowed = |t: usize| -> Vec<f64> { frame(t).iter().zip(&self.window).map(|(x, w)| x * w).collect() };
        let mut t = 0;
        while t < tf {
            let a = windowed(t);
            let b = if t + 1 < tf { windowed(t + 1) } else { alloc::vec![0.0; ls] };
            let (fa, fb) = forward_real_pair(&self.plan, &a, &b);
            for (o, c) in out.row_mut(t).iter_mut().zip(&fa) {
                *o = c.abs();
            }
            if t + 1 < tf {
                for (o, c) in out.row_mut(t + 1).iter_mut().zip(&fb) {
                    *o = c.abs();
                }
            }
            t += 2;
        }
        out
    }
}

/// Hann-windowed DFT magnitudes of every frame, first `K` bins.
pub fn dft_magnitude(fm: &FrameMatrix) -> SpectrogramMatrix {
    let ls = fm.frame_len();
    let analyzer = Analyzer::new(ls);
    let values = analyzer.spectrogram_of(fm.frames(), |t| fm.values.row(t));
    SpectrogramMatrix { values, frame_len: ls, bin_hz: fm.sample_rate as f64 / ls as f64 }
}

/// Triangular filterbank of `bands` filters with centres uniformly spaced in
/// Hz or mel over `[0, fs/2]`, sampled at bin frequencies `k * fs / frame_len`.
pub fn make_filterbank(bins: usize, frame_len: usize, fs: u32, bands: usize, spacing: Spacing) -> Result<Filterbank> {
    if bands == 0 {
        return Err(Error::InvalidParameter(format!("band count must be at least 1")));
    }
    if bins < bands + 2 {
        return Err(Error::Resolution { bins, bands });
    }
    let nyquist = fs as f64 / 2.0;
    let (lo, hi) = match spacing {
        Spacing::Linear => (0.0, nyquist),
        Spacing::Mel => (hz_to_mel(0.0), hz_to_mel(nyquist)),
    };
    let edges: Vec<f64> = (0..bands + 2)
        .map(|i| {
            let v = lo + (hi - lo) * i as f64 / (bands + 1) as f64;
            match spacing {
                Spacing::Linear => v,
                Spacing::Mel => mel_to_hz(v),
            }
        })
        .collect();
    let bin_hz = fs as f64 / frame_len as f64;
    let mut weights = Matrix::zeros(bins, bands);
    for k in 0..bins {
        let f = k as f64 * bin_hz;
        for m in 0..bands {
            let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
            let w = if f > left && f <= center {
                (f - left) / (center - left)
            } else if f > center && f < right {
                (right - f) / (right - center)
            } else {
                0.0
            };
            weights.set(k, m, w);
        }
    }
    Ok(Filterbank { weights, spacing, edges })
}

/// `spec * fb.weights`: compressed `T_f x N_B` band magnitudes.
pub fn compress(spec: &Matrix, fb: &Filterbank) -> Result<Matrix> {
    if spec.cols() != fb.weights.rows() {
        return Err(Error::Shape { expected: fb.weights.rows(), got: spec.cols() });
    }
    spec.matmul(&fb.weights)
}
