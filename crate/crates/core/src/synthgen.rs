//! Synthetic gait-sound corpora.
//!
//! A recording is a train of strides. Each stride carries a heel-strike
//! transient at its start and a push-off transient at `push_off_phase`, both
//! exponentially damped sinusoids, over a white-noise floor. Abnormal knees
//! additionally get band-limited noise bursts during the stance phase (the
//! part of the stride between heel strike and push off). The burst power is
//! set so the average in-band power during stance rises by `gain_db` over the
//! noise floor; with `gain_db = 0` both classes come from the same
//! distribution.
//!
//! Every knee draws its own gains (uniform within `knee_jitter_db`) for the
//! transients, the noise floor and the burst band, and every 20 s block of a
//! recording walks at its own speed.
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::signal::{Label, Recording};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transient {
    pub center_hz: f64,
    pub decay_ms: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub center_hz: f64,
    pub bandwidth_hz: f64,
    pub gain_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub normal_knees: usize,
    pub abnormal_knees: usize,
    pub duration_s: f64,
    pub sample_rate: u32,
    pub stride_period_s: f64,
    /// Relative half-width of the per-block stride period variation.
    pub stride_jitter: f64,
    pub push_off_phase: f64,
    pub heel_strike: Transient,
    pub push_off: Transient,
    pub band: Band,
    pub noise_floor_db: f64,
    pub knee_jitter_db: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            normal_knees: 10,
            abnormal_knees: 10,
            duration_s: 300.0,
            sample_rate: 16_000,
            stride_period_s: 1.1,
            stride_jitter: 0.03,
            push_off_phase: 0.6,
            heel_strike: Transient { center_hz: 900.0, decay_ms: 8.0, amplitude: 1.0 },
            push_off: Transient { center_hz: 2000.0, decay_ms: 4.0, amplitude: 0.6 },
            band: Band { center_hz: 300.0, bandwidth_hz: 200.0, gain_db: 12.0 },
            noise_floor_db: -30.0,
            knee_jitter_db: 3.0,
            seed: 0,
        }
    }
}

/// Length of a walking-speed block.
const BLOCK_SECONDS: f64 = 20.0;
/// Peak level after normalisation.
pub const PEAK_LEVEL: f64 = 0.9;
const RAMP_SECONDS: f64 = 0.01;

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let nyq = f64::from(self.sample_rate) / 2.0;
        let bad = |m: &str| Err(Error::InvalidParameter(format!("synth spec: {m}")));
        if self.sample_rate == 0 || self.duration_s <= 0.0 || self.stride_period_s <= 0.0 {
            return bad("rate, duration and stride period must be positive");
        }
        if self.normal_knees + self.abnormal_knees == 0 {
            return bad("no knees requested");
        }
        for t in [self.heel_strike, self.push_off] {
            if !(t.center_hz > 0.0 && t.center_hz < nyq && t.decay_ms > 0.0) {
                return bad("transient frequency must lie in (0, Fs/2) with positive decay");
            }
        }
        let (lo, hi) = (self.band.center_hz - self.band.bandwidth_hz / 2.0, self.band.center_hz + self.band.bandwidth_hz / 2.0);
        if !(lo > 0.0 && hi < nyq) {
            return bad("discriminative band must lie inside (0, Fs/2)");
        }
        if !(self.band.gain_db >= 0.0) {
            return bad("abnormal gain must be non-negative");
        }
        if !(0.0..1.0).contains(&self.push_off_phase) || !(0.0..0.5).contains(&self.stride_jitter) {
            return bad("push-off phase must be in [0, 1) and stride jitter in [0, 0.5)");
        }
        Ok(())
    }

    pub fn knee_ids(&self) -> Vec<(alloc::string::String, Label)> {
        (0..self.normal_knees)
            .map(|i| (format!("N{:03}", i + 1), Label::Normal))
            .chain((0..self.abnormal_knees).map(|i| (format!("A{:03}", i + 1), Label::Abnormal)))
            .collect()
    }
}

/// Second-order section, direct form I.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    /// Band-pass with unit gain at the centre frequency.
    fn bandpass(center: f64, bandwidth: f64, fs: f64) -> Self {
        let w0 = 2.0 * PI * center / fs;
        let q = center / bandwidth;
        let alpha = w0.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        Biquad { b: [alpha / a0, 0.0, -alpha / a0], a: [-2.0 * w0.cos() / a0, (1.0 - alpha) / a0] }
    }

    fn run(&self, x: &mut [f64]) {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        for v in x.iter_mut() {
            let y = self.b[0] * *v + self.b[1] * x1 + self.b[2] * x2 - self.a[0] * y1 - self.a[1] * y2;
            x2 = x1;
            x1 = *v;
            y2 = y1;
            y1 = y;
            *v = y;
        }
    }
}

struct BandFilter {
    sections: [Biquad; 2],
    /// Output variance for unit-variance white input.
    gain: f64,
}

impl BandFilter {
    fn new(band: &Band, fs: f64) -> Self {
        let s = Biquad::bandpass(band.center_hz, band.bandwidth_hz, fs);
        let sections = [s, s];
        let mut h = vec![0.0; (fs as usize).max(4096)];
        h[0] = 1.0;
        for s in &sections {
            s.run(&mut h);
        }
        let gain = h.iter().map(|v| v * v).sum();
        Self { sections, gain }
    }

    fn run(&self, x: &mut [f64]) {
        for s in &self.sections {
            s.run(x);
        }
    }
}

fn db_gain(rng: &mut ChaCha8Rng, jitter_db: f64) -> f64 {
    let db = if jitter_db > 0.0 { rng.random_range(-jitter_db..=jitter_db) } else { 0.0 };
    10f64.powf(db / 20.0)
}

fn add_transient(out: &mut [f64], start: usize, t: &Transient, amp: f64, fs: f64) {
    let tau = t.decay_ms / 1000.0 * fs;
    let len = (8.0 * tau).ceil() as usize;
    let w = 2.0 * PI * t.center_hz / fs;
    for (n, o) in out.iter_mut().skip(start).take(len).enumerate() {
        let n = n as f64;
        *o += amp * (-n / tau).exp() * (w * n).sin();
    }
}

/// Stride onsets (in samples) with the walking speed redrawn per block.
fn stride_onsets(spec: &SynthSpec, len: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let fs = f64::from(spec.sample_rate);
    let block = (BLOCK_SECONDS * fs) as usize;
    let mut onsets = Vec::new();
    let mut t = rng.random_range(0.0..spec.stride_period_s) * fs;
    let mut current_block = usize::MAX;
    let mut period = spec.stride_period_s * fs;
    while (t as usize) < len {
        let b = t as usize / block;
        if b != current_block {
            current_block = b;
            let j = if spec.stride_jitter > 0.0 { rng.random_range(-spec.stride_jitter..=spec.stride_jitter) } else { 0.0 };
            period = spec.stride_period_s * (1.0 + j) * fs;
        }
        onsets.push((t as usize, period as usize));
        t += period;
    }
    onsets
}

fn synthesize(spec: &SynthSpec, label: Label, mut rng: ChaCha8Rng) -> Vec<f64> {
    let fs = f64::from(spec.sample_rate);
    let len = (spec.duration_s * fs).round() as usize;
    let transient_gain = db_gain(&mut rng, spec.knee_jitter_db);
    let noise_gain = db_gain(&mut rng, spec.knee_jitter_db);
    let band_gain = db_gain(&mut rng, spec.knee_jitter_db);

    let sigma = 10f64.powf(spec.noise_floor_db / 20.0) * noise_gain;
    let mut out: Vec<f64> = (0..len).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); sigma * z }).collect();
    let onsets = stride_onsets(spec, len, &mut rng);
    for &(start, period) in &onsets {
        add_transient(&mut out, start, &spec.heel_strike, spec.heel_strike.amplitude * transient_gain, fs);
        let push = start + (spec.push_off_phase * period as f64) as usize;
        add_transient(&mut out, push, &spec.push_off, spec.push_off.amplitude * transient_gain, fs);
    }

    if label == Label::Abnormal && spec.band.gain_db > 0.0 {
        let filter = BandFilter::new(&spec.band, fs);
        let floor_in_band = sigma * sigma * spec.band.bandwidth_hz / (fs / 2.0);
        let added = floor_in_band * (10f64.powf(spec.band.gain_db / 10.0) - 1.0);
        let scale = (added / filter.gain).sqrt() * band_gain;
        let mut burst: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
        filter.run(&mut burst);
        let ramp = (RAMP_SECONDS * fs) as usize;
        let mut gate = vec![0.0; len];
        for &(start, period) in &onsets {
            let stop = (start + (spec.push_off_phase * period as f64) as usize).min(len);
            let width = stop.saturating_sub(start);
            for (k, g) in gate[start.min(len)..stop].iter_mut().enumerate() {
                let edge = k.min(width - 1 - k);
                *g = if edge < ramp { 0.5 - 0.5 * (PI * edge as f64 / ramp as f64).cos() } else { 1.0 };
            }
        }
        for ((o, b), g) in out.iter_mut().zip(&burst).zip(&gate) {
            *o += scale * b * g;
        }
    }

    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v *= PEAK_LEVEL / peak);
    }
    out
}

/// Generates the corpus described by `spec`, normal knees first.
pub fn generate(spec: &SynthSpec) -> Result<Vec<Recording>> {
    spec.validate()?;
    spec.knee_ids()
        .into_iter()
        .enumerate()
        .map(|(i, (knee, label))| {
            let samples = synthesize(spec, label, rng::rng_for(spec.seed, &[rng::stream::SYNTH, i as u64]));
            Recording::new(samples, spec.sample_rate, knee.clone(), format!("S{}", &knee[1..]), label)
        })
        .collect()
}

/// Generates a single knee's recording; `index` follows the order of
/// [`SynthSpec::knee_ids`].
pub fn generate_one(spec: &SynthSpec, index: usize) -> Result<Recording> {
    spec.validate()?;
    let ids = spec.knee_ids();
    let (knee, label) = ids.get(index).cloned().ok_or_else(|| Error::InvalidParameter(format!("no knee {index}")))?;
    let samples = synthesize(spec, label, rng::rng_for(spec.seed, &[rng::stream::SYNTH, index as u64]));
    Recording::new(samples, spec.sample_rate, knee.clone(), format!("S{}", &knee[1..]), label)
}
