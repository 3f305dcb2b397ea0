//! Trajectory features: delta regression, the 11-statistic summary and
//! assembly of the five per-segment feature sets.
//!
//! | tag | source matrix                         | vectors      |
//! |-----|---------------------------------------|--------------|
//! | `D` | mel-compressed magnitudes             | `3 N_B`      |
//! | `E` | linear-compressed magnitudes          | `3 N_B`      |
//! | `F` | full magnitude spectrum               | `K` (static) |
//! | `L` | LFCC (linear bands, log, DCT)         | `3 N_B`      |
//! | `M` | MFCC (mel bands, log, DCT)            | `3 N_B`      |
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::cepstral::{cepstra, Flavor};
use crate::error::{Error, Result};
use crate::exec::Runner;
use crate::matrix::Matrix;
use crate::signal::{Label, Segment};
use crate::spectral::{self, bin_count, compress, frame_samples, make_filterbank, Analyzer, Filterbank, Spacing};

pub const STATS_PER_VECTOR: usize = 11;
pub const STAT_NAMES: [&str; STATS_PER_VECTOR] =
    ["mean", "kurtosis", "variance", "skewness", "max", "min", "p10", "p25", "p50", "p75", "p90"];
const PERCENTILES: [f64; 5] = [10.0, 25.0, 50.0, 75.0, 90.0];

/// Regression span for first derivatives.
pub const DELTA_SPAN: usize = 4;
/// Regression span applied to the deltas to get second derivatives.
pub const DELTA_DELTA_SPAN: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SetTag {
    D,
    E,
    F,
    L,
    M,
}

impl SetTag {
    pub const ALL: [SetTag; 5] = [SetTag::D, SetTag::E, SetTag::F, SetTag::L, SetTag::M];

    pub fn parse(s: &str) -> Option<SetTag> {
        match s.trim() {
            "D" | "d" => Some(SetTag::D),
            "E" | "e" => Some(SetTag::E),
            "F" | "f" => Some(SetTag::F),
            "L" | "l" => Some(SetTag::L),
            "M" | "m" => Some(SetTag::M),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            SetTag::D => 'D',
            SetTag::E => 'E',
            SetTag::F => 'F',
            SetTag::L => 'L',
            SetTag::M => 'M',
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            SetTag::D => "mel-compressed spectrum",
            SetTag::E => "linear-compressed spectrum",
            SetTag::F => "full magnitude spectrum",
            SetTag::L => "LFCC",
            SetTag::M => "MFCC",
        }
    }
}

impl fmt::Display for SetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Identity of one 11-dimensional feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureId {
    pub set: SetTag,
    /// Band, bin or cepstral coefficient index (zero-based).
    pub coeff: usize,
    /// 0 static, 1 delta, 2 delta-delta.
    pub order: u8,
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}d{}", self.set, self.coeff, self.order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub stats: [f64; STATS_PER_VECTOR],
    pub source: FeatureId,
}

/// Extraction parameters shared by all five sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub frame_ms: f64,
    pub bands: usize,
    pub sample_rate: u32,
    pub segment_seconds: f64,
    /// Add delta and delta-delta vectors to the full-spectrum set.
    pub stft_deltas: bool,
}

impl FeatureConfig {
    pub fn new(frame_ms: f64, bands: usize) -> Self {
        Self {
            frame_ms,
            bands,
            sample_rate: crate::signal::ANALYSIS_RATE,
            segment_seconds: crate::signal::SEGMENT_SECONDS,
            stft_deltas: false,
        }
    }

    pub fn frame_len(&self) -> usize {
        frame_samples(self.frame_ms, self.sample_rate)
    }

    pub fn bins(&self) -> usize {
        bin_count(self.frame_len())
    }

    pub fn bin_hz(&self) -> f64 {
        self.sample_rate as f64 / self.frame_len() as f64
    }

    /// Number of feature vectors per segment in set `tag`.
    pub fn vector_count(&self, tag: SetTag) -> usize {
        match tag {
            SetTag::F if self.stft_deltas => 3 * self.bins(),
            SetTag::F => self.bins(),
            _ => 3 * self.bands,
        }
    }

    pub fn vector_ids(&self, tag: SetTag) -> Vec<FeatureId> {
        let per_order = match tag {
            SetTag::F => self.bins(),
            _ => self.bands,
        };
        let orders = self.vector_count(tag) / per_order;
        (0..orders as u8)
            .flat_map(|order| (0..per_order).map(move |coeff| FeatureId { set: tag, coeff, order }))
            .collect()
    }

    /// Centre frequency in Hz of a spectral feature (sets D, E, F). Cepstral
    /// coefficients have no single frequency.
    pub fn frequency_of(&self, id: FeatureId) -> Option<f64> {
        match id.set {
            SetTag::F => Some(id.coeff as f64 * self.bin_hz()),
            SetTag::D | SetTag::E => {
                let spacing = if id.set == SetTag::D { Spacing::Mel } else { Spacing::Linear };
                let fb = make_filterbank(self.bins(), self.frame_len(), self.sample_rate, self.bands, spacing).ok()?;
                fb.centers().get(id.coeff).copied()
            }
            _ => None,
        }
    }
}

/// Provenance of one segment row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowKey {
    pub knee_id: String,
    pub index: usize,
    pub label: Label,
}

/// One feature set: `c` segments by `V * 11` statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub tag: SetTag,
    pub config: FeatureConfig,
    pub data: Matrix,
    pub vectors: Vec<FeatureId>,
    pub rows: Vec<RowKey>,
}

impl FeatureSet {
    pub fn vector_count(&self) -> usize {
        self.vectors.len()
    }

    /// Column range holding the 11 statistics of vector `v`.
    pub fn vector_columns(&self, v: usize) -> Range<usize> {
        v * STATS_PER_VECTOR..(v + 1) * STATS_PER_VECTOR
    }

    /// Columns of several vectors, concatenated in the given order.
    pub fn columns_of(&self, vectors: &[usize]) -> Vec<usize> {
        vectors.iter().flat_map(|&v| self.vector_columns(v)).collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.vectors
            .iter()
            .flat_map(|id| STAT_NAMES.iter().map(move |s| format!("{}:{}:{}:{}", id.set, id.coeff, id.order, s)))
            .collect()
    }
}

/// Regression delta with span `span` and replicated edges.
pub fn delta(series: &[f64], span: usize) -> Vec<f64> {
    let n = series.len();
    if n == 0 || span == 0 {
        return alloc::vec![0.0; n];
    }
    let denom = 2.0 * (1..=span).map(|u| (u * u) as f64).sum::<f64>();
    let last = n - 1;
    (0..n)
        .map(|t| {
            let mut acc = 0.0;
            for u in 1..=span {
                let fwd = series[(t + u).min(last)];
                let back = series[t.saturating_sub(u)];
                acc += u as f64 * (fwd - back);
            }
            acc / denom
        })
        .collect()
}

/// The 11 statistics of one distribution, in [`STAT_NAMES`] order.
///
/// Moments are population moments; a zero-variance column reports zero
/// skewness and kurtosis. Percentiles interpolate linearly between order
/// statistics at zero-based rank `(n - 1) p / 100`.
pub fn stats_of(values: &[f64], scratch: &mut Vec<f64>) -> [f64; STATS_PER_VECTOR] {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let degenerate = m2 <= 1e-30 * (1.0 + mean * mean);
    let (skew, kurt) = if degenerate { (0.0, 0.0) } else { (m3 / m2.powf(1.5), m4 / (m2 * m2)) };
    let variance = if degenerate { 0.0 } else { m2 };

    scratch.clear();
    scratch.extend_from_slice(values);
    scratch.sort_unstable_by(f64::total_cmp);
    let last = scratch.len() - 1;
    let pct = |p: f64| -> f64 {
        let rank = last as f64 * p / 100.0;
        let lo = rank.floor() as usize;
        let hi = (lo + 1).min(last);
        let frac = rank - lo as f64;
        scratch[lo] + frac * (scratch[hi] - scratch[lo])
    };
    let ps: [f64; 5] = PERCENTILES.map(pct);
    [mean, kurt, variance, skew, scratch[last], scratch[0], ps[0], ps[1], ps[2], ps[3], ps[4]]
}

/// Statistics of every column of a `T_f x N` matrix.
pub fn stats11(matrix: &Matrix) -> Result<Vec<[f64; STATS_PER_VECTOR]>> {
    if matrix.rows() < 2 {
        return Err(Error::InsufficientFrames(matrix.rows()));
    }
    let cols = matrix.transpose();
    let mut scratch = Vec::with_capacity(matrix.rows());
    Ok(cols.iter_rows().map(|c| stats_of(c, &mut scratch)).collect())
}

/// Precomputed per-configuration state for extraction.
#[derive(Debug, Clone)]
pub struct Extractor {
    config: FeatureConfig,
    analyzer: Analyzer,
    linear: Filterbank,
    mel: Filterbank,
}

impl Extractor {
    pub fn new(config: FeatureConfig) -> Result<Self> {
        let ls = config.frame_len();
        if !(config.frame_ms > 0.0) || ls < 2 {
            return Err(Error::InvalidFrameLength { samples: ls, segment_len: 0 });
        }
        let k = bin_count(ls);
        Ok(Self {
            config,
            analyzer: Analyzer::new(ls),
            linear: make_filterbank(k, ls, config.sample_rate, config.bands, Spacing::Linear)?,
            mel: make_filterbank(k, ls, config.sample_rate, config.bands, Spacing::Mel)?,
        })
    }

    /// Like [`Extractor::new`] but tolerates a filterbank that does not fit;
    /// only set `F` can then be extracted.
    fn for_tags(config: FeatureConfig, tags: &[SetTag]) -> Result<Self> {
        if tags.iter().all(|&t| t == SetTag::F) {
            let ls = config.frame_len();
            if !(config.frame_ms > 0.0) || ls < 2 {
                return Err(Error::InvalidFrameLength { samples: ls, segment_len: 0 });
            }
            let empty = Filterbank { weights: Matrix::zeros(0, 0), spacing: Spacing::Linear, edges: Vec::new() };
            return Ok(Self {
                config,
                analyzer: Analyzer::new(ls),
                linear: empty.clone(),
                mel: Filterbank { spacing: Spacing::Mel, ..empty },
            });
        }
        Self::new(config)
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    /// Feature rows of one segment, one per requested tag.
    pub fn segment_rows(&self, seg: &Segment, tags: &[SetTag]) -> Result<Vec<Vec<f64>>> {
        let ls = self.config.frame_len();
        if seg.sample_rate != self.config.sample_rate {
            return Err(Error::InvalidParameter(format!(
                "segment rate {} differs from analysis rate {}",
                seg.sample_rate, self.config.sample_rate
            )));
        }
        if ls > seg.samples.len() {
            return Err(Error::InvalidFrameLength { samples: ls, segment_len: seg.samples.len() });
        }
        let spec = self.analyzer.spectrogram(&seg.samples);
        if spec.rows() < 2 {
            return Err(Error::InsufficientFrames(spec.rows()));
        }
        let need_lin = tags.iter().any(|t| matches!(t, SetTag::E | SetTag::L));
        let need_mel = tags.iter().any(|t| matches!(t, SetTag::D | SetTag::M));
        let lin = if need_lin { Some(compress(&spec, &self.linear)?) } else { None };
        let mel = if need_mel { Some(compress(&spec, &self.mel)?) } else { None };
        tags.iter()
            .map(|tag| match tag {
                SetTag::F => Ok(trajectory_stats(&spec, self.config.stft_deltas)),
                SetTag::E => Ok(trajectory_stats(lin.as_ref().unwrap(), true)),
                SetTag::D => Ok(trajectory_stats(mel.as_ref().unwrap(), true)),
                SetTag::L => Ok(trajectory_stats(&cepstra(lin.as_ref().unwrap(), Flavor::Linear).values, true)),
                SetTag::M => Ok(trajectory_stats(&cepstra(mel.as_ref().unwrap(), Flavor::Mel).values, true)),
            })
            .collect()
    }
}

/// Statics of every column, then (optionally) all deltas, then all
/// delta-deltas; 11 statistics per vector.
fn trajectory_stats(m: &Matrix, with_deltas: bool) -> Vec<f64> {
    let cols = m.transpose();
    let orders = if with_deltas { 3 } else { 1 };
    let mut out = Vec::with_capacity(cols.rows() * orders * STATS_PER_VECTOR);
    let mut scratch = Vec::with_capacity(m.rows());
    for c in cols.iter_rows() {
        out.extend_from_slice(&stats_of(c, &mut scratch));
    }
    if with_deltas {
        let deltas: Vec<Vec<f64>> = cols.iter_rows().map(|c| delta(c, DELTA_SPAN)).collect();
        for d in &deltas {
            out.extend_from_slice(&stats_of(d, &mut scratch));
        }
        for d in &deltas {
            out.extend_from_slice(&stats_of(&delta(d, DELTA_DELTA_SPAN), &mut scratch));
        }
    }
    out
}

/// Extract the requested sets from `segments`. Rows are ordered by
/// `(knee_id, index)`.
pub fn extract<R: Runner>(segments: &[Segment], config: &FeatureConfig, tags: &[SetTag], runner: &R) -> Result<Vec<FeatureSet>> {
    if segments.is_empty() {
        return Err(Error::EmptyInput("no segments to extract"));
    }
    let extractor = Extractor::for_tags(*config, tags)?;
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by(|&a, &b| segments[a].knee_id.cmp(&segments[b].knee_id).then(segments[a].index.cmp(&segments[b].index)));
    let per_segment: Vec<Result<Vec<Vec<f64>>>> =
        runner.map(order.len(), |i| extractor.segment_rows(&segments[order[i]], tags));
    let mut per_segment: Vec<Vec<Vec<f64>>> = per_segment.into_iter().collect::<Result<_>>()?;

    let rows: Vec<RowKey> = order
        .iter()
        .map(|&i| RowKey { knee_id: segments[i].knee_id.clone(), index: segments[i].index, label: segments[i].label })
        .collect();
    let mut sets = Vec::with_capacity(tags.len());
    for &tag in tags.iter().rev() {
        let vectors = config.vector_ids(tag);
        let width = vectors.len() * STATS_PER_VECTOR;
        let mut data = Vec::with_capacity(width * rows.len());
        for seg_rows in per_segment.iter_mut() {
            let row = seg_rows.pop().expect("one row per tag");
            debug_assert_eq!(row.len(), width);
            data.extend_from_slice(&row);
        }
        sets.push(FeatureSet { tag, config: *config, data: Matrix::from_vec(rows.len(), width, data)?, vectors, rows: rows.clone() });
    }
    sets.reverse();
    Ok(sets)
}

/// All five sets, in `D, E, F, L, M` order.
pub fn build_feature_sets<R: Runner>(segments: &[Segment], config: &FeatureConfig, runner: &R) -> Result<Vec<FeatureSet>> {
    extract(segments, config, &SetTag::ALL, runner)
}

/// Bins the full-spectrum set would have for a frame length; convenience for
/// callers that size results before extracting.
pub fn spectrum_vectors(frame_ms: f64, rate: u32) -> usize {
    spectral::bin_count(frame_samples(frame_ms, rate))
}
