//! CSV and JSON outputs.
use std::fs;
use std::path::Path;

use kneeae_core::features::{FeatureConfig, FeatureSet, SetTag};
use kneeae_core::metrics::RocCurve;
use kneeae_core::spectral::Filterbank;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv { path: path.to_path_buf(), source })
}

fn csv_row<I, T>(w: &mut csv::Writer<fs::File>, path: &Path, row: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(row).map_err(|source| Error::Csv { path: path.to_path_buf(), source })
}

/// Extraction parameters stored next to a feature CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSidecar {
    pub feature_set: SetTag,
    pub description: String,
    pub frame_ms: f64,
    pub frame_samples: usize,
    pub bands: usize,
    pub sample_rate: u32,
    pub segment_seconds: f64,
    pub stft_deltas: bool,
    pub vectors: usize,
    pub columns: usize,
    pub rows: usize,
    pub corpus_sha256: Option<String>,
}

impl FeatureSidecar {
    pub fn new(set: &FeatureSet, corpus_sha256: Option<String>) -> Self {
        let c: &FeatureConfig = &set.config;
        Self {
            feature_set: set.tag,
            description: set.tag.describe().to_string(),
            frame_ms: c.frame_ms,
            frame_samples: c.frame_len(),
            bands: c.bands,
            sample_rate: c.sample_rate,
            segment_seconds: c.segment_seconds,
            stft_deltas: c.stft_deltas,
            vectors: set.vector_count(),
            columns: set.data.cols(),
            rows: set.data.rows(),
            corpus_sha256,
        }
    }
}

/// One row per segment: `knee_id, segment, label`, then every feature column
/// named `<set>:<coefficient>:<order>:<statistic>`. The sidecar goes to
/// `<path>.json`.
pub fn write_feature_set(path: &Path, set: &FeatureSet, corpus_sha256: Option<String>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let header = ["knee_id".to_string(), "segment".into(), "label".into()].into_iter().chain(set.column_names());
    csv_row(&mut w, path, header)?;
    for (key, row) in set.rows.iter().zip(set.data.iter_rows()) {
        let fields = [key.knee_id.clone(), key.index.to_string(), key.label.as_str().to_string()]
            .into_iter()
            .chain(row.iter().map(|v| v.to_string()));
        csv_row(&mut w, path, fields)?;
    }
    w.flush().map_err(io_err(path))?;
    let mut side = path.as_os_str().to_owned();
    side.push(".json");
    write_json(Path::new(&side), &FeatureSidecar::new(set, corpus_sha256))
}

/// `bin, hz, band_0 .. band_{N-1}`.
pub fn write_filterbank(path: &Path, fb: &Filterbank, bin_hz: f64) -> Result<()> {
    let mut w = csv_writer(path)?;
    let header = ["bin".to_string(), "hz".into()].into_iter().chain((0..fb.bands()).map(|b| format!("band_{b}")));
    csv_row(&mut w, path, header)?;
    for k in 0..fb.weights.rows() {
        let fields = [k.to_string(), (k as f64 * bin_hz).to_string()]
            .into_iter()
            .chain(fb.weights.row(k).iter().map(|v| v.to_string()));
        csv_row(&mut w, path, fields)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_roc(path: &Path, roc: &RocCurve) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_row(&mut w, path, ["threshold", "fpr", "tpr"])?;
    for p in &roc.points {
        csv_row(&mut w, path, [p.threshold.to_string(), p.fpr.to_string(), p.tpr.to_string()])?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    csv_row(&mut w, path, header)?;
    for r in rows {
        csv_row(&mut w, path, r)?;
    }
    w.flush().map_err(io_err(path))
}
