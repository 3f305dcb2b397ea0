//! On-disk feature-set cache keyed by corpus content hash, frame length and
//! band count.
//!
//! Each entry is a JSON header (`<key>.json`: tag, configuration, vector ids,
//! row keys) next to the raw matrix as little-endian `f64` (`<key>.bin`).
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use kneeae_core::experiment::FeatureSource;
use kneeae_core::features::{extract, FeatureConfig, FeatureId, FeatureSet, RowKey, SetTag};
use kneeae_core::signal::{prepare_segments, ANALYSIS_RATE, SEGMENT_SECONDS};
use kneeae_core::{Matrix, Runner, Segment};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::manifest::Manifest;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    tag: SetTag,
    config: FeatureConfig,
    rows: Vec<RowKey>,
    vectors: Vec<FeatureId>,
    cols: usize,
}

#[derive(Debug, Clone)]
pub struct FeatureCache {
    dir: PathBuf,
    corpus_hash: String,
}

impl FeatureCache {
    pub fn new(dir: impl Into<PathBuf>, corpus_hash: impl Into<String>) -> Self {
        Self { dir: dir.into(), corpus_hash: corpus_hash.into() }
    }

    pub fn key(&self, config: &FeatureConfig, tag: SetTag) -> String {
        format!(
            "{}-{}-l{}-nb{}-fs{}-seg{}{}",
            &self.corpus_hash[..self.corpus_hash.len().min(16)],
            tag,
            config.frame_ms,
            config.bands,
            config.sample_rate,
            config.segment_seconds,
            if config.stft_deltas { "-d" } else { "" }
        )
    }

    fn paths(&self, config: &FeatureConfig, tag: SetTag) -> (PathBuf, PathBuf) {
        let k = self.key(config, tag);
        (self.dir.join(format!("{k}.json")), self.dir.join(format!("{k}.bin")))
    }

    pub fn load(&self, config: &FeatureConfig, tag: SetTag) -> Result<Option<FeatureSet>> {
        let (hp, bp) = self.paths(config, tag);
        if !hp.exists() || !bp.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&hp).map_err(io_err(&hp))?;
        let h: Header = serde_json::from_str(&text).map_err(|source| Error::Json { path: hp.clone(), source })?;
        let bytes = fs::read(&bp).map_err(io_err(&bp))?;
        if bytes.len() != h.rows.len() * h.cols * 8 || h.tag != tag || h.config != *config {
            return Ok(None);
        }
        let data: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let data = Matrix::from_vec(h.rows.len(), h.cols, data)?;
        Ok(Some(FeatureSet { tag: h.tag, config: h.config, data, vectors: h.vectors, rows: h.rows }))
    }

    pub fn store(&self, set: &FeatureSet) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(io_err(&self.dir))?;
        let (hp, bp) = self.paths(&set.config, set.tag);
        let h = Header {
            tag: set.tag,
            config: set.config,
            rows: set.rows.clone(),
            vectors: set.vectors.clone(),
            cols: set.data.cols(),
        };
        let bytes: Vec<u8> = set.data.as_slice().iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(&bp, bytes).map_err(io_err(&bp))?;
        let text = serde_json::to_string(&h).map_err(|source| Error::Json { path: hp.clone(), source })?;
        fs::write(&hp, text).map_err(io_err(&hp))
    }
}

/// Feature sets for a manifest's corpus, served from the cache when
/// possible. The audio is loaded and segmented at most once, on the first
/// miss.
pub struct CorpusSource<'a, R: Runner> {
    manifest: &'a Manifest,
    cache: Option<FeatureCache>,
    runner: &'a R,
    segments: OnceLock<Vec<Segment>>,
}

impl<'a, R: Runner> CorpusSource<'a, R> {
    /// `cache_dir = None` bypasses the cache.
    pub fn new(manifest: &'a Manifest, cache_dir: Option<&Path>, runner: &'a R) -> Result<Self> {
        let cache = match cache_dir {
            Some(d) => Some(FeatureCache::new(d, manifest.content_hash()?)),
            None => None,
        };
        Ok(Self { manifest, cache, runner, segments: OnceLock::new() })
    }

    pub fn segments(&self) -> Result<&[Segment]> {
        if let Some(s) = self.segments.get() {
            return Ok(s);
        }
        let recs = self.manifest.load()?;
        let segs = prepare_segments(&recs, ANALYSIS_RATE, SEGMENT_SECONDS)?;
        Ok(self.segments.get_or_init(|| segs))
    }

    pub fn sets(&self, config: &FeatureConfig, tags: &[SetTag]) -> Result<Vec<FeatureSet>> {
        let mut out: Vec<Option<FeatureSet>> = Vec::with_capacity(tags.len());
        let mut missing = Vec::new();
        for &t in tags {
            let hit = match &self.cache {
                Some(c) => c.load(config, t)?,
                None => None,
            };
            if hit.is_none() {
                missing.push(t);
            }
            out.push(hit);
        }
        if !missing.is_empty() {
            let fresh = extract(self.segments()?, config, &missing, self.runner)?;
            for set in fresh {
                if let Some(c) = &self.cache {
                    c.store(&set)?;
                }
                let slot = tags.iter().position(|&t| t == set.tag).unwrap();
                out[slot] = Some(set);
            }
        }
        Ok(out.into_iter().map(|s| s.expect("every tag extracted")).collect())
    }
}

impl<R: Runner> FeatureSource for CorpusSource<'_, R> {
    fn rows(&self) -> kneeae_core::Result<Vec<RowKey>> {
        let segs = self.segments().map_err(core_err)?;
        let mut rows: Vec<RowKey> =
            segs.iter().map(|s| RowKey { knee_id: s.knee_id.clone(), index: s.index, label: s.label }).collect();
        rows.sort();
        Ok(rows)
    }

    fn feature_sets(&self, config: &FeatureConfig, tags: &[SetTag]) -> kneeae_core::Result<Vec<FeatureSet>> {
        self.sets(config, tags).map_err(core_err)
    }
}

fn core_err(e: Error) -> kneeae_core::Error {
    match e {
        Error::Core(c) => c,
        other => kneeae_core::Error::InvalidParameter(other.to_string()),
    }
}
