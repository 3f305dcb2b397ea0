//! Corpus manifests: one CSV row per recording.
//!
//! ```text
//! path,knee_id,subject_id,label
//! N001.wav,N001,S001,normal
//! ```
//!
//! Relative paths resolve against the manifest's directory.
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use kneeae_core::{Label, Recording};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_err, Error, Result};
use crate::wav::load_wav;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub knee_id: String,
    pub subject_id: String,
    pub label: Label,
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub path: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
        let entries = rdr.deserialize().collect::<Result<Vec<ManifestEntry>, _>>().map_err(csv_err)?;
        if entries.is_empty() {
            return Err(Error::Invalid(format!("{}: manifest lists no recordings", path.display())));
        }
        Ok(Self { path: path.to_path_buf(), entries })
    }

    pub fn write(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
        let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        for e in entries {
            w.serialize(e).map_err(csv_err)?;
        }
        w.flush().map_err(io_err(path))
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        let p = Path::new(&entry.path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }

    pub fn load(&self) -> Result<Vec<Recording>> {
        let recs = self
            .entries
            .iter()
            .map(|e| load_wav(&self.resolve(e), &e.knee_id, &e.subject_id, e.label))
            .collect::<Result<Vec<_>>>()?;
        kneeae_core::signal::check_labels(&recs)?;
        Ok(recs)
    }

    /// SHA-256 over the manifest rows and the bytes of every listed file.
    pub fn content_hash(&self) -> Result<String> {
        let mut h = Sha256::new();
        let mut buf = Vec::new();
        for e in &self.entries {
            h.update(format!("{}\0{}\0{}\0", e.knee_id, e.subject_id, e.label.as_str()).as_bytes());
            let path = self.resolve(e);
            buf.clear();
            File::open(&path).and_then(|mut f| f.read_to_end(&mut buf)).map_err(io_err(&path))?;
            h.update((buf.len() as u64).to_le_bytes());
            h.update(&buf);
        }
        Ok(hex::encode(h.finalize()))
    }
}
