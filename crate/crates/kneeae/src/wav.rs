//! PCM WAV input and output.
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use kneeae_core::{Label, Recording};

use crate::error::{Error, Result};

fn format_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Format { path: path.to_path_buf(), message: e.to_string() }
}

/// Reads the first channel of a PCM (integer or 32-bit float) WAV file,
/// scaled to `[-1, 1]`.
pub fn read_wav(path: &Path) -> Result<(Vec<f64>, u32)> {
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(source) => Error::Io { path: path.to_path_buf(), source },
        other => format_err(path, other),
    })?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;
    let samples: Vec<f64> = match spec.sample_format {
        SampleFormat::Int => {
            let full = (1i64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .into_samples::<i32>()
                .step_by(channels)
                .map(|s| s.map(|v| v as f64 / full))
                .collect::<Result<_, _>>()
                .map_err(|e| format_err(path, e))?
        }
        SampleFormat::Float => reader
            .into_samples::<f32>()
            .step_by(channels)
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(|e| format_err(path, e))?,
    };
    if samples.is_empty() {
        return Err(Error::EmptyAudio(path.to_path_buf()));
    }
    Ok((samples, spec.sample_rate))
}

pub fn load_wav(path: &Path, knee_id: &str, subject_id: &str, label: Label) -> Result<Recording> {
    let (samples, rate) = read_wav(path)?;
    Ok(Recording::new(samples, rate, knee_id, subject_id, label)?)
}

/// Writes mono 16-bit PCM; values outside `[-1, 1]` are clipped.
pub fn write_wav(path: &Path, samples: &[f64], sample_rate: u32) -> Result<()> {
    let spec = WavSpec { channels: 1, sample_rate, bits_per_sample: 16, sample_format: SampleFormat::Int };
    let mut w = WavWriter::create(path, spec).map_err(|e| format_err(path, e))?;
    for &s in samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        w.write_sample(v).map_err(|e| format_err(path, e))?;
    }
    w.finalize().map_err(|e| format_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        let x: Vec<f64> = (0..100).map(|i| (i as f64 / 10.0).sin() * 0.5).collect();
        write_wav(&p, &x, 16_000).unwrap();
        let (y, fs) = read_wav(&p).unwrap();
        assert_eq!(fs, 16_000);
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1.0 / 32767.0));

        let empty = dir.path().join("e.wav");
        write_wav(&empty, &[], 8000).unwrap();
        assert!(matches!(read_wav(&empty), Err(Error::EmptyAudio(_))));

        let junk = dir.path().join("j.wav");
        std::fs::write(&junk, b"RIFFnonsense").unwrap();
        assert!(matches!(read_wav(&junk), Err(Error::Format { .. })));
    }

    #[test]
    fn first_channel_of_stereo_24_bit() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        let spec = WavSpec { channels: 2, sample_rate: 48_000, bits_per_sample: 24, sample_format: SampleFormat::Int };
        let mut w = WavWriter::create(&p, spec).unwrap();
        for _ in 0..10 {
            w.write_sample(1 << 22).unwrap();
            w.write_sample(-(1 << 23)).unwrap();
        }
        w.finalize().unwrap();
        let (y, fs) = read_wav(&p).unwrap();
        assert_eq!((y.len(), fs), (10, 48_000));
        assert!(y.iter().all(|&v| v == 0.5));
    }
}
