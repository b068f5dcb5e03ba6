//! File formats: float32 WAV, JSON-header + raw float32 payloads, CSV with
//! fixed 9-significant-digit formatting, and config digests.
//!
//! All writers are byte-deterministic for identical inputs; floats in CSV are
//! printed with exactly nine significant digits.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spectral::Spectrogram;
use crate::synth::{ImpulseResponse, Signal};

/// Nine-significant-digit scientific notation, the fixed CSV float format.
pub fn format_sig9(x: f64) -> String {
    // normalize negative zero so equal values print identically
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.8e}")
}

/// Hex SHA-256 of a JSON value's canonical string form (serde_json object
/// keys are ordered, so this is deterministic).
pub fn digest_json(value: &serde_json::Value) -> String {
    let s = value.to_string();
    let mut hasher = Sha256::new();
    hasher.update(s.as_bytes());
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    }
    let mut f =
        fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(bytes)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

// --- WAV (32-bit float PCM, mono) -----------------------------------------------

/// Write samples as a mono 32-bit float WAV file.
pub fn write_wav_f32(path: &Path, samples: &[f64], sample_rate: f64) -> Result<()> {
    let sr = sample_rate.round() as u32;
    let n = samples.len() as u32;
    let data_bytes = n * 4;
    let mut out = Vec::with_capacity(58 + data_bytes as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(50 + data_bytes).to_le_bytes()); // remaining size
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&3u16.to_le_bytes()); // IEEE float
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&sr.to_le_bytes());
    out.extend_from_slice(&(sr * 4).to_le_bytes()); // byte rate
    out.extend_from_slice(&4u16.to_le_bytes()); // block align
    out.extend_from_slice(&32u16.to_le_bytes());
    out.extend_from_slice(b"fact");
    out.extend_from_slice(&4u32.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_bytes.to_le_bytes());
    for &s in samples {
        out.extend_from_slice(&(s as f32).to_le_bytes());
    }
    write_file(path, &out)
}

/// Read a mono float WAV written by [`write_wav_f32`].
pub fn read_wav_f32(path: &Path) -> Result<(Vec<f64>, f64)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let fail = |msg: &str| Error::config(format!("{}: {msg}", path.display()));
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(fail("not a RIFF/WAVE file"));
    }
    let mut pos = 12usize;
    let mut sample_rate = 0u32;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body = &bytes[pos + 8..(pos + 8 + size).min(bytes.len())];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(fail("short fmt chunk"));
                }
                let format = u16::from_le_bytes(body[0..2].try_into().unwrap());
                let channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
                let bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
                if format != 3 || channels != 1 || bits != 32 {
                    return Err(fail("expected mono 32-bit float"));
                }
                sample_rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
            }
            b"data" => data = Some(body),
            _ => {}
        }
        pos += 8 + size + (size & 1);
    }
    let data = data.ok_or_else(|| fail("missing data chunk"))?;
    let samples = data
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok((samples, sample_rate as f64))
}

impl ImpulseResponse {
    pub fn write_wav(&self, path: &Path) -> Result<()> {
        write_wav_f32(path, &self.samples, self.sample_rate)
    }
}

impl Signal {
    pub fn write_wav(&self, path: &Path) -> Result<()> {
        write_wav_f32(path, &self.samples, self.sample_rate)
    }
}

// --- raw float32 + JSON header ---------------------------------------------------

/// Lossless exchange format: `<stem>.json` header next to a little-endian
/// float32 payload at `<stem>.f32`.
pub fn write_raw_f32(stem: &Path, samples: &[f64], sample_rate: f64, kind: &str) -> Result<()> {
    let header = serde_json::json!({
        "format": "f32le",
        "kind": kind,
        "length": samples.len(),
        "sample_rate_hz": sample_rate,
    });
    write_file(
        &stem.with_extension("json"),
        serde_json::to_string_pretty(&header)?.as_bytes(),
    )?;
    let mut payload = Vec::with_capacity(samples.len() * 4);
    for &s in samples {
        payload.extend_from_slice(&(s as f32).to_le_bytes());
    }
    write_file(&stem.with_extension("f32"), &payload)
}

// --- CSV --------------------------------------------------------------------------

/// UTF-8 comma-separated table with a header row; floats at nine significant
/// digits.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| format_sig9(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

/// Theory moment table: one row per frequency with the closed-form entries
/// and the asymptotic variance.
pub fn write_moment_table(path: &Path, moments: &[crate::moments::SpectralMoment]) -> Result<()> {
    let rows: Vec<Vec<f64>> = moments
        .iter()
        .map(|m| {
            vec![
                m.f,
                m.sigma_plus_sq,
                m.sigma_minus_sq,
                m.cross_cov,
                m.total_variance(),
            ]
        })
        .collect();
    write_csv(
        path,
        &["f_hz", "sigma_plus_sq", "sigma_minus_sq", "cross_cov", "asymptotic_var"],
        &rows,
    )
}

/// The same table as JSON records.
pub fn write_moment_table_json(
    path: &Path,
    moments: &[crate::moments::SpectralMoment],
) -> Result<()> {
    let body = serde_json::to_string_pretty(&moments)?;
    write_file(path, body.as_bytes())
}

/// Spectrogram exchange format: JSON header plus interleaved (re, im)
/// float32 payload, frame-major.
pub fn write_spectrogram_raw(stem: &Path, sg: &Spectrogram) -> Result<()> {
    let header = serde_json::json!({
        "format": "c64le_interleaved_f32",
        "n_frames": sg.n_frames(),
        "n_bins": sg.n_bins(),
        "win_len": sg.config.win_len,
        "hop": sg.config.hop,
        "sample_rate_hz": sg.config.sample_rate,
        "signal_len": sg.signal_len,
    });
    write_file(
        &stem.with_extension("json"),
        serde_json::to_string_pretty(&header)?.as_bytes(),
    )?;
    let mut payload = Vec::with_capacity(sg.data().len() * 8);
    for c in sg.data() {
        payload.extend_from_slice(&(c.re as f32).to_le_bytes());
        payload.extend_from_slice(&(c.im as f32).to_le_bytes());
    }
    write_file(&stem.with_extension("f32"), &payload)
}

/// CSV matrices of spectrogram magnitude and phase (rows = frames).
pub fn write_spectrogram_csv(
    mag_path: &Path,
    phase_path: &Path,
    sg: &Spectrogram,
) -> Result<()> {
    let header: Vec<String> = (0..sg.n_bins()).map(|k| format!("bin_{k}")).collect();
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut mags = Vec::with_capacity(sg.n_frames());
    let mut phases = Vec::with_capacity(sg.n_frames());
    for t in 0..sg.n_frames() {
        let mut mrow = Vec::with_capacity(sg.n_bins());
        let mut prow = Vec::with_capacity(sg.n_bins());
        for k in 0..sg.n_bins() {
            let z = sg.get(t, k);
            mrow.push(z.norm());
            prow.push(z.arg());
        }
        mags.push(mrow);
        phases.push(prow);
    }
    write_csv(mag_path, &header_refs, &mags)?;
    write_csv(phase_path, &header_refs, &phases)
}
