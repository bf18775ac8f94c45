//! Mono 16-bit PCM WAV reading and writing.
//!
//! Only the formats the codec operates on are accepted: single channel,
//! 16-bit little-endian PCM at 16 kHz or 24 kHz. Anything else is rejected
//! with an error naming the offending property.

use std::io::Write;
use std::path::Path;

use crate::error::{CodecError, Result};
use crate::frontend::AudioSignal;

/// Sample rates the codec accepts.
pub const SUPPORTED_RATES: [u32; 2] = [16000, 24000];

fn u16_at(bytes: &[u8], pos: usize) -> Result<u16> {
    bytes
        .get(pos..pos + 2)
        .map(|b| u16::from_le_bytes(b.try_into().unwrap()))
        .ok_or(CodecError::Truncated {
            expected: pos + 2,
            actual: bytes.len(),
        })
}

fn u32_at(bytes: &[u8], pos: usize) -> Result<u32> {
    bytes
        .get(pos..pos + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .ok_or(CodecError::Truncated {
            expected: pos + 4,
            actual: bytes.len(),
        })
}

/// Parses a WAV byte buffer into a unit-scale signal.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioSignal> {
    if bytes.get(0..4) != Some(b"RIFF") {
        return Err(CodecError::Format("missing RIFF magic".into()));
    }
    if bytes.get(8..12) != Some(b"WAVE") {
        return Err(CodecError::Format("missing WAVE form type".into()));
    }
    let mut pos = 12usize;
    let mut format: Option<(u16, u16, u32, u16)> = None;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4)? as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(size).ok_or_else(|| {
            CodecError::Format("chunk size overflows the buffer".into())
        })?;
        if body_end > bytes.len() {
            return Err(CodecError::Truncated {
                expected: body_end,
                actual: bytes.len(),
            });
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(CodecError::Format(format!(
                        "fmt chunk too short: {size} bytes"
                    )));
                }
                format = Some((
                    u16_at(bytes, body_start)?,
                    u16_at(bytes, body_start + 2)?,
                    u32_at(bytes, body_start + 4)?,
                    u16_at(bytes, body_start + 14)?,
                ));
            }
            b"data" => data = Some(&bytes[body_start..body_end]),
            _ => {}
        }
        // Chunks are word-aligned; odd sizes carry a pad byte.
        pos = body_end + (size & 1);
    }
    let Some((audio_format, channels, sample_rate, bits)) = format else {
        return Err(CodecError::Format("missing fmt chunk".into()));
    };
    if audio_format != 1 {
        return Err(CodecError::Format(format!(
            "unsupported audio format {audio_format} (only PCM = 1)"
        )));
    }
    if channels != 1 {
        return Err(CodecError::Format(format!(
            "unsupported channel count {channels} (only mono)"
        )));
    }
    if bits != 16 {
        return Err(CodecError::Format(format!(
            "unsupported bit depth {bits} (only 16-bit)"
        )));
    }
    if !SUPPORTED_RATES.contains(&sample_rate) {
        return Err(CodecError::Format(format!(
            "unsupported sample rate {sample_rate} (accepted: {SUPPORTED_RATES:?})"
        )));
    }
    let Some(data) = data else {
        return Err(CodecError::Format("missing data chunk".into()));
    };
    if data.len() % 2 != 0 {
        return Err(CodecError::Format(format!(
            "data chunk holds {} bytes, not a whole number of 16-bit samples",
            data.len()
        )));
    }
    let samples: Vec<f32> = data
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes(b.try_into().unwrap()) as f32 / 32768.0)
        .collect();
    AudioSignal::new(samples, sample_rate)
}

/// Serializes a signal as mono 16-bit PCM. Samples are clamped to [-1, 1].
pub fn encode_wav(signal: &AudioSignal) -> Result<Vec<u8>> {
    if !SUPPORTED_RATES.contains(&signal.sample_rate()) {
        return Err(CodecError::Format(format!(
            "unsupported sample rate {} (accepted: {SUPPORTED_RATES:?})",
            signal.sample_rate()
        )));
    }
    let data_len = signal.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&signal.sample_rate().to_le_bytes());
    out.extend_from_slice(&(signal.sample_rate() * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in signal.samples() {
        // Symmetric 1/32768 scaling keeps grid-aligned samples fixed points
        // of the write/read pair.
        let v = (s.clamp(-1.0, 1.0) * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Reads and validates a WAV file.
pub fn read_wav(path: &Path) -> Result<AudioSignal> {
    let bytes = std::fs::read(path)?;
    decode_wav(&bytes)
}

/// Writes a WAV file atomically (temp file + rename within the directory).
pub fn write_wav(path: &Path, signal: &AudioSignal) -> Result<()> {
    let bytes = encode_wav(signal)?;
    write_atomic(path, &bytes)
}

/// Writes bytes to `path` via a temporary sibling file and an atomic rename,
/// so failed commands never leave partial output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| CodecError::Config(format!("invalid output path {}", path.display())))?;
    let mut tmp = std::path::PathBuf::from(dir.unwrap_or_else(|| Path::new(".")));
    tmp.push(format!(".{}.tmp-{}", file_name.to_string_lossy(), std::process::id()));
    let mut f = std::fs::File::create(&tmp)?;
    if let Err(e) = f.write_all(bytes).and_then(|_| f.sync_all()) {
        drop(f);
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    drop(f);
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}
