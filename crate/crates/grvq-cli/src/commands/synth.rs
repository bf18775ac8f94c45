//! `synth-corpus`: seeded synthetic test data so every workflow runs without
//! external audio.

use std::path::{Path, PathBuf};

use grvq_codec::error::CodecError;
use grvq_codec::wav::SUPPORTED_RATES;

use crate::corpus::write_corpus;
use crate::error::Result;

pub fn cmd_synth_corpus(
    out_dir: &Path,
    files: usize,
    duration_s: f64,
    sample_rate: u32,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    if files == 0 {
        return Err(CodecError::Config("corpus needs at least one file".into()).into());
    }
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(CodecError::Config(format!(
            "duration must be a positive number of seconds, got {duration_s}"
        ))
        .into());
    }
    if !SUPPORTED_RATES.contains(&sample_rate) {
        return Err(CodecError::Config(format!(
            "sample_rate {sample_rate} unsupported (accepted: {SUPPORTED_RATES:?})"
        ))
        .into());
    }
    write_corpus(out_dir, files, duration_s, sample_rate, seed)
}
