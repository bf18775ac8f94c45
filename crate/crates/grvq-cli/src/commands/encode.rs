//! `encode`: WAV in, `.grvq` stream out.

use std::path::Path;

use grvq_codec::bitstream::{bitrate_of, deserialize_model, encode_payload};
use grvq_codec::wav::{read_wav, write_atomic};

use crate::error::Result;
use crate::pipeline::{codec_config_of, encode_signal};

#[derive(Debug)]
pub struct EncodeOutcome {
    pub frames: usize,
    pub stream_bytes: usize,
    pub bitrate_bps: f64,
    pub duration_s: f64,
}

pub fn cmd_encode(model_path: &Path, input: &Path, out: &Path) -> Result<EncodeOutcome> {
    let model = deserialize_model(&std::fs::read(model_path).map_err(grvq_codec::CodecError::from)?)?;
    let signal = read_wav(input)?;
    let duration_s = signal.len() as f64 / signal.sample_rate() as f64;
    let (header, codes) = encode_signal(&model, &signal)?;
    let bytes = encode_payload(&header, &codes)?;
    write_atomic(out, &bytes)?;
    Ok(EncodeOutcome {
        frames: codes.frames(),
        stream_bytes: bytes.len(),
        bitrate_bps: bitrate_of(&codec_config_of(&model))?,
        duration_s,
    })
}
