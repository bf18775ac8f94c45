//! `decode`: `.grvq` stream in, WAV out.

use std::path::Path;

use grvq_codec::bitstream::{decode_payload, deserialize_model};
use grvq_codec::wav::write_wav;

use crate::error::Result;
use crate::pipeline::decode_stream;

#[derive(Debug)]
pub struct DecodeOutcome {
    pub samples: usize,
    pub sample_rate: u32,
}

pub fn cmd_decode(model_path: &Path, stream_path: &Path, out: &Path) -> Result<DecodeOutcome> {
    let model = deserialize_model(&std::fs::read(model_path).map_err(grvq_codec::CodecError::from)?)?;
    let bytes = std::fs::read(stream_path).map_err(grvq_codec::CodecError::from)?;
    let (header, codes) = decode_payload(&bytes)?;
    let signal = decode_stream(&model, &header, &codes)?;
    write_wav(out, &signal)?;
    Ok(DecodeOutcome {
        samples: signal.len(),
        sample_rate: signal.sample_rate(),
    })
}
