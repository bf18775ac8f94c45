//! `info`: describe a model or stream file.

use std::path::Path;

use grvq_codec::bitstream::{
    bitrate_of, decode_payload, deserialize_model, frame_rate_of, CodecConfig, MODEL_MAGIC,
    STREAM_MAGIC,
};
use grvq_codec::error::CodecError;

use crate::error::Result;

#[derive(Debug)]
pub enum InfoOutcome {
    Model {
        sample_rate: u32,
        frame_size: usize,
        groups: usize,
        stages: usize,
        entries: usize,
        group_dim: usize,
        n_codebooks: usize,
        frame_rate_hz: f64,
        bitrate_bps: f64,
    },
    Stream {
        sample_rate: u32,
        frame_size: u32,
        groups: u32,
        stages: u32,
        bits_per_code: u32,
        frames: u64,
        original_length: u64,
        duration_s: f64,
        payload_bytes: usize,
        bitrate_bps: f64,
    },
}

impl InfoOutcome {
    pub fn render(&self) -> String {
        match self {
            InfoOutcome::Model {
                sample_rate,
                frame_size,
                groups,
                stages,
                entries,
                group_dim,
                n_codebooks,
                frame_rate_hz,
                bitrate_bps,
            } => format!(
                "kind: model\nsample_rate: {sample_rate}\nframe_size: {frame_size}\n\
                 downsample: {}\ngroups: {groups}\nstages: {stages}\nentries: {entries}\n\
                 group_dim: {group_dim}\nn_codebooks: {n_codebooks}\n\
                 frame_rate_hz: {frame_rate_hz}\nbitrate_bps: {bitrate_bps}\n",
                frame_size / 2
            ),
            InfoOutcome::Stream {
                sample_rate,
                frame_size,
                groups,
                stages,
                bits_per_code,
                frames,
                original_length,
                duration_s,
                payload_bytes,
                bitrate_bps,
            } => format!(
                "kind: stream\nsample_rate: {sample_rate}\nframe_size: {frame_size}\n\
                 groups: {groups}\nstages: {stages}\nbits_per_code: {bits_per_code}\n\
                 frames: {frames}\noriginal_length: {original_length}\n\
                 duration_s: {duration_s:.6}\npayload_bytes: {payload_bytes}\n\
                 bitrate_bps: {bitrate_bps}\n"
            ),
        }
    }
}

pub fn cmd_info(path: &Path) -> Result<InfoOutcome> {
    let bytes = std::fs::read(path).map_err(CodecError::from)?;
    match bytes.get(0..4) {
        Some(magic) if magic == MODEL_MAGIC => {
            let model = deserialize_model(&bytes)?;
            let config = CodecConfig {
                sample_rate: model.sample_rate(),
                strides: vec![(model.frame_size() / 2) as u32],
                n_codebooks: model.n_codebooks() as u32,
                entries: model.entries() as u32,
            };
            Ok(InfoOutcome::Model {
                sample_rate: model.sample_rate(),
                frame_size: model.frame_size(),
                groups: model.groups(),
                stages: model.stages(),
                entries: model.entries(),
                group_dim: model.group_dim(),
                n_codebooks: model.n_codebooks(),
                frame_rate_hz: frame_rate_of(&config)?,
                bitrate_bps: bitrate_of(&config)?,
            })
        }
        Some(magic) if magic == STREAM_MAGIC => {
            let (header, _) = decode_payload(&bytes)?;
            let config = CodecConfig {
                sample_rate: header.sample_rate,
                strides: vec![header.frame_size / 2],
                n_codebooks: header.groups * header.stages,
                entries: 1u32 << header.bits_per_code,
            };
            Ok(InfoOutcome::Stream {
                sample_rate: header.sample_rate,
                frame_size: header.frame_size,
                groups: header.groups,
                stages: header.stages,
                bits_per_code: header.bits_per_code,
                frames: header.frame_count,
                original_length: header.original_length,
                duration_s: header.original_length as f64 / header.sample_rate as f64,
                payload_bytes: header.payload_len(),
                bitrate_bps: bitrate_of(&config)?,
            })
        }
        _ => Err(CodecError::Format(format!(
            "{} is neither a model nor a stream (unknown magic)",
            path.display()
        ))
        .into()),
    }
}
