//! Shared encode/decode composition used by the commands: front-end analysis
//! feeding the quantizer, and the inverse path driven by a stream header.

use grvq_codec::bitstream::{bits_for_entries, CodecConfig, StreamHeader};
use grvq_codec::error::CodecError;
use grvq_codec::frontend::{AudioSignal, MdctTransform};
use grvq_codec::grvq::{grvq_apply, grvq_decode, CodeTensor, GrvqModel};

use crate::error::Result;

/// Rate arithmetic view of a model: the analysis hop is the downsample factor.
pub fn codec_config_of(model: &GrvqModel) -> CodecConfig {
    CodecConfig {
        sample_rate: model.sample_rate(),
        strides: vec![(model.frame_size() / 2) as u32],
        n_codebooks: model.n_codebooks() as u32,
        entries: model.entries() as u32,
    }
}

/// Analyze + quantize a signal into a stream header and codes. An empty
/// signal yields a valid zero-frame stream.
pub fn encode_signal(model: &GrvqModel, signal: &AudioSignal) -> Result<(StreamHeader, CodeTensor)> {
    if signal.sample_rate() != model.sample_rate() {
        return Err(CodecError::Config(format!(
            "signal sample rate {} does not match model sample rate {}",
            signal.sample_rate(),
            model.sample_rate()
        ))
        .into());
    }
    let codes = if signal.is_empty() {
        CodeTensor::new(0, model.n_codebooks(), vec![])?
    } else {
        let transform = MdctTransform::new(model.frame_size())?;
        let features = transform.analyze(signal)?;
        let (codes, _) = grvq_apply(model, &features)?;
        codes
    };
    let header = StreamHeader::for_model(model, &codes, signal.len() as u64)?;
    Ok((header, codes))
}

/// Checks that a stream was produced by a compatible model.
pub fn check_stream_compatibility(model: &GrvqModel, header: &StreamHeader) -> Result<()> {
    let mismatch = |field: &'static str, left: String, right: String| {
        Err(CodecError::Incompatible { field, left, right }.into())
    };
    if header.sample_rate != model.sample_rate() {
        return mismatch(
            "sample_rate",
            model.sample_rate().to_string(),
            header.sample_rate.to_string(),
        );
    }
    if header.frame_size as usize != model.frame_size() {
        return mismatch(
            "frame_size",
            model.frame_size().to_string(),
            header.frame_size.to_string(),
        );
    }
    if header.groups as usize != model.groups() {
        return mismatch("groups", model.groups().to_string(), header.groups.to_string());
    }
    if header.stages as usize != model.stages() {
        return mismatch("stages", model.stages().to_string(), header.stages.to_string());
    }
    let model_bits = bits_for_entries(model.entries())?;
    if header.bits_per_code != model_bits {
        return mismatch(
            "bits_per_code",
            model_bits.to_string(),
            header.bits_per_code.to_string(),
        );
    }
    Ok(())
}

/// Dequantize + synthesize codes back into a signal of exactly
/// `original_length` samples (synthesis output is trimmed or zero-padded per
/// the header).
pub fn decode_stream(
    model: &GrvqModel,
    header: &StreamHeader,
    codes: &CodeTensor,
) -> Result<AudioSignal> {
    check_stream_compatibility(model, header)?;
    let target = header.original_length as usize;
    if codes.frames() == 0 {
        return Ok(AudioSignal::new(vec![0.0; target], model.sample_rate())?);
    }
    let features = grvq_decode(model, codes)?;
    let transform = MdctTransform::new(model.frame_size())?;
    let decoded = transform.synthesize(&features, model.sample_rate())?;
    let mut samples = decoded.into_samples();
    samples.resize(target, 0.0);
    Ok(AudioSignal::new(samples, model.sample_rate())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synth_signal;
    use grvq_codec::grvq::{fit_grvq, FitConfig};
    use grvq_codec::frontend::{mdct_analyze, snr_db};

    fn small_model() -> GrvqModel {
        let signal = synth_signal(1, 0, 2.0, 24000);
        let features = mdct_analyze(&signal, 64).unwrap();
        let config = FitConfig {
            groups: 2,
            stages: 2,
            entries: 64,
            epochs: 2,
            frame_size: 64,
            kmeans_iters: 8,
            kmeans_sample_cap: 512,
            ..FitConfig::default()
        };
        fit_grvq(&features, &config).unwrap().0
    }

    #[test]
    fn encode_decode_preserves_length_and_improves_on_silence() {
        let model = small_model();
        let signal = synth_signal(2, 1, 1.0, 24000);
        let (header, codes) = encode_signal(&model, &signal).unwrap();
        assert_eq!(header.original_length, signal.len() as u64);
        let decoded = decode_stream(&model, &header, &codes).unwrap();
        assert_eq!(decoded.len(), signal.len());
        // The reconstruction must beat all-zero output.
        let snr = snr_db(&signal, &decoded).unwrap();
        assert!(snr > 0.0, "snr {snr}");
    }

    #[test]
    fn ten_second_stream_size_matches_bitrate_arithmetic() {
        // Default geometry: 24 kHz, frame 480 (100 frames/s), 4 codebooks of
        // 1024 entries -> 4000 bits/s. Ten seconds is 1001 frames (one extra
        // lapped frame), i.e. 1001 * 40 bits = 5005 payload bytes.
        use grvq_codec::bitstream::{encode_payload, STREAM_HEADER_LEN};
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let stacks: Vec<grvq_codec::grvq::RvqStack> = (0..2)
            .map(|_| {
                let books: Vec<grvq_codec::vq::Codebook> = (0..2)
                    .map(|_| {
                        let flat: Vec<f32> =
                            (0..1024 * 120).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
                        grvq_codec::vq::Codebook::from_entries(120, flat).unwrap()
                    })
                    .collect();
                grvq_codec::grvq::RvqStack::new(books).unwrap()
            })
            .collect();
        let model = GrvqModel::new(stacks, 480, 24000).unwrap();
        let signal = synth_signal(5, 0, 10.0, 24000);
        let (header, codes) = encode_signal(&model, &signal).unwrap();
        assert_eq!(codes.frames(), 1001);
        let bytes = encode_payload(&header, &codes).unwrap();
        assert_eq!(bytes.len(), STREAM_HEADER_LEN + 5005);
        // Codes survive the container round trip inside the 10-bit range.
        let (_, back) = grvq_codec::bitstream::decode_payload(&bytes).unwrap();
        assert!(back.codes().iter().all(|&c| c < 1024));
        assert_eq!(back.codes(), codes.codes());
    }

    #[test]
    fn empty_signal_round_trips_as_zero_frames() {
        let model = small_model();
        let signal = AudioSignal::new(vec![], 24000).unwrap();
        let (header, codes) = encode_signal(&model, &signal).unwrap();
        assert_eq!(header.frame_count, 0);
        let decoded = decode_stream(&model, &header, &codes).unwrap();
        assert_eq!(decoded.len(), 0);
    }

    #[test]
    fn sample_rate_mismatch_is_a_config_error() {
        let model = small_model();
        let signal = synth_signal(3, 0, 0.2, 16000);
        match encode_signal(&model, &signal) {
            Err(crate::error::CliError::Codec(CodecError::Config(_))) => {}
            other => panic!("expected Config error, got {other:?}"),
        }
    }

    #[test]
    fn incompatibility_names_the_field() {
        let model = small_model();
        let signal = synth_signal(4, 0, 0.5, 24000);
        let (mut header, codes) = encode_signal(&model, &signal).unwrap();
        header.stages = 7;
        match decode_stream(&model, &header, &codes) {
            Err(crate::error::CliError::Codec(CodecError::Incompatible { field, .. })) => {
                assert_eq!(field, "stages");
            }
            other => panic!("expected Incompatible, got {other:?}"),
        }
    }
}
