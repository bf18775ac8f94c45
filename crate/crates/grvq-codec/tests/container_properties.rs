//! Round-trip and totality properties for the stream and model containers.

use grvq_codec::bitstream::{
    bits_for_entries, decode_payload, deserialize_model, encode_payload, serialize_model,
    StreamHeader, STREAM_HEADER_LEN,
};
use grvq_codec::grvq::{CodeTensor, GrvqModel, RvqStack};
use grvq_codec::vq::Codebook;
use proptest::prelude::*;

fn header_and_codes() -> impl Strategy<Value = (StreamHeader, CodeTensor)> {
    (
        1u32..=16,
        1u32..=4,
        1u32..=4,
        0u64..50,
        prop::sample::select(vec![16000u32, 24000]),
    )
        .prop_flat_map(|(bits, groups, stages, frames, rate)| {
            let per_frame = (groups * stages) as usize;
            let max_code = (1u32 << bits) - 1;
            prop::collection::vec(0..=max_code, frames as usize * per_frame).prop_map(
                move |codes| {
                    let header = StreamHeader {
                        sample_rate: rate,
                        frame_size: 480,
                        groups,
                        stages,
                        bits_per_code: bits,
                        frame_count: frames,
                        original_length: frames * 240,
                    };
                    let tensor = CodeTensor::new(frames as usize, per_frame, codes).unwrap();
                    (header, tensor)
                },
            )
        })
}

fn model_strategy() -> impl Strategy<Value = GrvqModel> {
    (1usize..=3, 1usize..=3, 2usize..=9, 1usize..=5).prop_flat_map(|(g, s, e, d)| {
        prop::collection::vec(-1000i32..=1000, g * s * e * d).prop_map(move |raw| {
            let mut it = raw.into_iter().map(|v| v as f32 / 64.0);
            let stacks: Vec<RvqStack> = (0..g)
                .map(|_| {
                    let books: Vec<Codebook> = (0..s)
                        .map(|_| {
                            let flat: Vec<f32> = (&mut it).take(e * d).collect();
                            Codebook::from_entries(d, flat).unwrap()
                        })
                        .collect();
                    RvqStack::new(books).unwrap()
                })
                .collect();
            GrvqModel::new(stacks, 480, 24000).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn stream_round_trip_is_bit_exact((header, codes) in header_and_codes()) {
        let bytes = encode_payload(&header, &codes).unwrap();
        prop_assert_eq!(
            bytes.len(),
            STREAM_HEADER_LEN + header.payload_len()
        );
        let (h2, c2) = decode_payload(&bytes).unwrap();
        prop_assert_eq!(h2, header);
        prop_assert_eq!(c2.codes(), codes.codes());
    }

    #[test]
    fn payload_bit_accounting_is_exact((header, codes) in header_and_codes()) {
        let bytes = encode_payload(&header, &codes).unwrap();
        let bits = header.frame_count
            * (header.groups * header.stages) as u64
            * header.bits_per_code as u64;
        prop_assert_eq!(
            (bytes.len() - STREAM_HEADER_LEN) as u64,
            bits.div_ceil(8)
        );
    }

    #[test]
    fn model_round_trip_recovers_entries(model in model_strategy()) {
        let bytes = serialize_model(&model).unwrap();
        let back = deserialize_model(&bytes).unwrap();
        prop_assert_eq!(back, model);
    }

    #[test]
    fn stream_decode_is_total_on_mutated_bytes(
        (header, codes) in header_and_codes(),
        flips in prop::collection::vec((0usize..4096, 0u8..=255), 1..8),
    ) {
        let mut bytes = encode_payload(&header, &codes).unwrap();
        for (pos, val) in flips {
            let len = bytes.len();
            bytes[pos % len] = val;
        }
        // Any outcome is fine as long as it is a value, not a panic.
        let _ = decode_payload(&bytes);
    }

    #[test]
    fn model_decode_is_total_on_mutated_bytes(
        model in model_strategy(),
        flips in prop::collection::vec((0usize..1 << 16, 0u8..=255), 1..8),
    ) {
        let mut bytes = serialize_model(&model).unwrap();
        for (pos, val) in flips {
            let len = bytes.len();
            bytes[pos % len] = val;
        }
        let _ = deserialize_model(&bytes);
    }

    #[test]
    fn decode_is_total_on_arbitrary_prefixes(
        raw in prop::collection::vec(0u8..=255, 0..256),
    ) {
        let _ = decode_payload(&raw);
        let _ = deserialize_model(&raw);
    }
}

#[test]
fn serialized_model_size_matches_declared_layout() {
    let cb = |vals: Vec<f32>| Codebook::from_entries(3, vals).unwrap();
    let stack = |n: usize| {
        RvqStack::new(
            (0..n)
                .map(|i| cb((0..12).map(|j| (i * 12 + j) as f32).collect()))
                .collect(),
        )
        .unwrap()
    };
    let model = GrvqModel::new(vec![stack(2), stack(2)], 480, 24000).unwrap();
    let bytes = serialize_model(&model).unwrap();
    // Header (32 bytes) + 4 bytes per float across G*Nq*E*d entries.
    assert_eq!(bytes.len(), 32 + 4 * 2 * 2 * 4 * 3);
    assert_eq!(bits_for_entries(model.entries()).unwrap(), 2);
}
