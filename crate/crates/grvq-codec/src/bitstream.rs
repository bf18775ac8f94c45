//! Bit-exact serialization of encoded audio and trained models, plus the
//! frame-rate/bitrate arithmetic used by the benchmark grid.
//!
//! Stream layout (`.grvq`): magic `GRVQ`, then little-endian `version`,
//! `sample_rate`, `frame_size`, `groups`, `stages`, `bits_per_code` (u32),
//! `frame_count`, `original_length` (u64), then codes packed MSB-first at
//! `bits_per_code` bits each in frame-major, group-major, stage order; the
//! final byte is zero-padded.
//!
//! Model layout (`.grvm`): magic `GRVM`, then little-endian `version`,
//! `sample_rate`, `frame_size`, `groups`, `stages`, `dim`, `entries` (u32),
//! then codebook entries as little-endian f32 in group, stage, entry,
//! dimension order.

use crate::error::{CodecError, Result};
use crate::grvq::{CodeTensor, GrvqModel, RvqStack};
use crate::vq::Codebook;

pub const STREAM_MAGIC: [u8; 4] = *b"GRVQ";
pub const MODEL_MAGIC: [u8; 4] = *b"GRVM";
pub const FORMAT_VERSION: u32 = 1;

/// Fixed byte size of the stream header.
pub const STREAM_HEADER_LEN: usize = 4 + 6 * 4 + 2 * 8;
/// Fixed byte size of the model header.
pub const MODEL_HEADER_LEN: usize = 4 + 7 * 4;

/// Sanity caps applied before allocating from untrusted headers.
const MAX_FRAMES: u64 = 1 << 31;
const MAX_CODEBOOKS: u32 = 64;
const MAX_PAYLOAD_BYTES: u64 = 1 << 30;

/// Bits needed to address `entries` codebook entries: `ceil(log2(entries))`.
/// Streams support 1..=16, i.e. 2..=65536 entries.
pub fn bits_for_entries(entries: usize) -> Result<u32> {
    if !(2..=65536).contains(&entries) {
        return Err(CodecError::Config(format!(
            "entry count {entries} outside the streamable range 2..=65536"
        )));
    }
    Ok(usize::BITS - (entries - 1).leading_zeros())
}

/// Metadata preceding the packed codes of one encoded stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamHeader {
    pub sample_rate: u32,
    pub frame_size: u32,
    pub groups: u32,
    pub stages: u32,
    pub bits_per_code: u32,
    pub frame_count: u64,
    pub original_length: u64,
}

impl StreamHeader {
    /// Header describing `codes` produced by `model` from a signal of
    /// `original_length` samples.
    pub fn for_model(model: &GrvqModel, codes: &CodeTensor, original_length: u64) -> Result<Self> {
        let header = Self {
            sample_rate: model.sample_rate(),
            frame_size: model.frame_size() as u32,
            groups: model.groups() as u32,
            stages: model.stages() as u32,
            bits_per_code: bits_for_entries(model.entries())?,
            frame_count: codes.frames() as u64,
            original_length,
        };
        header.validate()?;
        Ok(header)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=16).contains(&self.bits_per_code) {
            return Err(CodecError::Config(format!(
                "bits_per_code must lie in 1..=16, got {}",
                self.bits_per_code
            )));
        }
        let books = self.groups.saturating_mul(self.stages);
        if books == 0 || books > MAX_CODEBOOKS {
            return Err(CodecError::Config(format!(
                "groups*stages must lie in 1..={MAX_CODEBOOKS}, got {books}"
            )));
        }
        if self.frame_count > MAX_FRAMES {
            return Err(CodecError::Config(format!(
                "frame count {} exceeds the cap {MAX_FRAMES}",
                self.frame_count
            )));
        }
        let bits = self.frame_count * books as u64 * self.bits_per_code as u64;
        if bits.div_ceil(8) > MAX_PAYLOAD_BYTES {
            return Err(CodecError::Config(format!(
                "declared payload of {} bytes exceeds the 1 GiB cap",
                bits.div_ceil(8)
            )));
        }
        Ok(())
    }

    pub fn codes_per_frame(&self) -> usize {
        (self.groups * self.stages) as usize
    }

    /// Packed payload size in bytes (after zero padding to a whole byte).
    pub fn payload_len(&self) -> usize {
        let bits = self.frame_count * self.codes_per_frame() as u64 * self.bits_per_code as u64;
        bits.div_ceil(8) as usize
    }
}

/// Stride schedule and quantizer shape of one codec configuration, for
/// rate arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodecConfig {
    pub sample_rate: u32,
    pub strides: Vec<u32>,
    pub n_codebooks: u32,
    pub entries: u32,
}

impl CodecConfig {
    fn downsample(&self) -> Result<u64> {
        if self.strides.is_empty() {
            return Err(CodecError::Config("stride schedule is empty".into()));
        }
        if self.strides.contains(&0) {
            return Err(CodecError::Config("strides must all be >= 1".into()));
        }
        Ok(self.strides.iter().map(|&s| s as u64).product())
    }
}

/// Latent frame rate in Hz: `sample_rate / product(strides)`.
pub fn frame_rate_of(config: &CodecConfig) -> Result<f64> {
    Ok(config.sample_rate as f64 / config.downsample()? as f64)
}

/// Stream bitrate in bits/second:
/// `frame_rate * n_codebooks * ceil(log2(entries))`.
pub fn bitrate_of(config: &CodecConfig) -> Result<f64> {
    let bits = bits_for_entries(config.entries as usize)?;
    Ok(frame_rate_of(config)? * config.n_codebooks as f64 * bits as f64)
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(CodecError::Truncated {
            expected: usize::MAX,
            actual: self.bytes.len(),
        })?;
        if end > self.bytes.len() {
            return Err(CodecError::Truncated {
                expected: end,
                actual: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn check_magic(reader: &mut Reader, expected: &[u8; 4], kind: &str) -> Result<()> {
    let got = reader.take(4)?;
    if got != expected {
        return Err(CodecError::Format(format!(
            "bad {kind} magic {:02x?}, expected {:02x?}",
            got, expected
        )));
    }
    Ok(())
}

fn check_version(reader: &mut Reader) -> Result<()> {
    let found = reader.u32()?;
    if found != FORMAT_VERSION {
        return Err(CodecError::Version {
            found,
            supported: FORMAT_VERSION,
        });
    }
    Ok(())
}

/// Serializes a header plus packed codes into one self-contained stream.
pub fn encode_payload(header: &StreamHeader, codes: &CodeTensor) -> Result<Vec<u8>> {
    header.validate()?;
    if codes.frames() as u64 != header.frame_count {
        return Err(CodecError::Shape(format!(
            "header declares {} frames, code tensor has {}",
            header.frame_count,
            codes.frames()
        )));
    }
    if codes.codes_per_frame() != header.codes_per_frame() {
        return Err(CodecError::Shape(format!(
            "header declares {} codes per frame, code tensor has {}",
            header.codes_per_frame(),
            codes.codes_per_frame()
        )));
    }
    let bits = header.bits_per_code;
    let limit = 1u32 << bits;
    if let Some(&bad) = codes.codes().iter().find(|&&c| c >= limit) {
        return Err(CodecError::Encoding(format!(
            "code {bad} does not fit in {bits} bits"
        )));
    }

    let mut out = Vec::with_capacity(STREAM_HEADER_LEN + header.payload_len());
    out.extend_from_slice(&STREAM_MAGIC);
    push_u32(&mut out, FORMAT_VERSION);
    push_u32(&mut out, header.sample_rate);
    push_u32(&mut out, header.frame_size);
    push_u32(&mut out, header.groups);
    push_u32(&mut out, header.stages);
    push_u32(&mut out, header.bits_per_code);
    push_u64(&mut out, header.frame_count);
    push_u64(&mut out, header.original_length);

    let mut acc: u64 = 0;
    let mut nbits: u32 = 0;
    for &code in codes.codes() {
        acc = (acc << bits) | code as u64;
        nbits += bits;
        while nbits >= 8 {
            nbits -= 8;
            out.push((acc >> nbits) as u8);
        }
    }
    if nbits > 0 {
        out.push(((acc << (8 - nbits)) & 0xFF) as u8);
    }
    Ok(out)
}

/// Parses a stream produced by [`encode_payload`]. Total over arbitrary
/// bytes: every failure is a structured error and allocation is bounded by
/// the validated header.
pub fn decode_payload(bytes: &[u8]) -> Result<(StreamHeader, CodeTensor)> {
    let mut r = Reader::new(bytes);
    check_magic(&mut r, &STREAM_MAGIC, "stream")?;
    check_version(&mut r)?;
    let header = StreamHeader {
        sample_rate: r.u32()?,
        frame_size: r.u32()?,
        groups: r.u32()?,
        stages: r.u32()?,
        bits_per_code: r.u32()?,
        frame_count: r.u64()?,
        original_length: r.u64()?,
    };
    header.validate()?;
    let expected = STREAM_HEADER_LEN + header.payload_len();
    if bytes.len() < expected {
        return Err(CodecError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(CodecError::Format(format!(
            "{} trailing bytes after the declared payload",
            bytes.len() - expected
        )));
    }
    let payload = &bytes[STREAM_HEADER_LEN..];
    let bits = header.bits_per_code;
    let total_codes = header.frame_count as usize * header.codes_per_frame();
    let mut codes = Vec::with_capacity(total_codes);
    let mut acc: u64 = 0;
    let mut nbits: u32 = 0;
    let mut next = payload.iter();
    for _ in 0..total_codes {
        while nbits < bits {
            acc = (acc << 8) | *next.next().expect("payload length validated") as u64;
            nbits += 8;
        }
        nbits -= bits;
        codes.push(((acc >> nbits) & ((1u64 << bits) - 1)) as u32);
    }
    if acc & ((1u64 << nbits) - 1) != 0 {
        return Err(CodecError::Format(
            "nonzero padding bits at end of payload".into(),
        ));
    }
    let tensor = CodeTensor::new(
        header.frame_count as usize,
        header.codes_per_frame(),
        codes,
    )?;
    Ok((header, tensor))
}

/// Serializes a trained model: fixed header then raw f32 entries.
pub fn serialize_model(model: &GrvqModel) -> Result<Vec<u8>> {
    bits_for_entries(model.entries())?;
    let books = model.n_codebooks();
    if books > MAX_CODEBOOKS as usize {
        return Err(CodecError::Config(format!(
            "model has {books} codebooks, cap is {MAX_CODEBOOKS}"
        )));
    }
    let dim = model.group_dim();
    let entries = model.entries();
    let mut out =
        Vec::with_capacity(MODEL_HEADER_LEN + 4 * books * entries * dim);
    out.extend_from_slice(&MODEL_MAGIC);
    push_u32(&mut out, FORMAT_VERSION);
    push_u32(&mut out, model.sample_rate());
    push_u32(&mut out, model.frame_size() as u32);
    push_u32(&mut out, model.groups() as u32);
    push_u32(&mut out, model.stages() as u32);
    push_u32(&mut out, dim as u32);
    push_u32(&mut out, entries as u32);
    for g in 0..model.groups() {
        for s in 0..model.stages() {
            for v in model.group(g).codebook(s).entries() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

/// Parses a model produced by [`serialize_model`]. Total over arbitrary
/// bytes; EMA statistics are not serialized, so codebooks come back with
/// fresh statistics.
pub fn deserialize_model(bytes: &[u8]) -> Result<GrvqModel> {
    let mut r = Reader::new(bytes);
    check_magic(&mut r, &MODEL_MAGIC, "model")?;
    check_version(&mut r)?;
    let sample_rate = r.u32()?;
    let frame_size = r.u32()?;
    let groups = r.u32()?;
    let stages = r.u32()?;
    let dim = r.u32()?;
    let entries = r.u32()?;
    if groups == 0 || stages == 0 || dim == 0 {
        return Err(CodecError::Format(format!(
            "model header declares empty shape {groups}x{stages}x{dim}"
        )));
    }
    let books = groups.saturating_mul(stages);
    if books > MAX_CODEBOOKS {
        return Err(CodecError::Format(format!(
            "model declares {books} codebooks, cap is {MAX_CODEBOOKS}"
        )));
    }
    bits_for_entries(entries as usize)?;
    let floats = books as u64 * entries as u64 * dim as u64;
    if floats * 4 > MAX_PAYLOAD_BYTES {
        return Err(CodecError::Format(format!(
            "model declares {} bytes of entries, cap is {MAX_PAYLOAD_BYTES}",
            floats * 4
        )));
    }
    let expected = MODEL_HEADER_LEN + floats as usize * 4;
    if bytes.len() < expected {
        return Err(CodecError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(CodecError::Format(format!(
            "{} trailing bytes after the declared entries",
            bytes.len() - expected
        )));
    }
    let per_book = entries as usize * dim as usize;
    let mut stacks = Vec::with_capacity(groups as usize);
    for _ in 0..groups {
        let mut codebooks = Vec::with_capacity(stages as usize);
        for _ in 0..stages {
            let raw = r.take(per_book * 4)?;
            let mut values = Vec::with_capacity(per_book);
            for chunk in raw.chunks_exact(4) {
                values.push(f32::from_le_bytes(chunk.try_into().unwrap()));
            }
            codebooks.push(Codebook::from_entries(dim as usize, values)?);
        }
        stacks.push(RvqStack::new(codebooks)?);
    }
    GrvqModel::new(stacks, frame_size as usize, sample_rate)
}
