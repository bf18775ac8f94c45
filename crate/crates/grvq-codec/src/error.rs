//! Error types shared by every codec module.

use thiserror::Error;

/// All failure classes the codec can report.
///
/// Each variant corresponds to one documented error class; the CLI maps
/// variants to distinct process exit codes.
#[derive(Debug, Error)]
pub enum CodecError {
    /// A parameter violates its documented constraints (odd frame size,
    /// decay outside [0, 1], non-divisible group split, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Mismatched dimensions or lengths between two inputs.
    #[error("shape error: {0}")]
    Shape(String),

    /// Non-finite values where finite ones are required.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input that must be non-empty was empty.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Input is valid in shape but degenerate for this operation
    /// (zero-energy reference, empty logit sequence, zero denominator, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Not enough data rows to perform the requested fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An index (code or entry) out of range for its codebook.
    #[error("index error: {0}")]
    Index(String),

    /// Code index out of range while decoding, located for diagnostics.
    #[error(
        "index error: code {code} out of range for codebook with {entries} entries \
         (frame {frame}, group {group}, stage {stage})"
    )]
    InvalidCode {
        frame: usize,
        group: usize,
        stage: usize,
        code: u32,
        entries: usize,
    },

    /// Malformed serialized data (bad magic, unsupported WAV property, ...).
    #[error("format error: {0}")]
    Format(String),

    /// A container version this build does not understand.
    #[error("unsupported version {found} (this build supports version {supported})")]
    Version { found: u32, supported: u32 },

    /// Serialized data ends before its declared payload.
    #[error("truncated stream: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },

    /// A value cannot be represented in the declared encoding.
    #[error("encoding error: {0}")]
    Encoding(String),

    /// A model and a stream that must agree disagree on a header field.
    #[error("incompatible model/stream: field `{field}` is {left} in one and {right} in the other")]
    Incompatible {
        field: &'static str,
        left: String,
        right: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CodecError>;
