//! CLI errors and their process exit codes.

use grvq_codec::CodecError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Codec(#[from] CodecError),

    /// Input directory contains no usable audio.
    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    /// Benchmarking needs enough files for a held-out split.
    #[error("insufficient corpus: {0}")]
    InsufficientCorpus(String),

    /// A named input file failed, with the file attached for diagnostics.
    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: CodecError,
    },
}

impl CliError {
    /// Stable, documented exit codes: one per error class. Codes start at 10
    /// to stay clear of clap's usage-error code 2.
    pub fn exit_code(&self) -> i32 {
        let codec = |e: &CodecError| match e {
            CodecError::Config(_) => 10,
            CodecError::Shape(_) => 11,
            CodecError::Domain(_) => 12,
            CodecError::EmptyInput(_) => 13,
            CodecError::Degenerate(_) => 14,
            CodecError::InsufficientData(_) => 15,
            CodecError::Index(_) | CodecError::InvalidCode { .. } => 16,
            CodecError::Format(_) => 17,
            CodecError::Version { .. } => 18,
            CodecError::Truncated { .. } => 19,
            CodecError::Encoding(_) => 20,
            CodecError::Incompatible { .. } => 21,
            CodecError::Io(_) => 22,
        };
        match self {
            CliError::Codec(e) => codec(e),
            CliError::InFile { source, .. } => codec(source),
            CliError::EmptyCorpus(_) => 23,
            CliError::InsufficientCorpus(_) => 24,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
