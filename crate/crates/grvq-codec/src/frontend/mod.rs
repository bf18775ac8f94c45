//! Deterministic analysis/synthesis front-end and spectral distortion metrics.
//!
//! The lapped cosine transform here is invertible and critically sampled:
//! `frame_size / 2` coefficients per hop, so the hop length doubles as the
//! downsample factor in bitrate accounting. No learned parameters anywhere.

mod mdct;
mod mel;
mod metrics;

pub use mdct::{mdct_analyze, mdct_synthesize, MdctTransform};
pub use mel::{mel_spectrogram, MelFilterbank, MelSpec, DEFAULT_MEL_BANDS};
pub use metrics::{mel_distance, snr_db, DEFAULT_MEL_SCALES, SNR_CAP_DB};

use crate::error::{CodecError, Result};

/// A single-channel audio signal with unit-scale samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f32>,
    sample_rate: u32,
}

impl AudioSignal {
    /// Builds a signal, validating rate and sample finiteness.
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(CodecError::Config("sample rate must be positive".into()));
        }
        if let Some(pos) = samples.iter().position(|s| !s.is_finite()) {
            return Err(CodecError::Domain(format!(
                "sample at index {pos} is not finite"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }
}
