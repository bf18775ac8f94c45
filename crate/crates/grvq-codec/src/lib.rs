//! Group-residual vector quantization audio codec.
//!
//! The pipeline is a deterministic lapped-cosine front-end, a trainable
//! group-residual quantizer (feature dimensions split into equal groups,
//! each with its own residual codebook cascade), and a bit-exact container
//! format for streams and models. Loss functions for adversarial training
//! setups are provided as pure functions over supplied discriminator
//! outputs.

pub mod bitstream;
pub mod error;
pub mod feature;
pub mod frontend;
pub mod grvq;
pub mod losses;
pub mod seed;
pub mod vq;
pub mod wav;

pub use error::{CodecError, Result};
pub use feature::FeatureMatrix;
pub use frontend::{
    mdct_analyze, mdct_synthesize, mel_distance, mel_spectrogram, snr_db, AudioSignal,
    MdctTransform, MelSpec,
};
pub use grvq::{
    commitment_grad_check, commitment_loss, fit_grvq, grvq_apply, grvq_decode, rvq_apply,
    split_groups, CodeTensor, FitConfig, FitReport, GrvqModel, RvqStack,
};
pub use losses::{
    adv_hinge_loss, disc_hinge_loss, feature_match_loss, generator_total, reconstruction_loss,
    DiscriminatorOutputs, LossWeights,
};
pub use vq::{
    ema_update, kmeans_init, nearest_code, quantize_batch, reinit_dead_entries, Codebook,
};
