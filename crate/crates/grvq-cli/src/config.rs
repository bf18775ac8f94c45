//! Run configuration: one declarative file, overridden by flags, echoed into
//! every report.

use std::path::Path;

use grvq_codec::error::CodecError;
use grvq_codec::grvq::FitConfig;
use grvq_codec::losses::LossWeights;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Every knob a command needs, with documented defaults. Loaded from a TOML
/// file via `--config`; individual flags win over the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Audio sample rate in Hz (16000 or 24000).
    pub sample_rate: u32,
    /// Analysis frame size in samples; hop and downsample factor are half.
    pub frame_size: usize,
    /// Number of feature groups, each with its own residual stack.
    pub groups: usize,
    /// Residual stages per group.
    pub stages: usize,
    /// Entries per codebook.
    pub entries: usize,
    /// EMA refinement epochs per stage.
    pub epochs: usize,
    /// EMA decay.
    pub decay: f32,
    /// Master seed for every stochastic step.
    pub seed: u64,
    /// Lloyd iterations inside k-means initialization.
    pub kmeans_iters: usize,
    /// Row cap for k-means initialization (0 = use all rows).
    pub kmeans_sample_cap: usize,
    /// STFT window lengths for the multi-scale mel distance.
    pub mel_scales: Vec<usize>,
    /// Generator objective weights: adversarial, feature-match,
    /// reconstruction, commitment.
    pub loss_weights: [f64; 4],
    /// Pin entry 0 of stage >= 2 codebooks to the zero vector.
    pub reserve_zero_entry: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sample_rate: 24000,
            frame_size: 480,
            groups: 2,
            stages: 2,
            entries: 1024,
            epochs: 8,
            decay: 0.99,
            seed: 42,
            kmeans_iters: 25,
            kmeans_sample_cap: 6144,
            mel_scales: vec![128, 256, 512, 1024, 2048],
            loss_weights: [3.0, 3.0, 1.0, 1.0],
            reserve_zero_entry: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CodecError::from)?;
        let config: RunConfig = toml::from_str(&text).map_err(|e| {
            CodecError::Config(format!("cannot parse {}: {e}", path.display()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CodecError::Config(msg).into());
        if !grvq_codec::wav::SUPPORTED_RATES.contains(&self.sample_rate) {
            return fail(format!(
                "sample_rate {} unsupported (accepted: {:?})",
                self.sample_rate,
                grvq_codec::wav::SUPPORTED_RATES
            ));
        }
        if self.frame_size < 4 || !self.frame_size.is_multiple_of(2) {
            return fail(format!("frame_size must be even and >= 4, got {}", self.frame_size));
        }
        if self.groups == 0 || self.stages == 0 {
            return fail("groups and stages must be >= 1".into());
        }
        if !(self.frame_size / 2).is_multiple_of(self.groups) {
            return fail(format!(
                "feature dimension {} (frame_size/2) is not divisible by {} groups",
                self.frame_size / 2,
                self.groups
            ));
        }
        if !(2..=65536).contains(&self.entries) {
            return fail(format!("entries must lie in 2..=65536, got {}", self.entries));
        }
        if !(0.0..=1.0).contains(&self.decay) {
            return fail(format!("decay must lie in [0, 1], got {}", self.decay));
        }
        if self.kmeans_iters == 0 {
            return fail("kmeans_iters must be >= 1".into());
        }
        if self.mel_scales.is_empty() {
            return fail("mel_scales must not be empty".into());
        }
        if let Some(&bad) = self.mel_scales.iter().find(|s| !s.is_power_of_two()) {
            return fail(format!("mel scale {bad} is not a power of two"));
        }
        self.loss_weights()?;
        Ok(())
    }

    pub fn loss_weights(&self) -> Result<LossWeights> {
        let [adv, feat, rec, commit] = self.loss_weights;
        Ok(LossWeights::new(adv, feat, rec, commit)?)
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            groups: self.groups,
            stages: self.stages,
            entries: self.entries,
            epochs: self.epochs,
            decay: self.decay,
            seed: self.seed,
            kmeans_iters: self.kmeans_iters,
            kmeans_sample_cap: self.kmeans_sample_cap,
            reserve_zero_entry: self.reserve_zero_entry,
            frame_size: self.frame_size,
            sample_rate: self.sample_rate,
        }
    }

    /// The effective configuration as `key = value` lines for report echoing.
    pub fn echo_lines(&self) -> Vec<String> {
        vec![
            format!("sample_rate = {}", self.sample_rate),
            format!("frame_size = {}", self.frame_size),
            format!("groups = {}", self.groups),
            format!("stages = {}", self.stages),
            format!("entries = {}", self.entries),
            format!("epochs = {}", self.epochs),
            format!("decay = {}", self.decay),
            format!("seed = {}", self.seed),
            format!("kmeans_iters = {}", self.kmeans_iters),
            format!("kmeans_sample_cap = {}", self.kmeans_sample_cap),
            format!(
                "mel_scales = [{}]",
                self.mel_scales
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            format!(
                "loss_weights = [{}, {}, {}, {}]",
                self.loss_weights[0], self.loss_weights[1], self.loss_weights[2], self.loss_weights[3]
            ),
            format!("reserve_zero_entry = {}", self.reserve_zero_entry),
        ]
    }
}
