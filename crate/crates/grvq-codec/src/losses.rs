//! Adversarial, feature-matching, reconstruction and weighted-total losses
//! as pure functions over supplied logits, feature maps and signals. No
//! discriminator networks live here; callers provide the outputs.

use crate::error::{CodecError, Result};
use crate::frontend::{mel_distance, AudioSignal};

/// Logits and internal feature maps from a bank of discriminators.
///
/// `logits[k]` is discriminator k's output sequence (any length);
/// `feature_maps[k][l]` is the flattened activation grid of its layer l.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorOutputs {
    logits: Vec<Vec<f32>>,
    feature_maps: Vec<Vec<Vec<f32>>>,
}

impl DiscriminatorOutputs {
    pub fn new(logits: Vec<Vec<f32>>, feature_maps: Vec<Vec<Vec<f32>>>) -> Result<Self> {
        if logits.is_empty() {
            return Err(CodecError::Config(
                "need at least one discriminator output".into(),
            ));
        }
        if feature_maps.len() != logits.len() {
            return Err(CodecError::Shape(format!(
                "{} logit sequences but {} feature-map lists",
                logits.len(),
                feature_maps.len()
            )));
        }
        let finite = |vs: &[f32]| vs.iter().all(|v| v.is_finite());
        if !logits.iter().all(|l| finite(l))
            || !feature_maps.iter().flatten().all(|m| finite(m))
        {
            return Err(CodecError::Domain(
                "discriminator outputs must be finite".into(),
            ));
        }
        Ok(Self {
            logits,
            feature_maps,
        })
    }

    /// Logits only; feature maps empty (valid for the hinge losses).
    pub fn from_logits(logits: Vec<Vec<f32>>) -> Result<Self> {
        let maps = vec![Vec::new(); logits.len()];
        Self::new(logits, maps)
    }

    pub fn n_discriminators(&self) -> usize {
        self.logits.len()
    }

    pub fn logits(&self) -> &[Vec<f32>] {
        &self.logits
    }

    pub fn feature_maps(&self) -> &[Vec<Vec<f32>>] {
        &self.feature_maps
    }
}

/// Weights of the combined generator objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub adversarial: f64,
    pub feature_match: f64,
    pub reconstruction: f64,
    pub commitment: f64,
}

impl LossWeights {
    pub fn new(
        adversarial: f64,
        feature_match: f64,
        reconstruction: f64,
        commitment: f64,
    ) -> Result<Self> {
        let all = [adversarial, feature_match, reconstruction, commitment];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(CodecError::Config(format!(
                "loss weights must be finite and non-negative, got {all:?}"
            )));
        }
        Ok(Self {
            adversarial,
            feature_match,
            reconstruction,
            commitment,
        })
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            adversarial: 3.0,
            feature_match: 3.0,
            reconstruction: 1.0,
            commitment: 1.0,
        }
    }
}

fn hinge_mean(logits: &[f32], sign: f64, k: usize) -> Result<f64> {
    if logits.is_empty() {
        return Err(CodecError::Degenerate(format!(
            "discriminator {k} produced no logits"
        )));
    }
    let sum: f64 = logits
        .iter()
        .map(|&v| (1.0 + sign * v as f64).max(0.0))
        .sum();
    Ok(sum / logits.len() as f64)
}

/// Discriminator hinge objective:
/// `(1/K) * sum_k [ mean(max(0, 1 - D_k(x))) + mean(max(0, 1 + D_k(x_hat))) ]`.
pub fn disc_hinge_loss(
    real: &DiscriminatorOutputs,
    fake: &DiscriminatorOutputs,
) -> Result<f64> {
    let k = real.n_discriminators();
    if fake.n_discriminators() != k {
        return Err(CodecError::Shape(format!(
            "real has {k} discriminators, fake has {}",
            fake.n_discriminators()
        )));
    }
    let mut total = 0.0f64;
    for i in 0..k {
        total += hinge_mean(&real.logits[i], -1.0, i)?;
        total += hinge_mean(&fake.logits[i], 1.0, i)?;
    }
    Ok(total / k as f64)
}

/// Generator-side adversarial hinge:
/// `(1/K) * sum_k mean(max(0, 1 - D_k(x_hat)))`.
pub fn adv_hinge_loss(fake: &DiscriminatorOutputs) -> Result<f64> {
    let k = fake.n_discriminators();
    let mut total = 0.0f64;
    for i in 0..k {
        total += hinge_mean(&fake.logits[i], -1.0, i)?;
    }
    Ok(total / k as f64)
}

/// Feature-matching loss: per layer, the L1 norm of the real/fake activation
/// difference normalized by the mean absolute real activation, averaged over
/// layers then discriminators.
pub fn feature_match_loss(
    real: &DiscriminatorOutputs,
    fake: &DiscriminatorOutputs,
) -> Result<f64> {
    let k = real.n_discriminators();
    if fake.n_discriminators() != k {
        return Err(CodecError::Shape(format!(
            "real has {k} discriminators, fake has {}",
            fake.n_discriminators()
        )));
    }
    let mut total = 0.0f64;
    for i in 0..k {
        let (r_maps, f_maps) = (&real.feature_maps[i], &fake.feature_maps[i]);
        if r_maps.len() != f_maps.len() {
            return Err(CodecError::Shape(format!(
                "discriminator {i} has {} real layers but {} fake layers",
                r_maps.len(),
                f_maps.len()
            )));
        }
        if r_maps.is_empty() {
            return Err(CodecError::Degenerate(format!(
                "discriminator {i} has no feature maps"
            )));
        }
        let mut disc_total = 0.0f64;
        for (l, (r, f)) in r_maps.iter().zip(f_maps).enumerate() {
            if r.len() != f.len() {
                return Err(CodecError::Shape(format!(
                    "layer ({i}, {l}) shape mismatch: {} vs {} elements",
                    r.len(),
                    f.len()
                )));
            }
            let mut diff_l1 = 0.0f64;
            let mut real_abs = 0.0f64;
            for (&a, &b) in r.iter().zip(f) {
                diff_l1 += (a as f64 - b as f64).abs();
                real_abs += (a as f64).abs();
            }
            let denom = real_abs / r.len() as f64;
            if denom == 0.0 {
                return Err(CodecError::Degenerate(format!(
                    "layer ({i}, {l}) has zero mean absolute real activation"
                )));
            }
            disc_total += diff_l1 / denom;
        }
        total += disc_total / r_maps.len() as f64;
    }
    Ok(total / k as f64)
}

/// Time-domain mean L1 distance plus the multi-scale mel distance.
pub fn reconstruction_loss(
    reference: &AudioSignal,
    estimate: &AudioSignal,
    mel_scales: &[usize],
) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(CodecError::Shape(format!(
            "signal length mismatch: {} vs {}",
            reference.len(),
            estimate.len()
        )));
    }
    let time_term = if reference.is_empty() {
        0.0
    } else {
        let sum: f64 = reference
            .samples()
            .iter()
            .zip(estimate.samples())
            .map(|(&a, &b)| (a as f64 - b as f64).abs())
            .sum();
        sum / reference.len() as f64
    };
    Ok(time_term + mel_distance(reference, estimate, mel_scales)?)
}

/// Weighted generator objective:
/// `w_adv*adv + w_feat*feat + w_rec*rec + w_c*commit`.
pub fn generator_total(
    adv: f64,
    feat: f64,
    rec: f64,
    commit: f64,
    weights: &LossWeights,
) -> Result<f64> {
    let parts = [adv, feat, rec, commit];
    if parts.iter().any(|v| !v.is_finite()) {
        return Err(CodecError::Domain(format!(
            "loss components must be finite, got {parts:?}"
        )));
    }
    Ok(weights.adversarial * adv
        + weights.feature_match * feat
        + weights.reconstruction * rec
        + weights.commitment * commit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outs(logits: &[&[f32]]) -> DiscriminatorOutputs {
        DiscriminatorOutputs::from_logits(logits.iter().map(|l| l.to_vec()).collect()).unwrap()
    }

    fn with_maps(maps: &[&[&[f32]]]) -> DiscriminatorOutputs {
        let logits = vec![vec![0.0f32]; maps.len()];
        let maps: Vec<Vec<Vec<f32>>> = maps
            .iter()
            .map(|disc| disc.iter().map(|l| l.to_vec()).collect())
            .collect();
        DiscriminatorOutputs::new(logits, maps).unwrap()
    }

    #[test]
    fn disc_hinge_zero_under_perfect_discrimination() {
        // max(0, 1-2) + max(0, 1-2) = 0.
        let real = outs(&[&[2.0]]);
        let fake = outs(&[&[-2.0]]);
        assert_eq!(disc_hinge_loss(&real, &fake).unwrap(), 0.0);
    }

    #[test]
    fn disc_hinge_two_at_total_confusion() {
        let real = outs(&[&[0.0]]);
        let fake = outs(&[&[0.0]]);
        assert_eq!(disc_hinge_loss(&real, &fake).unwrap(), 2.0);
    }

    #[test]
    fn disc_hinge_averages_over_discriminators() {
        // Per-discriminator terms 1.2 and 0.8 average to 1.0.
        let real = outs(&[&[0.2], &[0.5]]); // hinges 0.8, 0.5
        let fake = outs(&[&[-0.6], &[-0.7]]); // hinges 0.4, 0.3
        let loss = disc_hinge_loss(&real, &fake).unwrap();
        assert!((loss - 1.0).abs() < 1e-6, "loss {loss}");
    }

    #[test]
    fn disc_hinge_rejects_k_mismatch() {
        let real = outs(&[&[0.0], &[0.0]]);
        let fake = outs(&[&[0.0]]);
        assert!(matches!(
            disc_hinge_loss(&real, &fake),
            Err(CodecError::Shape(_))
        ));
    }

    #[test]
    fn adv_hinge_zero_at_or_above_margin() {
        let fake = outs(&[&[1.0, 1.5, 2.0]]);
        assert_eq!(adv_hinge_loss(&fake).unwrap(), 0.0);
    }

    #[test]
    fn adv_hinge_single_zero_logit() {
        let fake = outs(&[&[0.0]]);
        assert_eq!(adv_hinge_loss(&fake).unwrap(), 1.0);
    }

    #[test]
    fn adv_hinge_elementwise_then_mean() {
        // max(0, 1-(-1)) = 2 and max(0, 1-3) = 0; mean 1.
        let fake = outs(&[&[-1.0, 3.0]]);
        assert_eq!(adv_hinge_loss(&fake).unwrap(), 1.0);
    }

    #[test]
    fn adv_hinge_rejects_empty_logits() {
        let fake = outs(&[&[]]);
        assert!(matches!(
            adv_hinge_loss(&fake),
            Err(CodecError::Degenerate(_))
        ));
    }

    #[test]
    fn feature_match_zero_on_identical_maps() {
        let real = with_maps(&[&[&[0.5, -1.0, 2.0]]]);
        assert_eq!(feature_match_loss(&real, &real.clone()).unwrap(), 0.0);
    }

    #[test]
    fn feature_match_single_element_fixture() {
        // |2-1| / mean(|2|) = 1/2.
        let real = with_maps(&[&[&[2.0]]]);
        let fake = with_maps(&[&[&[1.0]]]);
        assert_eq!(feature_match_loss(&real, &fake).unwrap(), 0.5);
    }

    #[test]
    fn feature_match_invariant_under_joint_rescaling() {
        let base_r = [0.5f32, -1.0, 2.0, 0.25];
        let base_f = [0.4f32, -1.2, 2.5, 0.0];
        let mut reference = None;
        for c in [0.1f32, 1.0, 10.0] {
            let r: Vec<f32> = base_r.iter().map(|&v| v * c).collect();
            let f: Vec<f32> = base_f.iter().map(|&v| v * c).collect();
            let real = with_maps(&[&[&r]]);
            let fake = with_maps(&[&[&f]]);
            let loss = feature_match_loss(&real, &fake).unwrap();
            match reference {
                None => reference = Some(loss),
                Some(want) => assert!((loss - want).abs() < 1e-6, "{loss} vs {want}"),
            }
        }
    }

    #[test]
    fn feature_match_names_zero_denominator_layer() {
        let real = with_maps(&[&[&[0.0, 0.0]]]);
        let fake = with_maps(&[&[&[1.0, 1.0]]]);
        match feature_match_loss(&real, &fake) {
            Err(CodecError::Degenerate(msg)) => assert!(msg.contains("(0, 0)"), "{msg}"),
            other => panic!("expected Degenerate, got {other:?}"),
        }
    }

    #[test]
    fn reconstruction_loss_zero_on_identity() {
        let x = AudioSignal::new(vec![0.1, -0.2, 0.3, 0.0], 24000).unwrap();
        assert_eq!(reconstruction_loss(&x, &x, &[256]).unwrap(), 0.0);
    }

    #[test]
    fn reconstruction_time_term_is_mean_l1() {
        // Zero reference, constant 0.1 offset: time term exactly 0.1; the mel
        // term is recomputed independently and subtracted out.
        let n = 4096;
        let reference = AudioSignal::new(vec![0.0; n], 24000).unwrap();
        let estimate = AudioSignal::new(vec![0.1; n], 24000).unwrap();
        let scales = [512usize];
        let total = reconstruction_loss(&reference, &estimate, &scales).unwrap();
        let mel = mel_distance(&reference, &estimate, &scales).unwrap();
        assert!(
            ((total - mel) - 0.1).abs() < 1e-7,
            "time term {}",
            total - mel
        );
    }

    #[test]
    fn reconstruction_matches_component_composition() {
        let x = AudioSignal::new(
            (0..8192)
                .map(|n| (n as f32 * 0.01).sin() * 0.5)
                .collect::<Vec<_>>(),
            24000,
        )
        .unwrap();
        let y = AudioSignal::new(
            x.samples().iter().map(|&v| v * 0.7).collect::<Vec<_>>(),
            24000,
        )
        .unwrap();
        let scales = [256usize, 1024];
        let total = reconstruction_loss(&x, &y, &scales).unwrap();
        let time: f64 = x
            .samples()
            .iter()
            .zip(y.samples())
            .map(|(&a, &b)| (a as f64 - b as f64).abs())
            .sum::<f64>()
            / x.len() as f64;
        let mel = mel_distance(&x, &y, &scales).unwrap();
        assert!((total - (time + mel)).abs() < 1e-12);
    }

    #[test]
    fn generator_total_is_the_weighted_sum() {
        let zero = LossWeights::new(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(generator_total(1.0, 2.0, 3.0, 4.0, &zero).unwrap(), 0.0);
        let ones = LossWeights::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(generator_total(1.0, 2.0, 3.0, 4.0, &ones).unwrap(), 10.0);
        let mixed = LossWeights::new(3.0, 4.0, 1.0, 0.25).unwrap();
        assert_eq!(generator_total(1.0, 1.0, 1.0, 4.0, &mixed).unwrap(), 9.0);
    }

    #[test]
    fn generator_total_linear_in_components_and_weights() {
        let w = LossWeights::default();
        let base = generator_total(1.0, 2.0, 3.0, 4.0, &w).unwrap();
        let double = generator_total(2.0, 4.0, 6.0, 8.0, &w).unwrap();
        assert_eq!(double, 2.0 * base);
        let w2 = LossWeights::new(
            2.0 * w.adversarial,
            2.0 * w.feature_match,
            2.0 * w.reconstruction,
            2.0 * w.commitment,
        )
        .unwrap();
        assert_eq!(generator_total(1.0, 2.0, 3.0, 4.0, &w2).unwrap(), 2.0 * base);
    }

    #[test]
    fn generator_total_rejects_non_finite() {
        let w = LossWeights::default();
        assert!(matches!(
            generator_total(f64::NAN, 0.0, 0.0, 0.0, &w),
            Err(CodecError::Domain(_))
        ));
    }

    #[test]
    fn weights_reject_negative_values() {
        assert!(matches!(
            LossWeights::new(-1.0, 0.0, 0.0, 0.0),
            Err(CodecError::Config(_))
        ));
    }
}
