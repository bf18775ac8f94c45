//! Waveform- and spectrum-domain distortion metrics.

use crate::error::{CodecError, Result};
use crate::frontend::{mel_spectrogram, AudioSignal, DEFAULT_MEL_BANDS};

/// Value reported when the error signal is exactly zero.
pub const SNR_CAP_DB: f64 = 200.0;

/// STFT window lengths used by the multi-scale mel distance; hop is window/4.
pub const DEFAULT_MEL_SCALES: [usize; 5] = [128, 256, 512, 1024, 2048];

fn check_compatible(reference: &AudioSignal, estimate: &AudioSignal) -> Result<()> {
    if reference.len() != estimate.len() {
        return Err(CodecError::Shape(format!(
            "signal length mismatch: {} vs {}",
            reference.len(),
            estimate.len()
        )));
    }
    if reference.sample_rate() != estimate.sample_rate() {
        return Err(CodecError::Shape(format!(
            "sample rate mismatch: {} vs {}",
            reference.sample_rate(),
            estimate.sample_rate()
        )));
    }
    Ok(())
}

/// Signal-to-noise ratio in dB: `10*log10(sum(ref^2) / sum((ref-est)^2))`,
/// capped at [`SNR_CAP_DB`], which is returned exactly when the error is zero.
pub fn snr_db(reference: &AudioSignal, estimate: &AudioSignal) -> Result<f64> {
    check_compatible(reference, estimate)?;
    let mut signal = 0.0f64;
    let mut error = 0.0f64;
    for (&r, &e) in reference.samples().iter().zip(estimate.samples()) {
        let r = r as f64;
        signal += r * r;
        let d = r - e as f64;
        error += d * d;
    }
    if signal == 0.0 {
        return Err(CodecError::Degenerate(
            "reference signal has zero energy".into(),
        ));
    }
    if error == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (signal / error).log10()).min(SNR_CAP_DB))
}

/// Multi-scale mel-spectrogram distance: mean over scales of
/// `mean(|A-B|) + sqrt(mean((A-B)^2))` between mel spectrograms computed at
/// each window length (hop = window/4, 64 mel bands).
pub fn mel_distance(
    reference: &AudioSignal,
    estimate: &AudioSignal,
    scales: &[usize],
) -> Result<f64> {
    check_compatible(reference, estimate)?;
    if scales.is_empty() {
        return Err(CodecError::Config(
            "mel distance needs at least one scale".into(),
        ));
    }
    let mut total = 0.0f64;
    for &window in scales {
        let a = mel_spectrogram(reference, window, window / 4, DEFAULT_MEL_BANDS)?;
        let b = mel_spectrogram(estimate, window, window / 4, DEFAULT_MEL_BANDS)?;
        let n = a.values().len();
        debug_assert_eq!(n, b.values().len());
        let mut l1 = 0.0f64;
        let mut l2 = 0.0f64;
        for (&x, &y) in a.values().iter().zip(b.values()) {
            let d = x as f64 - y as f64;
            l1 += d.abs();
            l2 += d * d;
        }
        total += l1 / n as f64 + (l2 / n as f64).sqrt();
    }
    Ok(total / scales.len() as f64)
}
