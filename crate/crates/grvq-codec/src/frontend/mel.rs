//! Magnitude STFT projected through a triangular mel filterbank.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{num_complex::Complex32, Fft, FftPlanner};

use crate::error::{CodecError, Result};
use crate::frontend::AudioSignal;

/// Mel band count used by distortion metrics and reconstruction losses.
pub const DEFAULT_MEL_BANDS: usize = 64;

/// Non-negative mel-band energies, one row per STFT frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpec {
    frames: usize,
    n_mels: usize,
    values: Vec<f32>,
    window_len: usize,
    hop: usize,
}

impl MelSpec {
    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, t: usize) -> &[f32] {
        &self.values[t * self.n_mels..(t + 1) * self.n_mels]
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    /// Sum of all band energies.
    pub fn total_energy(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum()
    }
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular mel filterbank over `window_len/2 + 1` magnitude bins,
/// spanning 0 to Nyquist. Filters peak at 1 (no area normalization).
pub struct MelFilterbank {
    n_mels: usize,
    n_bins: usize,
    /// Row-major `n_mels x n_bins` weights.
    weights: Vec<f32>,
}

impl MelFilterbank {
    pub fn new(window_len: usize, n_mels: usize, sample_rate: u32) -> Result<Self> {
        if n_mels == 0 {
            return Err(CodecError::Config("mel band count must be >= 1".into()));
        }
        let n_bins = window_len / 2 + 1;
        let nyquist = sample_rate as f64 / 2.0;
        let mel_max = hz_to_mel(nyquist);
        // n_mels + 2 equally spaced mel points from 0 to Nyquist.
        let points: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(mel_max * i as f64 / (n_mels + 1) as f64))
            .collect();
        let bin_hz = sample_rate as f64 / window_len as f64;
        let mut weights = vec![0.0f32; n_mels * n_bins];
        for m in 0..n_mels {
            let (lo, mid, hi) = (points[m], points[m + 1], points[m + 2]);
            for b in 0..n_bins {
                let f = b as f64 * bin_hz;
                let w = if f > lo && f < mid {
                    (f - lo) / (mid - lo)
                } else if f == mid {
                    1.0
                } else if f > mid && f < hi {
                    (hi - f) / (hi - mid)
                } else {
                    0.0
                };
                weights[m * n_bins + b] = w as f32;
            }
        }
        Ok(Self {
            n_mels,
            n_bins,
            weights,
        })
    }

    /// Projects one magnitude spectrum onto the mel bands.
    fn apply(&self, magnitudes: &[f32], out: &mut [f32]) {
        debug_assert_eq!(magnitudes.len(), self.n_bins);
        for (m, o) in out.iter_mut().enumerate() {
            let row = &self.weights[m * self.n_bins..(m + 1) * self.n_bins];
            let mut acc = 0.0f64;
            for (w, &x) in row.iter().zip(magnitudes) {
                acc += *w as f64 * x as f64;
            }
            *o = acc as f32;
        }
    }
}

/// Computes a magnitude-STFT mel spectrogram with a Hann window.
///
/// `window_len` must be a power of two; frames shorter than the window at
/// the signal tail are zero-padded. An empty signal yields one zero frame.
pub fn mel_spectrogram(
    signal: &AudioSignal,
    window_len: usize,
    hop: usize,
    n_mels: usize,
) -> Result<MelSpec> {
    if window_len == 0 || !window_len.is_power_of_two() {
        return Err(CodecError::Config(format!(
            "STFT window length must be a power of two, got {window_len}"
        )));
    }
    if hop == 0 || hop > window_len {
        return Err(CodecError::Config(format!(
            "hop must satisfy 0 < hop <= window ({hop} vs {window_len})"
        )));
    }
    let filterbank = MelFilterbank::new(window_len, n_mels, signal.sample_rate())?;
    let fft = FftPlanner::<f32>::new().plan_fft_forward(window_len);
    stft_mel(signal.samples(), window_len, hop, &filterbank, &fft)
}

fn stft_mel(
    samples: &[f32],
    window_len: usize,
    hop: usize,
    filterbank: &MelFilterbank,
    fft: &Arc<dyn Fft<f32>>,
) -> Result<MelSpec> {
    let n_bins = window_len / 2 + 1;
    let frames = if samples.len() <= window_len {
        1
    } else {
        1 + (samples.len() - window_len).div_ceil(hop)
    };
    let window: Vec<f32> = (0..window_len)
        .map(|n| {
            let x = (PI * n as f64 / window_len as f64).sin();
            (x * x) as f32
        })
        .collect();
    let n_mels = filterbank.n_mels;
    let mut values = vec![0.0f32; frames * n_mels];
    let mut buf = vec![Complex32::default(); window_len];
    let mut magnitudes = vec![0.0f32; n_bins];
    for t in 0..frames {
        let start = t * hop;
        for (n, b) in buf.iter_mut().enumerate() {
            let s = samples.get(start + n).copied().unwrap_or(0.0);
            *b = Complex32::new(s * window[n], 0.0);
        }
        fft.process(&mut buf);
        for (b, m) in magnitudes.iter_mut().enumerate() {
            *m = buf[b].norm();
        }
        filterbank.apply(&magnitudes, &mut values[t * n_mels..(t + 1) * n_mels]);
    }
    Ok(MelSpec {
        frames,
        n_mels,
        values,
        window_len,
        hop,
    })
}
