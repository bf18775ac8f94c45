//! Synthetic speech-like corpus generation and corpus directory listing.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use grvq_codec::error::CodecError;
use grvq_codec::frontend::AudioSignal;
use grvq_codec::seed::mix_seed;
use grvq_codec::wav;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};

/// All `.wav` files directly inside `dir`, sorted by name so every command
/// sees the corpus in the same order.
pub fn list_wavs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(CodecError::from)?;
    for entry in entries {
        let path = entry.map_err(CodecError::from)?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("wav") && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::EmptyCorpus(format!(
            "no .wav files in {}",
            dir.display()
        )));
    }
    Ok(paths)
}

/// One synthetic utterance: a pitch-modulated harmonic series under a
/// syllabic amplitude envelope, plus low-level noise. Deterministic in
/// (seed, index).
pub fn synth_signal(seed: u64, index: usize, duration_s: f64, sample_rate: u32) -> AudioSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, index as u64));
    let len = (duration_s * sample_rate as f64).round() as usize;
    let dt = 1.0 / sample_rate as f64;

    let f0_base: f64 = rng.gen_range(90.0..220.0);
    let vibrato_hz: f64 = rng.gen_range(4.0..7.0);
    let vibrato_depth: f64 = rng.gen_range(0.01..0.04);
    let syllable_hz: f64 = rng.gen_range(2.0..5.0);
    let syllable_phase: f64 = rng.gen_range(0.0..2.0 * PI);
    let n_harmonics = ((sample_rate as f64 / 2.0).min(4000.0) / f0_base).floor() as usize;
    let harmonic_gains: Vec<f64> = (1..=n_harmonics.max(1))
        .map(|h| rng.gen_range(0.5..1.0) / h as f64)
        .collect();
    let noise_gain: f64 = rng.gen_range(0.01..0.03);

    let mut phase = 0.0f64;
    let mut samples = Vec::with_capacity(len);
    for n in 0..len {
        let t = n as f64 * dt;
        let f0 = f0_base * (1.0 + vibrato_depth * (2.0 * PI * vibrato_hz * t).sin());
        phase += 2.0 * PI * f0 * dt;
        let mut v = 0.0f64;
        for (h, gain) in harmonic_gains.iter().enumerate() {
            v += gain * ((h + 1) as f64 * phase).sin();
        }
        let envelope = 0.55 + 0.45 * (2.0 * PI * syllable_hz * t + syllable_phase).sin();
        v = v * envelope + noise_gain * rng.gen_range(-1.0..1.0);
        samples.push(v);
    }
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-9);
    let gain = 0.7 / peak;
    let samples: Vec<f32> = samples.into_iter().map(|v| (v * gain) as f32).collect();
    AudioSignal::new(samples, sample_rate).expect("synthesized samples are finite")
}

/// Writes `files` synthetic WAVs into `dir` and returns their paths.
pub fn write_corpus(
    dir: &Path,
    files: usize,
    duration_s: f64,
    sample_rate: u32,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(CodecError::from)?;
    let mut paths = Vec::with_capacity(files);
    for i in 0..files {
        let signal = synth_signal(seed, i, duration_s, sample_rate);
        let path = dir.join(format!("synth_{i:03}.wav"));
        wav::write_wav(&path, &signal)?;
        paths.push(path);
    }
    Ok(paths)
}
