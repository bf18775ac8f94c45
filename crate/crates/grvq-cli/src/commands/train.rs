//! `train`: fit a quantizer on a directory of WAV files.

use std::path::{Path, PathBuf};

use grvq_codec::bitstream::serialize_model;
use grvq_codec::error::CodecError;
use grvq_codec::feature::FeatureMatrix;
use grvq_codec::frontend::MdctTransform;
use grvq_codec::grvq::{fit_grvq, FitReport};
use grvq_codec::wav::{read_wav, write_atomic};

use crate::config::RunConfig;
use crate::corpus::list_wavs;
use crate::error::{CliError, Result};

#[derive(Debug)]
pub struct TrainOutcome {
    pub model_path: PathBuf,
    pub report_path: PathBuf,
    pub report: FitReport,
    pub files: usize,
    pub frames: usize,
}

/// Gathers front-end features for every WAV in `dir`, in sorted file order.
/// Zero-length files contribute no frames and are skipped.
fn corpus_features(dir: &Path, config: &RunConfig) -> Result<(FeatureMatrix, usize)> {
    let paths = list_wavs(dir)?;
    let transform = MdctTransform::new(config.frame_size)?;
    let mut parts = Vec::new();
    let mut used = 0usize;
    for path in &paths {
        let in_file = |source: CodecError| CliError::InFile {
            path: path.display().to_string(),
            source,
        };
        let signal = read_wav(path).map_err(in_file)?;
        if signal.sample_rate() != config.sample_rate {
            return Err(in_file(CodecError::Config(format!(
                "sample rate {} does not match configured rate {}",
                signal.sample_rate(),
                config.sample_rate
            ))));
        }
        if signal.is_empty() {
            continue;
        }
        parts.push(transform.analyze(&signal).map_err(in_file)?);
        used += 1;
    }
    if parts.is_empty() {
        return Err(CliError::EmptyCorpus(format!(
            "no non-empty .wav files in {}",
            dir.display()
        )));
    }
    Ok((FeatureMatrix::concat_frames(&parts)?, used))
}

fn render_report(config: &RunConfig, report: &FitReport, files: usize, frames: usize) -> String {
    let mut out = String::from("[config]\n");
    for line in config.echo_lines() {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str(&format!("\n[corpus]\nfiles = {files}\nframes = {frames}\n"));
    for stage in &report.stages {
        out.push_str(&format!(
            "\n[group {} stage {}]\nepoch_mse = [{}]\nfinal_mse = {:.9}\n\
             usage_entropy_bits = {:.4}\nreinit_count = {}\n",
            stage.group,
            stage.stage,
            stage
                .epoch_mse
                .iter()
                .map(|m| format!("{m:.9}"))
                .collect::<Vec<_>>()
                .join(", "),
            stage.final_mse,
            stage.usage_entropy_bits,
            stage.reinit_count,
        ));
    }
    out.push_str(&format!("\n[total]\nfinal_mse = {:.9}\n", report.final_mse));
    out
}

pub fn cmd_train(input_dir: &Path, out: &Path, config: &RunConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let (features, files) = corpus_features(input_dir, config)?;
    let frames = features.frames();
    let (model, report) = fit_grvq(&features, &config.fit_config())?;
    write_atomic(out, &serialize_model(&model)?)?;
    let report_path = out.with_extension("report.txt");
    write_atomic(
        &report_path,
        render_report(config, &report, files, frames).as_bytes(),
    )?;
    Ok(TrainOutcome {
        model_path: out.to_path_buf(),
        report_path,
        report,
        files,
        frames,
    })
}
