//! `eval`: distortion metrics per file and in aggregate.

use std::path::Path;

use grvq_codec::bitstream::{bitrate_of, deserialize_model};
use grvq_codec::error::CodecError;
use grvq_codec::frontend::{mel_distance, snr_db};
use grvq_codec::wav::read_wav;

use crate::config::RunConfig;
use crate::corpus::list_wavs;
use crate::error::{CliError, Result};
use crate::pipeline::{codec_config_of, decode_stream, encode_signal};
use crate::report::Report;

#[derive(Debug, Clone)]
pub struct EvalRow {
    pub file: String,
    pub sample_rate: u32,
    pub downsample: usize,
    pub n_codebooks: usize,
    pub bitrate_bps: f64,
    pub snr_db: f64,
    pub mel_distance: f64,
}

#[derive(Debug)]
pub struct EvalOutcome {
    pub rows: Vec<EvalRow>,
    /// Unweighted mean over the per-file rows, reported as file `MEAN`.
    pub mean: EvalRow,
    pub report: Report,
}

pub const EVAL_COLUMNS: [&str; 7] = [
    "file",
    "sample_rate",
    "downsample",
    "n_codebooks",
    "bitrate_bps",
    "snr_db",
    "mel_distance",
];

fn format_row(row: &EvalRow) -> Vec<String> {
    vec![
        row.file.clone(),
        row.sample_rate.to_string(),
        row.downsample.to_string(),
        row.n_codebooks.to_string(),
        format!("{:.3}", row.bitrate_bps),
        format!("{:.6}", row.snr_db),
        format!("{:.6}", row.mel_distance),
    ]
}

pub fn cmd_eval(
    model_path: &Path,
    input_dir: &Path,
    out_csv: Option<&Path>,
    config: &RunConfig,
) -> Result<EvalOutcome> {
    config.validate()?;
    let model = deserialize_model(&std::fs::read(model_path).map_err(CodecError::from)?)?;
    let bitrate = bitrate_of(&codec_config_of(&model))?;
    let downsample = model.frame_size() / 2;
    let paths = list_wavs(input_dir)?;
    let mut rows = Vec::with_capacity(paths.len());
    for path in &paths {
        let in_file = |source: CodecError| CliError::InFile {
            path: path.display().to_string(),
            source,
        };
        let signal = read_wav(path).map_err(in_file)?;
        let (header, codes) = encode_signal(&model, &signal).map_err(|e| match e {
            CliError::Codec(source) => in_file(source),
            other => other,
        })?;
        let decoded = decode_stream(&model, &header, &codes)?;
        rows.push(EvalRow {
            file: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            sample_rate: model.sample_rate(),
            downsample,
            n_codebooks: model.n_codebooks(),
            bitrate_bps: bitrate,
            snr_db: snr_db(&signal, &decoded).map_err(in_file)?,
            mel_distance: mel_distance(&signal, &decoded, &config.mel_scales).map_err(in_file)?,
        });
    }
    let n = rows.len() as f64;
    let mean = EvalRow {
        file: "MEAN".to_string(),
        sample_rate: model.sample_rate(),
        downsample,
        n_codebooks: model.n_codebooks(),
        bitrate_bps: rows.iter().map(|r| r.bitrate_bps).sum::<f64>() / n,
        snr_db: rows.iter().map(|r| r.snr_db).sum::<f64>() / n,
        mel_distance: rows.iter().map(|r| r.mel_distance).sum::<f64>() / n,
    };

    let mut report = Report::new(&EVAL_COLUMNS);
    report.comment_config(&config.echo_lines());
    report
        .comments
        .push(format!("model = {}", model_path.display()));
    for row in &rows {
        report.push_row(format_row(row));
    }
    report.push_row(format_row(&mean));
    if let Some(path) = out_csv {
        report.write_csv(path)?;
    }
    Ok(EvalOutcome { rows, mean, report })
}
