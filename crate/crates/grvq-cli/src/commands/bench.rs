//! `bench`: rate-distortion comparison across quantizer allocations at fixed
//! bitrates, trained per grid point on a seeded train/held-out file split.

use std::path::Path;
use std::str::FromStr;

use grvq_codec::bitstream::{bitrate_of, CodecConfig};
use grvq_codec::error::CodecError;
use grvq_codec::feature::FeatureMatrix;
use grvq_codec::frontend::{mel_distance, snr_db, AudioSignal, MdctTransform};
use grvq_codec::grvq::fit_grvq;
use grvq_codec::seed::mix_seed;
use grvq_codec::wav::read_wav;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::corpus::list_wavs;
use crate::error::{CliError, Result};
use crate::pipeline::{decode_stream, encode_signal};
use crate::report::Report;

/// One benchmarked configuration: groups x stages x entries x frame_size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPoint {
    pub groups: usize,
    pub stages: usize,
    pub entries: usize,
    pub frame_size: usize,
}

impl GridPoint {
    pub fn label(&self) -> String {
        format!(
            "{} codebooks (G={} x Nq={}, E={}, frame={})",
            self.groups * self.stages,
            self.groups,
            self.stages,
            self.entries,
            self.frame_size
        )
    }
}

impl FromStr for GridPoint {
    type Err = CliError;

    /// Parses `GxSxExF`, e.g. `2x2x1024x480`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('x').collect();
        if parts.len() != 4 {
            return Err(CodecError::Config(format!(
                "grid point `{s}` must be GROUPSxSTAGESxENTRIESxFRAME, e.g. 2x2x1024x480"
            ))
            .into());
        }
        let field = |i: usize, name: &str| -> Result<usize> {
            parts[i].parse().map_err(|_| {
                CodecError::Config(format!("grid point `{s}`: bad {name} `{}`", parts[i])).into()
            })
        };
        Ok(GridPoint {
            groups: field(0, "groups")?,
            stages: field(1, "stages")?,
            entries: field(2, "entries")?,
            frame_size: field(3, "frame_size")?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub label: String,
    pub groups: usize,
    pub stages: usize,
    pub entries: usize,
    pub frame_size: usize,
    pub downsample: usize,
    pub n_codebooks: usize,
    pub bitrate_bps: f64,
    pub train_mse: f64,
    pub snr_db: f64,
    pub mel_distance: f64,
}

#[derive(Debug)]
pub struct BenchOutcome {
    /// Rows sorted by bitrate, then mel distance.
    pub rows: Vec<BenchRow>,
    pub train_files: Vec<String>,
    pub eval_files: Vec<String>,
    pub report: Report,
}

pub const BENCH_COLUMNS: [&str; 11] = [
    "config",
    "groups",
    "stages",
    "entries",
    "frame_size",
    "downsample",
    "n_codebooks",
    "bitrate_bps",
    "train_mse",
    "snr_db",
    "mel_distance",
];

fn bench_point(
    point: &GridPoint,
    base: &RunConfig,
    train_signals: &[AudioSignal],
    eval_signals: &[AudioSignal],
) -> Result<BenchRow> {
    let config = RunConfig {
        groups: point.groups,
        stages: point.stages,
        entries: point.entries,
        frame_size: point.frame_size,
        ..base.clone()
    };
    config.validate()?;
    let transform = MdctTransform::new(config.frame_size)?;
    let parts: Vec<FeatureMatrix> = train_signals
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| transform.analyze(s))
        .collect::<std::result::Result<_, _>>()?;
    let features = FeatureMatrix::concat_frames(&parts)?;
    let (model, fit_report) = fit_grvq(&features, &config.fit_config())?;

    let mut snr_sum = 0.0f64;
    let mut mel_sum = 0.0f64;
    for signal in eval_signals {
        let (header, codes) = encode_signal(&model, signal)?;
        let decoded = decode_stream(&model, &header, &codes)?;
        snr_sum += snr_db(signal, &decoded)?;
        mel_sum += mel_distance(signal, &decoded, &config.mel_scales)?;
    }
    let n = eval_signals.len() as f64;
    let bitrate = bitrate_of(&CodecConfig {
        sample_rate: config.sample_rate,
        strides: vec![(config.frame_size / 2) as u32],
        n_codebooks: (config.groups * config.stages) as u32,
        entries: config.entries as u32,
    })?;
    Ok(BenchRow {
        label: point.label(),
        groups: point.groups,
        stages: point.stages,
        entries: point.entries,
        frame_size: point.frame_size,
        downsample: point.frame_size / 2,
        n_codebooks: point.groups * point.stages,
        bitrate_bps: bitrate,
        train_mse: fit_report.final_mse,
        snr_db: snr_sum / n,
        mel_distance: mel_sum / n,
    })
}

pub fn cmd_bench(
    corpus_dir: &Path,
    grid: &[GridPoint],
    out_csv: Option<&Path>,
    config: &RunConfig,
) -> Result<BenchOutcome> {
    config.validate()?;
    if grid.is_empty() {
        return Err(CodecError::Config("benchmark grid is empty".into()).into());
    }
    let paths = list_wavs(corpus_dir)?;
    if paths.len() < 5 {
        return Err(CliError::InsufficientCorpus(format!(
            "need at least 5 files for a held-out split, found {}",
            paths.len()
        )));
    }

    // 80/20 held-out split by file, seeded independently of training.
    const SPLIT_TAG: u64 = 0x73706c6974; // "split"
    let mut shuffled = paths.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, SPLIT_TAG));
    shuffled.shuffle(&mut rng);
    let n_train = ((shuffled.len() * 4) / 5).clamp(1, shuffled.len() - 1);
    let (train_paths, eval_paths) = shuffled.split_at(n_train);

    let load = |paths: &[std::path::PathBuf]| -> Result<Vec<AudioSignal>> {
        paths
            .iter()
            .map(|p| {
                let signal = read_wav(p).map_err(|source| CliError::InFile {
                    path: p.display().to_string(),
                    source,
                })?;
                if signal.sample_rate() != config.sample_rate {
                    return Err(CliError::InFile {
                        path: p.display().to_string(),
                        source: CodecError::Config(format!(
                            "sample rate {} does not match configured rate {}",
                            signal.sample_rate(),
                            config.sample_rate
                        )),
                    });
                }
                Ok(signal)
            })
            .collect()
    };
    let train_signals = load(train_paths)?;
    let eval_signals = load(eval_paths)?;

    // Grid points are independent training jobs; each is internally
    // sequential so results match a single-threaded run bit for bit.
    let mut rows: Vec<BenchRow> = grid
        .par_iter()
        .map(|point| bench_point(point, config, &train_signals, &eval_signals))
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| {
        a.bitrate_bps
            .total_cmp(&b.bitrate_bps)
            .then(a.mel_distance.total_cmp(&b.mel_distance))
    });

    let name_of = |p: &std::path::PathBuf| {
        p.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string())
    };
    let train_files: Vec<String> = train_paths.iter().map(name_of).collect();
    let eval_files: Vec<String> = eval_paths.iter().map(name_of).collect();

    let mut report = Report::new(&BENCH_COLUMNS);
    report.comment_config(&config.echo_lines());
    report
        .comments
        .push(format!("train_files = [{}]", train_files.join(", ")));
    report
        .comments
        .push(format!("eval_files = [{}]", eval_files.join(", ")));
    for row in &rows {
        report.push_row(vec![
            row.label.clone(),
            row.groups.to_string(),
            row.stages.to_string(),
            row.entries.to_string(),
            row.frame_size.to_string(),
            row.downsample.to_string(),
            row.n_codebooks.to_string(),
            format!("{:.3}", row.bitrate_bps),
            format!("{:.9}", row.train_mse),
            format!("{:.6}", row.snr_db),
            format!("{:.6}", row.mel_distance),
        ]);
    }
    if let Some(path) = out_csv {
        report.write_csv(path)?;
    }
    Ok(BenchOutcome {
        rows,
        train_files,
        eval_files,
        report,
    })
}
