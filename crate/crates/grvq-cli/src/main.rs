//! Command-line entry point for the group-residual VQ codec.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grvq_cli::commands::{
    cmd_bench, cmd_decode, cmd_encode, cmd_eval, cmd_info, cmd_synth_corpus, cmd_train,
};
use grvq_cli::config::RunConfig;
use grvq_cli::error::Result;
use grvq_cli::GridPoint;

#[derive(Parser)]
#[command(
    name = "grvq",
    about = "Group-residual vector quantization audio codec",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by commands that take a run configuration. A `--config` TOML
/// file supplies the base; explicit flags win.
#[derive(Args, Clone, Debug, Default)]
struct ConfigArgs {
    /// TOML file with run settings
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for every stochastic step
    #[arg(long)]
    seed: Option<u64>,
    /// Feature groups, each with its own residual stack
    #[arg(long)]
    groups: Option<usize>,
    /// Residual stages per group
    #[arg(long)]
    stages: Option<usize>,
    /// Entries per codebook
    #[arg(long)]
    entries: Option<usize>,
    /// Analysis frame size in samples (hop = half)
    #[arg(long = "frame-size")]
    frame_size: Option<usize>,
    /// Sample rate in Hz (16000 or 24000)
    #[arg(long = "sample-rate")]
    sample_rate: Option<u32>,
    /// EMA refinement epochs per stage
    #[arg(long)]
    epochs: Option<usize>,
    /// EMA decay in [0, 1]
    #[arg(long)]
    decay: Option<f32>,
    /// Pin entry 0 of stage >= 2 codebooks to the zero vector
    #[arg(long = "reserve-zero-entry")]
    reserve_zero_entry: bool,
}

impl ConfigArgs {
    fn build(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.groups {
            config.groups = v;
        }
        if let Some(v) = self.stages {
            config.stages = v;
        }
        if let Some(v) = self.entries {
            config.entries = v;
        }
        if let Some(v) = self.frame_size {
            config.frame_size = v;
        }
        if let Some(v) = self.sample_rate {
            config.sample_rate = v;
        }
        if let Some(v) = self.epochs {
            config.epochs = v;
        }
        if let Some(v) = self.decay {
            config.decay = v;
        }
        if self.reserve_zero_entry {
            config.reserve_zero_entry = true;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a quantizer model on a directory of WAV files
    Train {
        /// Directory of training WAVs
        #[arg(long)]
        input: PathBuf,
        /// Output model path (.grvm)
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Compress one WAV into a .grvq stream
    Encode {
        /// Trained model (.grvm)
        #[arg(long)]
        model: PathBuf,
        /// Input WAV
        #[arg(long)]
        input: PathBuf,
        /// Output stream path (.grvq)
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a WAV from a .grvq stream
    Decode {
        /// Trained model (.grvm)
        #[arg(long)]
        model: PathBuf,
        /// Input stream (.grvq)
        #[arg(long)]
        input: PathBuf,
        /// Output WAV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure SNR, mel distance and bitrate over a directory of WAVs
    Eval {
        /// Trained model (.grvm)
        #[arg(long)]
        model: PathBuf,
        /// Directory of WAVs to evaluate
        #[arg(long)]
        input: PathBuf,
        /// Optional CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Train and evaluate a grid of quantizer allocations on one corpus
    Bench {
        /// Directory of corpus WAVs (split 80/20 by file, seeded)
        #[arg(long)]
        input: PathBuf,
        /// Grid points as GROUPSxSTAGESxENTRIESxFRAME, comma separated
        #[arg(long, value_delimiter = ',')]
        grid: Vec<String>,
        /// Optional CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Describe a .grvm model or .grvq stream
    Info {
        /// File to inspect
        path: PathBuf,
    },
    /// Generate a seeded synthetic speech-like corpus
    SynthCorpus {
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Number of files
        #[arg(long, default_value_t = 20)]
        files: usize,
        /// Duration per file in seconds
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        /// Sample rate in Hz
        #[arg(long = "sample-rate", default_value_t = 24000)]
        sample_rate: u32,
        /// Corpus seed
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { input, out, config } => {
            let config = config.build()?;
            let outcome = cmd_train(&input, &out, &config)?;
            println!(
                "trained on {} files ({} frames); final train MSE {:.9}",
                outcome.files, outcome.frames, outcome.report.final_mse
            );
            println!("model written to {}", outcome.model_path.display());
            println!("report written to {}", outcome.report_path.display());
        }
        Command::Encode { model, input, out } => {
            let outcome = cmd_encode(&model, &input, &out)?;
            println!(
                "encoded {} frames ({:.3} s) into {} bytes at {:.1} bits/s",
                outcome.frames, outcome.duration_s, outcome.stream_bytes, outcome.bitrate_bps
            );
            println!("stream written to {}", out.display());
        }
        Command::Decode { model, input, out } => {
            let outcome = cmd_decode(&model, &input, &out)?;
            println!(
                "decoded {} samples at {} Hz to {}",
                outcome.samples,
                outcome.sample_rate,
                out.display()
            );
        }
        Command::Eval {
            model,
            input,
            out,
            config,
        } => {
            let config = config.build()?;
            let outcome = cmd_eval(&model, &input, out.as_deref(), &config)?;
            print!("{}", outcome.report.to_table());
            if let Some(path) = out {
                println!("csv written to {}", path.display());
            }
        }
        Command::Bench {
            input,
            grid,
            out,
            config,
        } => {
            let config = config.build()?;
            let points: Vec<GridPoint> = grid
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_>>()?;
            let outcome = cmd_bench(&input, &points, out.as_deref(), &config)?;
            print!("{}", outcome.report.to_table());
            if let Some(path) = out {
                println!("csv written to {}", path.display());
            }
        }
        Command::Info { path } => {
            let outcome = cmd_info(&path)?;
            print!("{}", outcome.render());
        }
        Command::SynthCorpus {
            out,
            files,
            duration,
            sample_rate,
            seed,
        } => {
            let paths = cmd_synth_corpus(&out, files, duration, sample_rate, seed)?;
            println!(
                "wrote {} files of {:.1} s at {} Hz to {}",
                paths.len(),
                duration,
                sample_rate,
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    grvq_cli::init_thread_pool();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
