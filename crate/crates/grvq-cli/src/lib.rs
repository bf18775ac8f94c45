//! Library surface of the codec CLI: configuration, corpus handling and the
//! command implementations the binary dispatches to.

pub mod commands;
pub mod config;
pub mod corpus;
pub mod error;
pub mod pipeline;
pub mod report;

pub use commands::{
    cmd_bench, cmd_decode, cmd_encode, cmd_eval, cmd_info, cmd_synth_corpus, cmd_train,
    BenchOutcome, BenchRow, DecodeOutcome, EncodeOutcome, EvalOutcome, EvalRow, GridPoint,
    InfoOutcome, TrainOutcome,
};
pub use config::RunConfig;
pub use error::{CliError, Result};

/// Environment variable capping worker threads for parallel benchmark jobs.
pub const THREADS_ENV: &str = "GRVQ_THREADS";

/// Builds the global worker pool honoring [`THREADS_ENV`]. Call once at
/// startup; later calls are ignored.
pub fn init_thread_pool() {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        if let Ok(n) = value.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
