//! One module per CLI verb. Each command is an ordinary function returning a
//! structured outcome, so the binary and the test suites drive the same code.

mod bench;
mod decode;
mod encode;
mod eval;
mod info;
mod synth;
mod train;

pub use bench::{cmd_bench, BenchOutcome, BenchRow, GridPoint};
pub use decode::{cmd_decode, DecodeOutcome};
pub use encode::{cmd_encode, EncodeOutcome};
pub use eval::{cmd_eval, EvalOutcome, EvalRow};
pub use info::{cmd_info, InfoOutcome};
pub use synth::cmd_synth_corpus;
pub use train::{cmd_train, TrainOutcome};
