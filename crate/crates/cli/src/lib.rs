//! Experiment harness around the `ddsketch` crate.
//!
//! Every command loads or generates a stream, runs one experiment and returns
//! an [`EvalReport`](ddsketch::eval::EvalReport) that the binary writes as
//! CSV. Reruns with the same configuration produce identical reports apart
//! from the `elapsed_ns` column.

use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod input;

pub use commands::{cmd_accuracy, cmd_bench, cmd_bounds, cmd_merge, cmd_size, run, violations};
pub use config::{BucketLimit, Command, Generator, MappingArg, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Sketch(#[from] ddsketch::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}:{line}: not a decimal value: {text:?}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        text: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
