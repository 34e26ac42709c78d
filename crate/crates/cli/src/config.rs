use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use ddsketch::eval::generators::Dataset;
use ddsketch::MappingKind;

use crate::EvalError;

/// Stream length used by the generators when `--n` is absent.
pub const DEFAULT_N: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Accuracy,
    Size,
    Bench,
    Merge,
    Bounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    Pareto,
    Exponential,
    Lognormal,
    /// Newline-delimited decimal values read from `--input`.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MappingArg {
    Logarithmic,
    Linear,
    Quadratic,
}

impl From<MappingArg> for MappingKind {
    fn from(m: MappingArg) -> Self {
        match m {
            MappingArg::Logarithmic => MappingKind::Logarithmic,
            MappingArg::Linear => MappingKind::LinearInterpolated,
            MappingArg::Quadratic => MappingKind::QuadraticInterpolated,
        }
    }
}

/// Bucket limit per store; `none` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BucketLimit(pub Option<usize>);

impl FromStr for BucketLimit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("none") {
            return Ok(BucketLimit(None));
        }
        s.parse::<usize>()
            .map(|m| BucketLimit(Some(m)))
            .map_err(|_| format!("expected a bucket count or `none`, got {s:?}"))
    }
}

impl fmt::Display for BucketLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(m) => write!(f, "{m}"),
            None => f.write_str("none"),
        }
    }
}

/// One experiment run.
#[derive(Debug, Clone, Parser)]
#[command(
    name = "ddsketch-eval",
    version,
    about = "Quantile sketch experiments with CSV output"
)]
pub struct RunConfig {
    #[arg(long, value_enum, default_value = "accuracy")]
    pub command: Command,

    #[arg(long, value_enum, default_value = "pareto")]
    pub generator: Generator,

    /// Pareto shape.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Pareto scale.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Exponential rate.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Mean of the underlying normal for lognormal data.
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,

    /// Stream length. With file input, the first `n` values are used.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,

    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,

    #[arg(long, value_enum, default_value = "logarithmic")]
    pub mapping: MappingArg,

    /// Bucket limit per store, or `none`.
    #[arg(long, default_value = "2048")]
    pub max_buckets: BucketLimit,

    #[arg(long, value_delimiter = ',', default_value = "0.5,0.95,0.99")]
    pub quantiles: Vec<f64>,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Shards for the merge experiments.
    #[arg(long, default_value_t = 16)]
    pub shards: usize,

    #[arg(long)]
    pub input: Option<PathBuf>,

    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Directory receiving the serialized shard sketches of `merge`.
    #[arg(long)]
    pub sketch_dir: Option<PathBuf>,

    /// Exit nonzero when a guaranteed row misses its bound.
    #[arg(long)]
    pub check: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::parse_from(["ddsketch-eval"])
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |msg: String| Err(EvalError::Config(msg));
        if self.n == Some(0) {
            return bad("n must be at least 1".into());
        }
        if let Some(q) = self.quantiles.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return bad(format!("quantile {q} outside [0, 1]"));
        }
        if self.quantiles.is_empty() {
            return bad("no quantiles requested".into());
        }
        if matches!(self.command, Command::Merge | Command::Bench) && self.shards < 2 {
            return bad(format!(
                "merging needs at least 2 shards, got {}",
                self.shards
            ));
        }
        if self.generator == Generator::File && self.input.is_none() {
            return bad("--generator file requires --input".into());
        }
        Ok(())
    }

    pub fn mapping_kind(&self) -> MappingKind {
        self.mapping.into()
    }

    /// Dataset behind a parametric generator; `None` for file input.
    pub fn dataset(&self) -> Option<Dataset> {
        match self.generator {
            Generator::Pareto => Some(Dataset::Pareto {
                a: self.a,
                b: self.b,
            }),
            Generator::Exponential => Some(Dataset::Exponential {
                lambda: self.lambda,
            }),
            Generator::Lognormal => Some(Dataset::Lognormal {
                mu: self.mu,
                sigma: self.sigma,
            }),
            Generator::File => None,
        }
    }

    /// Short description of the data source for report headers.
    pub fn source(&self) -> String {
        match self.generator {
            Generator::Pareto => format!("pareto(a={}, b={})", self.a, self.b),
            Generator::Exponential => format!("exponential(lambda={})", self.lambda),
            Generator::Lognormal => format!("lognormal(mu={}, sigma={})", self.mu, self.sigma),
            Generator::File => format!(
                "file({})",
                self.input
                    .as_deref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default()
            ),
        }
    }

    pub fn dataset_name(&self) -> &'static str {
        match self.generator {
            Generator::Pareto => "pareto",
            Generator::Exponential => "exponential",
            Generator::Lognormal => "lognormal",
            Generator::File => "file",
        }
    }
}
