//! Ground truth for checking sketches: exact quantiles, error metrics, seeded
//! data generators, theoretical size bounds and a naive histogram baseline.

mod baseline;
pub mod bounds;
pub mod generators;
mod oracle;
pub mod report;

pub use baseline::EquiWidthHistogram;
pub use bounds::{BoundParams, Distribution};
pub use oracle::{oracle_quantile, rank_error, relative_error, ExactQuantiles};
pub use report::{EvalReport, RelativeError, Row};
