//! A relative-error quantile sketch.
//!
//! Values are assigned to logarithmically sized buckets so that every bucket's
//! representative value lies within a relative distance `alpha` of anything
//! the bucket holds. Bucket boundaries depend only on `alpha`, which makes two
//! sketches with the same parameters mergeable by adding counters index-wise.
//!
//! ```
//! use ddsketch::{DDSketch, MappingKind};
//!
//! let mut sketch = DDSketch::new(0.01, MappingKind::Logarithmic, Some(2048)).unwrap();
//! for v in 1..=100 {
//!     sketch.insert(v as f64).unwrap();
//! }
//! let median = sketch.quantile(0.5).unwrap();
//! assert!((median - 50.0).abs() <= 0.5);
//! ```
//!
//! The [`eval`] module carries the ground truth used to check the sketch:
//! an exact-quantile oracle, seeded data generators, error metrics and the
//! theoretical size bounds.

mod error;
pub mod eval;
pub mod mapping;
pub mod parallel;
pub mod sketch;
pub mod store;

pub use error::{Error, Result};
pub use mapping::{IndexMapping, MappingKind};
pub use sketch::{DDSketch, QuantileBucket};
pub use store::{BucketStore, CollapseDirection, Layout};
