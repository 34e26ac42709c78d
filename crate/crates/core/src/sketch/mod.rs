//! The user-facing sketch.

mod codec;

pub use codec::HEADER_LEN as EMPTY_PAYLOAD_LEN;

use crate::error::{Error, Result};
use crate::mapping::{IndexMapping, MappingKind};
use crate::store::{BucketStore, CollapseDirection, Layout};

/// Relative-error quantile sketch over all finite reals.
///
/// Positive values go to a store that collapses its lowest indices, negative
/// values (indexed by magnitude) to one that collapses its highest indices, and
/// values too small to index land in a dedicated zero counter. Exact count,
/// sum, minimum and maximum are tracked on the side.
#[derive(Debug, Clone, PartialEq)]
pub struct DDSketch {
    mapping: IndexMapping,
    positive: BucketStore,
    negative: BucketStore,
    zero_count: u64,
    count: u64,
    min: f64,
    max: f64,
    sum: f64,
}

/// The bucket a quantile query stops in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantileBucket {
    Negative(i32),
    Zero,
    Positive(i32),
}

impl DDSketch {
    /// New empty sketch with a dense layout.
    ///
    /// `max_buckets` bounds each of the positive and negative stores; it must
    /// be at least 2 when present.
    pub fn new(alpha: f64, kind: MappingKind, max_buckets: Option<usize>) -> Result<Self> {
        Self::with_layout(alpha, kind, max_buckets, Layout::Dense)
    }

    pub fn with_layout(
        alpha: f64,
        kind: MappingKind,
        max_buckets: Option<usize>,
        layout: Layout,
    ) -> Result<Self> {
        Self::from_mapping(IndexMapping::new(alpha, kind)?, max_buckets, layout)
    }

    pub fn from_mapping(
        mapping: IndexMapping,
        max_buckets: Option<usize>,
        layout: Layout,
    ) -> Result<Self> {
        if let Some(m) = max_buckets {
            if m < 2 {
                return Err(Error::InvalidBucketLimit { min: 2, got: m });
            }
        }
        Ok(DDSketch {
            mapping,
            positive: BucketStore::new(layout, max_buckets, CollapseDirection::Lowest)?,
            negative: BucketStore::new(layout, max_buckets, CollapseDirection::Highest)?,
            zero_count: 0,
            count: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            sum: 0.0,
        })
    }

    /// An empty sketch with the same mapping, limit and layout.
    pub fn empty_like(&self) -> Self {
        let mut out = self.clone();
        out.clear();
        out
    }

    pub fn clear(&mut self) {
        self.positive.clear();
        self.negative.clear();
        self.zero_count = 0;
        self.count = 0;
        self.min = f64::INFINITY;
        self.max = f64::NEG_INFINITY;
        self.sum = 0.0;
    }

    pub fn mapping(&self) -> &IndexMapping {
        &self.mapping
    }

    pub fn alpha(&self) -> f64 {
        self.mapping.alpha()
    }

    pub fn max_buckets(&self) -> Option<usize> {
        self.positive.max_buckets()
    }

    pub fn positive(&self) -> &BucketStore {
        &self.positive
    }

    pub fn negative(&self) -> &BucketStore {
        &self.negative
    }

    pub fn zero_count(&self) -> u64 {
        self.zero_count
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Smallest inserted value; `+inf` when empty. After deletions this is an
    /// outer bound rather than the exact minimum.
    pub fn min(&self) -> f64 {
        self.min
    }

    /// Largest inserted value; `-inf` when empty. Same caveat as [`min`](Self::min).
    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }

    /// Non-empty buckets across both stores, plus the zero bucket when used.
    pub fn bucket_count(&self) -> usize {
        self.positive.bucket_count()
            + self.negative.bucket_count()
            + usize::from(self.zero_count > 0)
    }

    /// Magnitudes strictly below this go to the zero bucket.
    pub fn zero_threshold(&self) -> f64 {
        self.mapping.min_indexable()
    }

    fn locate_value(&self, x: f64) -> Result<QuantileBucket> {
        if !x.is_finite() {
            return Err(Error::NonFiniteValue(x));
        }
        let magnitude = x.abs();
        if magnitude < self.mapping.min_indexable() {
            Ok(QuantileBucket::Zero)
        } else if magnitude > self.mapping.max_indexable() {
            Err(Error::ValueOutOfRange(x))
        } else if x > 0.0 {
            Ok(QuantileBucket::Positive(self.mapping.index(magnitude)))
        } else {
            Ok(QuantileBucket::Negative(self.mapping.index(magnitude)))
        }
    }

    pub fn insert(&mut self, x: f64) -> Result<()> {
        self.insert_n(x, 1)
    }

    /// Inserts `x` with multiplicity `weight`.
    pub fn insert_n(&mut self, x: f64, weight: u64) -> Result<()> {
        if weight == 0 {
            return Ok(());
        }
        let count = self
            .count
            .checked_add(weight)
            .ok_or(Error::CountOverflow { index: 0 })?;
        match self.locate_value(x)? {
            QuantileBucket::Zero => {
                self.zero_count += weight;
            }
            QuantileBucket::Positive(i) => self.positive.add(i, weight)?,
            QuantileBucket::Negative(i) => self.negative.add(i, weight)?,
        }
        self.count = count;
        self.sum += x * weight as f64;
        self.min = self.min.min(x);
        self.max = self.max.max(x);
        Ok(())
    }

    /// Removes one value from the bucket `x` maps to.
    ///
    /// Minimum and maximum are not recomputed; they stay valid outer bounds.
    pub fn delete(&mut self, x: f64) -> Result<()> {
        match self.locate_value(x)? {
            QuantileBucket::Zero => {
                if self.zero_count == 0 {
                    return Err(Error::CountUnderflow {
                        index: 0,
                        requested: 1,
                        present: 0,
                    });
                }
                self.zero_count -= 1;
            }
            QuantileBucket::Positive(i) => self.positive.remove(i, 1)?,
            QuantileBucket::Negative(i) => self.negative.remove(i, 1)?,
        }
        self.count -= 1;
        self.sum -= x;
        if self.count == 0 {
            self.min = f64::INFINITY;
            self.max = f64::NEG_INFINITY;
        }
        Ok(())
    }

    /// Walks buckets in value order until the accumulated count exceeds
    /// `q * (n - 1)`, i.e. reaches the rank `floor(1 + q (n - 1))`.
    fn locate_quantile(&self, q: f64) -> Result<QuantileBucket> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidQuantile(q));
        }
        if self.count == 0 {
            return Err(Error::EmptySketch);
        }
        let rank = q * (self.count - 1) as f64;
        let mut seen = 0u64;
        for (i, c) in self.negative.iter().rev() {
            seen += c;
            if seen as f64 > rank {
                return Ok(QuantileBucket::Negative(i));
            }
        }
        seen += self.zero_count;
        if seen as f64 > rank {
            return Ok(QuantileBucket::Zero);
        }
        for (i, c) in self.positive.iter() {
            seen += c;
            if seen as f64 > rank {
                return Ok(QuantileBucket::Positive(i));
            }
        }
        unreachable!("accumulated count reaches n > q (n - 1)")
    }

    pub fn quantile_bucket(&self, q: f64) -> Result<QuantileBucket> {
        self.locate_quantile(q)
    }

    /// Estimate of the `q`-quantile, clamped into `[min, max]`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        let stop = self.locate_quantile(q)?;
        if q == 0.0 {
            return Ok(self.min);
        }
        if q == 1.0 {
            return Ok(self.max);
        }
        let estimate = match stop {
            QuantileBucket::Negative(i) => -self.mapping.value(i),
            QuantileBucket::Zero => 0.0,
            QuantileBucket::Positive(i) => self.mapping.value(i),
        };
        Ok(estimate.clamp(self.min, self.max))
    }

    /// Whether the bucket answering `q` is untouched by collapsing, in which
    /// case the answer is guaranteed to be `alpha`-accurate.
    pub fn is_quantile_safe(&self, q: f64) -> Result<bool> {
        Ok(match self.locate_quantile(q)? {
            QuantileBucket::Negative(i) => self.negative.is_uncollapsed(i),
            QuantileBucket::Zero => true,
            QuantileBucket::Positive(i) => self.positive.is_uncollapsed(i),
        })
    }

    /// Checks that `other` can be merged into `self`.
    pub fn check_compatible(&self, other: &DDSketch) -> Result<()> {
        if !self.mapping.is_compatible(&other.mapping) {
            return Err(Error::IncompatibleMapping);
        }
        if self.max_buckets() != other.max_buckets() {
            return Err(Error::IncompatibleBucketLimit(
                self.max_buckets(),
                other.max_buckets(),
            ));
        }
        Ok(())
    }

    /// Folds `other` into `self`; `other` is left unchanged.
    pub fn merge(&mut self, other: &DDSketch) -> Result<()> {
        self.check_compatible(other)?;
        if other.count == 0 {
            return Ok(());
        }
        let count = self
            .count
            .checked_add(other.count)
            .ok_or(Error::CountOverflow { index: 0 })?;
        self.positive.merge(&other.positive)?;
        self.negative.merge(&other.negative)?;
        self.zero_count += other.zero_count;
        self.count = count;
        self.sum += other.sum;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        Ok(())
    }

    /// Inserts every value of `values`.
    pub fn extend_from_slice(&mut self, values: &[f64]) -> Result<()> {
        values.iter().try_for_each(|&v| self.insert(v))
    }

    pub fn serialize(&self) -> Vec<u8> {
        codec::encode(self)
    }

    /// Decodes a payload into an unbounded dense sketch.
    pub fn deserialize(bytes: &[u8]) -> Result<Self> {
        codec::decode(bytes, None, Layout::Dense)
    }

    /// Decodes a payload, applying the given limit and layout. The limit is
    /// not part of the wire format.
    pub fn deserialize_with(
        bytes: &[u8],
        max_buckets: Option<usize>,
        layout: Layout,
    ) -> Result<Self> {
        codec::decode(bytes, max_buckets, layout)
    }
}
