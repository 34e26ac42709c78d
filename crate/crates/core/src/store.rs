//! Bucket counters keyed by index, with an optional limit on the number of
//! non-empty buckets.
//!
//! When the limit is exceeded the store collapses from one end: the extreme
//! non-empty bucket is emptied into its nearest non-empty neighbour. The
//! positive side of a sketch collapses its lowest indices, the negative side
//! its highest, so that in both cases mass only ever moves towards larger
//! values.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Memory layout of the counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Layout {
    /// Contiguous counter block covering the live index span.
    #[default]
    Dense,
    /// Ordered index to count map holding only non-empty buckets.
    Sparse,
}

/// Which end of the index range is folded when over the bucket limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CollapseDirection {
    #[default]
    Lowest,
    Highest,
}

#[derive(Debug, Clone)]
pub struct BucketStore {
    bins: Bins,
    max_buckets: Option<usize>,
    direction: CollapseDirection,
    total: u64,
    /// Most extreme index that has absorbed collapsed mass, if any.
    collapse_boundary: Option<i32>,
}

impl BucketStore {
    /// `max_buckets` of `None` means unbounded; `Some(0)` is rejected.
    pub fn new(
        layout: Layout,
        max_buckets: Option<usize>,
        direction: CollapseDirection,
    ) -> Result<Self> {
        if max_buckets == Some(0) {
            return Err(Error::InvalidBucketLimit { min: 1, got: 0 });
        }
        let bins = match layout {
            Layout::Dense => Bins::Dense(DenseBins::default()),
            Layout::Sparse => Bins::Sparse(BTreeMap::new()),
        };
        Ok(BucketStore {
            bins,
            max_buckets,
            direction,
            total: 0,
            collapse_boundary: None,
        })
    }

    pub fn unbounded(layout: Layout) -> Self {
        Self::new(layout, None, CollapseDirection::Lowest).expect("unbounded store is valid")
    }

    pub fn layout(&self) -> Layout {
        match self.bins {
            Bins::Dense(_) => Layout::Dense,
            Bins::Sparse(_) => Layout::Sparse,
        }
    }

    pub fn max_buckets(&self) -> Option<usize> {
        self.max_buckets
    }

    pub fn direction(&self) -> CollapseDirection {
        self.direction
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Number of non-empty buckets.
    pub fn bucket_count(&self) -> usize {
        self.bins.len()
    }

    pub fn get(&self, index: i32) -> u64 {
        self.bins.get(index)
    }

    pub fn collapse_boundary(&self) -> Option<i32> {
        self.collapse_boundary
    }

    /// Whether bucket `index` holds only values that originally mapped to it.
    ///
    /// The bucket that absorbed a collapse is itself excluded: it mixes its own
    /// values with folded ones.
    pub fn is_uncollapsed(&self, index: i32) -> bool {
        match (self.collapse_boundary, self.direction) {
            (None, _) => true,
            (Some(b), CollapseDirection::Lowest) => index > b,
            (Some(b), CollapseDirection::Highest) => index < b,
        }
    }

    pub fn add(&mut self, index: i32, weight: u64) -> Result<()> {
        if weight == 0 {
            return Ok(());
        }
        let total = self
            .total
            .checked_add(weight)
            .ok_or(Error::CountOverflow { index })?;
        self.bins.add(index, weight)?;
        self.total = total;
        self.collapse_excess()
    }

    pub fn remove(&mut self, index: i32, weight: u64) -> Result<()> {
        if weight == 0 {
            return Ok(());
        }
        self.bins.sub(index, weight)?;
        self.total -= weight;
        Ok(())
    }

    /// Adds every bucket of `other`, then collapses back under the limit.
    pub fn merge(&mut self, other: &BucketStore) -> Result<()> {
        let total = self
            .total
            .checked_add(other.total)
            .ok_or(Error::CountOverflow {
                index: other.iter().next().map_or(0, |(i, _)| i),
            })?;
        for (index, count) in other.iter() {
            self.bins.add(index, count)?;
        }
        self.total = total;
        self.collapse_boundary = match (self.collapse_boundary, other.collapse_boundary) {
            (Some(a), Some(b)) => Some(self.more_extreme(a, b)),
            (a, b) => a.or(b),
        };
        self.collapse_excess()
    }

    /// Non-empty buckets in increasing index order. Reversible.
    pub fn iter(&self) -> Iter<'_> {
        match &self.bins {
            Bins::Dense(d) => Iter::Dense {
                offset: d.offset,
                inner: d.counts[d.lo..d.hi].iter().enumerate(),
                start: d.lo,
            },
            Bins::Sparse(map) => Iter::Sparse(map.iter()),
        }
    }

    /// `(index, count)` pairs, for structural comparisons.
    pub fn contents(&self) -> Vec<(i32, u64)> {
        self.iter().collect()
    }

    pub fn lowest_index(&self) -> Option<i32> {
        self.bins.lowest()
    }

    pub fn highest_index(&self) -> Option<i32> {
        self.bins.highest()
    }

    /// Resets counters, keeping layout, limit and direction.
    pub fn clear(&mut self) {
        self.bins = match self.bins {
            Bins::Dense(_) => Bins::Dense(DenseBins::default()),
            Bins::Sparse(_) => Bins::Sparse(BTreeMap::new()),
        };
        self.total = 0;
        self.collapse_boundary = None;
    }

    fn more_extreme(&self, a: i32, b: i32) -> i32 {
        match self.direction {
            CollapseDirection::Lowest => a.max(b),
            CollapseDirection::Highest => a.min(b),
        }
    }

    fn collapse_excess(&mut self) -> Result<()> {
        let Some(limit) = self.max_buckets else {
            return Ok(());
        };
        while self.bins.len() > limit {
            let (from, into) = match self.direction {
                CollapseDirection::Lowest => {
                    let from = self.bins.lowest().expect("non-empty");
                    (from, self.bins.next_above(from).expect("two buckets"))
                }
                CollapseDirection::Highest => {
                    let from = self.bins.highest().expect("non-empty");
                    (from, self.bins.next_below(from).expect("two buckets"))
                }
            };
            let moved = self.bins.get(from);
            self.bins.sub(from, moved)?;
            self.bins.add(into, moved)?;
            self.collapse_boundary = Some(match self.collapse_boundary {
                Some(b) => self.more_extreme(b, into),
                None => into,
            });
        }
        Ok(())
    }
}

impl PartialEq for BucketStore {
    /// Compares bucket contents and configuration, not memory layout.
    fn eq(&self, other: &Self) -> bool {
        self.total == other.total
            && self.max_buckets == other.max_buckets
            && self.direction == other.direction
            && self.iter().eq(other.iter())
    }
}

#[derive(Debug, Clone)]
enum Bins {
    Dense(DenseBins),
    Sparse(BTreeMap<i32, u64>),
}

impl Bins {
    fn len(&self) -> usize {
        match self {
            Bins::Dense(d) => d.nonempty,
            Bins::Sparse(m) => m.len(),
        }
    }

    fn get(&self, index: i32) -> u64 {
        match self {
            Bins::Dense(d) => d.get(index),
            Bins::Sparse(m) => m.get(&index).copied().unwrap_or(0),
        }
    }

    fn add(&mut self, index: i32, weight: u64) -> Result<()> {
        match self {
            Bins::Dense(d) => d.add(index, weight),
            Bins::Sparse(m) => {
                let slot = m.entry(index).or_insert(0);
                *slot = slot
                    .checked_add(weight)
                    .ok_or(Error::CountOverflow { index })?;
                Ok(())
            }
        }
    }

    fn sub(&mut self, index: i32, weight: u64) -> Result<()> {
        match self {
            Bins::Dense(d) => d.sub(index, weight),
            Bins::Sparse(m) => {
                let present = m.get(&index).copied().unwrap_or(0);
                if present < weight {
                    return Err(Error::CountUnderflow {
                        index,
                        requested: weight,
                        present,
                    });
                }
                if present == weight {
                    m.remove(&index);
                } else {
                    m.insert(index, present - weight);
                }
                Ok(())
            }
        }
    }

    fn lowest(&self) -> Option<i32> {
        match self {
            Bins::Dense(d) => (d.nonempty > 0).then(|| d.index_at(d.lo)),
            Bins::Sparse(m) => m.keys().next().copied(),
        }
    }

    fn highest(&self) -> Option<i32> {
        match self {
            Bins::Dense(d) => (d.nonempty > 0).then(|| d.index_at(d.hi - 1)),
            Bins::Sparse(m) => m.keys().next_back().copied(),
        }
    }

    fn next_above(&self, index: i32) -> Option<i32> {
        match self {
            Bins::Dense(d) => d.next_above(index),
            Bins::Sparse(m) => m.range(index.checked_add(1)?..).next().map(|(&i, _)| i),
        }
    }

    fn next_below(&self, index: i32) -> Option<i32> {
        match self {
            Bins::Dense(d) => d.next_below(index),
            Bins::Sparse(m) => m.range(..index).next_back().map(|(&i, _)| i),
        }
    }
}

/// Contiguous counters. Positions outside `lo..hi` are zero, and when the
/// block is non-empty `counts[lo]` and `counts[hi - 1]` are non-zero.
#[derive(Debug, Clone, Default)]
struct DenseBins {
    counts: Vec<u64>,
    /// Bucket index stored at `counts[0]`.
    offset: i64,
    lo: usize,
    hi: usize,
    nonempty: usize,
}

impl DenseBins {
    fn index_at(&self, pos: usize) -> i32 {
        (self.offset + pos as i64) as i32
    }

    fn position(&self, index: i32) -> Option<usize> {
        let pos = index as i64 - self.offset;
        (pos >= 0 && (pos as usize) < self.counts.len()).then_some(pos as usize)
    }

    fn get(&self, index: i32) -> u64 {
        self.position(index).map_or(0, |p| self.counts[p])
    }

    fn add(&mut self, index: i32, weight: u64) -> Result<()> {
        let pos = match self.position(index) {
            Some(p) => p,
            None => self.grow_to(index),
        };
        let slot = &mut self.counts[pos];
        let was_empty = *slot == 0;
        *slot = slot
            .checked_add(weight)
            .ok_or(Error::CountOverflow { index })?;
        if was_empty {
            if self.nonempty == 0 {
                self.lo = pos;
                self.hi = pos + 1;
            } else {
                self.lo = self.lo.min(pos);
                self.hi = self.hi.max(pos + 1);
            }
            self.nonempty += 1;
        }
        Ok(())
    }

    fn sub(&mut self, index: i32, weight: u64) -> Result<()> {
        let present = self.get(index);
        if present < weight {
            return Err(Error::CountUnderflow {
                index,
                requested: weight,
                present,
            });
        }
        let pos = self.position(index).expect("non-zero bucket is allocated");
        self.counts[pos] -= weight;
        if self.counts[pos] == 0 {
            self.nonempty -= 1;
            if self.nonempty == 0 {
                self.lo = 0;
                self.hi = 0;
            } else {
                while self.counts[self.lo] == 0 {
                    self.lo += 1;
                }
                while self.counts[self.hi - 1] == 0 {
                    self.hi -= 1;
                }
            }
        }
        Ok(())
    }

    fn next_above(&self, index: i32) -> Option<i32> {
        let start = (index as i64 - self.offset + 1).max(self.lo as i64) as usize;
        (start..self.hi)
            .find(|&p| self.counts[p] != 0)
            .map(|p| self.index_at(p))
    }

    fn next_below(&self, index: i32) -> Option<i32> {
        let end = (index as i64 - self.offset).min(self.hi as i64);
        if end <= self.lo as i64 {
            return None;
        }
        (self.lo..end as usize)
            .rev()
            .find(|&p| self.counts[p] != 0)
            .map(|p| self.index_at(p))
    }

    /// Reallocates so that `index` fits, with headroom proportional to the
    /// live span on both sides. Returns the position of `index`.
    fn grow_to(&mut self, index: i32) -> usize {
        let index = index as i64;
        let (live_lo, live_hi) = if self.nonempty == 0 {
            (index, index)
        } else {
            (
                self.offset + self.lo as i64,
                self.offset + self.hi as i64 - 1,
            )
        };
        let new_lo = live_lo.min(index);
        let new_hi = live_hi.max(index);
        let span = (new_hi - new_lo + 1) as usize;
        let headroom = span / 2 + 16;
        let new_offset = new_lo - headroom as i64;

        let mut counts = vec![0u64; span + 2 * headroom];
        if self.nonempty > 0 {
            let dst = (live_lo - new_offset) as usize;
            counts[dst..dst + (self.hi - self.lo)].copy_from_slice(&self.counts[self.lo..self.hi]);
            self.lo = dst;
            self.hi = dst + (live_hi - live_lo + 1) as usize;
        }
        self.counts = counts;
        self.offset = new_offset;
        (index - new_offset) as usize
    }
}

/// Iterator over non-empty `(index, count)` pairs of a [`BucketStore`].
pub enum Iter<'a> {
    Dense {
        offset: i64,
        start: usize,
        inner: std::iter::Enumerate<std::slice::Iter<'a, u64>>,
    },
    Sparse(std::collections::btree_map::Iter<'a, i32, u64>),
}

impl Iterator for Iter<'_> {
    type Item = (i32, u64);

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            Iter::Dense {
                offset,
                start,
                inner,
            } => inner
                .find(|(_, &c)| c != 0)
                .map(|(p, &c)| ((*offset + (*start + p) as i64) as i32, c)),
            Iter::Sparse(it) => it.next().map(|(&i, &c)| (i, c)),
        }
    }
}

impl DoubleEndedIterator for Iter<'_> {
    fn next_back(&mut self) -> Option<Self::Item> {
        match self {
            Iter::Dense {
                offset,
                start,
                inner,
            } => inner
                .rfind(|(_, &c)| c != 0)
                .map(|(p, &c)| ((*offset + (*start + p) as i64) as i32, c)),
            Iter::Sparse(it) => it.next_back().map(|(&i, &c)| (i, c)),
        }
    }
}
