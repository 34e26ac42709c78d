//! Binary payload, version 1. Integers are little-endian.
//!
//! ```text
//! "DDSK" | version u8 | mapping kind u8 | alpha f64 | gamma f64 |
//! zero_count u64 | count u64 | min f64 | max f64 | sum f64 |
//! positive block | negative block
//!
//! block = lowest_index i32 | span u32 | span x count u64
//! ```
//!
//! Blocks are dense: every index in `lowest_index .. lowest_index + span` is
//! written, zeros included. An empty store is written as `0 | 0`.

use super::DDSketch;
use crate::error::{Error, Result};
use crate::mapping::{IndexMapping, MappingKind};
use crate::store::{BucketStore, Layout};

const MAGIC: &[u8; 4] = b"DDSK";
const VERSION: u8 = 1;

/// Size of a payload for an empty sketch.
pub const HEADER_LEN: usize = 4 + 1 + 1 + 8 * 7 + 2 * 8;

pub(super) fn encode(sketch: &DDSketch) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * sketch.bucket_count());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(sketch.mapping.kind() as u8);
    out.extend_from_slice(&sketch.mapping.alpha().to_le_bytes());
    out.extend_from_slice(&sketch.mapping.gamma().to_le_bytes());
    out.extend_from_slice(&sketch.zero_count.to_le_bytes());
    out.extend_from_slice(&sketch.count.to_le_bytes());
    out.extend_from_slice(&sketch.min.to_le_bytes());
    out.extend_from_slice(&sketch.max.to_le_bytes());
    out.extend_from_slice(&sketch.sum.to_le_bytes());
    encode_block(&sketch.positive, &mut out);
    encode_block(&sketch.negative, &mut out);
    out
}

fn encode_block(store: &BucketStore, out: &mut Vec<u8>) {
    let (Some(lo), Some(hi)) = (store.lowest_index(), store.highest_index()) else {
        out.extend_from_slice(&0i32.to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes());
        return;
    };
    let span = (hi as i64 - lo as i64 + 1) as u32;
    out.extend_from_slice(&lo.to_le_bytes());
    out.extend_from_slice(&span.to_le_bytes());
    let mut next = lo as i64;
    for (i, c) in store.iter() {
        for _ in next..i as i64 {
            out.extend_from_slice(&0u64.to_le_bytes());
        }
        out.extend_from_slice(&c.to_le_bytes());
        next = i as i64 + 1;
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        if self.buf.len() < N {
            return Err(Error::Malformed(format!("truncated {what}")));
        }
        let (head, tail) = self.buf.split_at(N);
        self.buf = tail;
        Ok(head.try_into().expect("length checked"))
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take::<1>(what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(what)?))
    }

    fn i32(&mut self, what: &str) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(what)?))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(what)?))
    }
}

pub(super) fn decode(bytes: &[u8], max_buckets: Option<usize>, layout: Layout) -> Result<DDSketch> {
    let mut r = Reader { buf: bytes };
    if &r.take::<4>("magic")? != MAGIC {
        return Err(Error::Malformed("bad magic".into()));
    }
    let version = r.u8("version")?;
    if version != VERSION {
        return Err(Error::UnknownVersion(version));
    }
    let kind = MappingKind::from_u8(r.u8("mapping kind")?)?;
    let alpha = r.f64("alpha")?;
    let gamma = r.f64("gamma")?;
    let mapping = IndexMapping::new(alpha, kind)
        .map_err(|_| Error::Malformed(format!("alpha {alpha} out of range")))?;
    if mapping.gamma().to_bits() != gamma.to_bits() {
        return Err(Error::Malformed("gamma does not match alpha".into()));
    }

    let mut sketch = DDSketch::from_mapping(mapping, max_buckets, layout)?;
    sketch.zero_count = r.u64("zero count")?;
    sketch.count = r.u64("count")?;
    sketch.min = r.f64("min")?;
    sketch.max = r.f64("max")?;
    sketch.sum = r.f64("sum")?;
    decode_block(&mut r, &mut sketch.positive)?;
    decode_block(&mut r, &mut sketch.negative)?;
    if !r.buf.is_empty() {
        return Err(Error::Malformed(format!("{} trailing bytes", r.buf.len())));
    }

    let stored = sketch.positive.total() as u128
        + sketch.negative.total() as u128
        + sketch.zero_count as u128;
    if stored != sketch.count as u128 {
        return Err(Error::Malformed(
            "count does not match bucket totals".into(),
        ));
    }
    if sketch.count > 0 {
        if !(sketch.min.is_finite() && sketch.max.is_finite() && sketch.min <= sketch.max) {
            return Err(Error::Malformed("invalid extrema".into()));
        }
    } else if sketch.min != f64::INFINITY || sketch.max != f64::NEG_INFINITY {
        return Err(Error::Malformed("extrema on an empty sketch".into()));
    }
    if sketch.sum.is_nan() {
        return Err(Error::Malformed("sum is NaN".into()));
    }
    Ok(sketch)
}

fn decode_block(r: &mut Reader<'_>, store: &mut BucketStore) -> Result<()> {
    let lo = r.i32("block index")?;
    let span = r.u32("block span")?;
    if span as usize > r.buf.len() / 8 {
        return Err(Error::Malformed("block span exceeds payload".into()));
    }
    if lo as i64 + span as i64 - 1 > i32::MAX as i64 {
        return Err(Error::Malformed("block exceeds index range".into()));
    }
    for k in 0..span {
        let c = r.u64("bucket count")?;
        store
            .add(lo + k as i32, c)
            .map_err(|_| Error::Malformed("bucket counts overflow".into()))?;
    }
    Ok(())
}
