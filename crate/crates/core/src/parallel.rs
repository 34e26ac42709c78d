//! Data-parallel helpers. With the `parallel` feature these run on the rayon
//! thread pool; without it they fall back to plain sequential loops with the
//! same results.

use crate::error::Result;
use crate::sketch::DDSketch;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Values per chunk when a slice is sketched in parallel.
pub const CHUNK: usize = 1 << 16;

pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Order-preserving map over a slice.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sorts by IEEE total order.
pub fn sort_floats(values: &mut [f64]) {
    #[cfg(feature = "parallel")]
    values.par_sort_unstable_by(f64::total_cmp);
    #[cfg(not(feature = "parallel"))]
    values.sort_unstable_by(f64::total_cmp);
}

/// Inserts `values` one by one into a copy of `template`.
pub fn sketch_slice_sequential(template: &DDSketch, values: &[f64]) -> Result<DDSketch> {
    let mut s = template.clone();
    s.extend_from_slice(values)?;
    Ok(s)
}

/// Sketches `values` chunk-wise and merges the chunk sketches.
///
/// Bucket-identical to [`sketch_slice_sequential`] whenever no collapse
/// occurs; with a bucket limit the collapse points may differ.
pub fn sketch_slice(template: &DDSketch, values: &[f64]) -> Result<DDSketch> {
    #[cfg(feature = "parallel")]
    {
        let parts: Vec<DDSketch> = values
            .par_chunks(CHUNK)
            .map(|chunk| sketch_slice_sequential(&template.empty_like(), chunk))
            .collect::<Result<_>>()?;
        let mut out = template.clone();
        if let Some(merged) = tree_merge(parts)? {
            out.merge(&merged)?;
        }
        Ok(out)
    }
    #[cfg(not(feature = "parallel"))]
    {
        sketch_slice_sequential(template, values)
    }
}

/// One sketch per shard, each starting from an empty copy of `template`.
pub fn sketch_shards(template: &DDSketch, shards: &[&[f64]]) -> Result<Vec<DDSketch>> {
    let empty = template.empty_like();
    map(shards, |shard| sketch_slice_sequential(&empty, shard))
        .into_iter()
        .collect()
}

/// Merges neighbours pairwise, level by level, until one sketch remains.
pub fn tree_merge(mut level: Vec<DDSketch>) -> Result<Option<DDSketch>> {
    while level.len() > 1 {
        let pairs: Vec<Vec<DDSketch>> = {
            let mut it = level.into_iter();
            let mut pairs = Vec::new();
            while let Some(a) = it.next() {
                let mut pair = vec![a];
                pair.extend(it.next());
                pairs.push(pair);
            }
            pairs
        };
        let merge_pair = |mut pair: Vec<DDSketch>| -> Result<DDSketch> {
            let right = if pair.len() == 2 { pair.pop() } else { None };
            let mut left = pair.pop().expect("pair is non-empty");
            if let Some(r) = right {
                left.merge(&r)?;
            }
            Ok(left)
        };
        #[cfg(feature = "parallel")]
        {
            level = pairs
                .into_par_iter()
                .map(merge_pair)
                .collect::<Result<_>>()?;
        }
        #[cfg(not(feature = "parallel"))]
        {
            level = pairs.into_iter().map(merge_pair).collect::<Result<_>>()?;
        }
    }
    Ok(level.pop())
}

/// Splits `values` into `k` contiguous shards of near-equal size; some may be
/// empty when `k > values.len()`.
pub fn split_shards(values: &[f64], k: usize) -> Vec<&[f64]> {
    let n = values.len();
    (0..k)
        .map(|i| &values[i * n / k..(i + 1) * n / k])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::generators::gen_pareto;
    use crate::MappingKind;

    #[test]
    fn parallel_build_matches_sequential() {
        let values = gen_pareto(1.0, 1.0, 300_000, 9).unwrap();
        let template = DDSketch::new(0.01, MappingKind::Logarithmic, None).unwrap();
        let seq = sketch_slice_sequential(&template, &values).unwrap();
        let par = sketch_slice(&template, &values).unwrap();
        assert_eq!(seq.positive(), par.positive());
        assert_eq!(seq.count(), par.count());
        assert_eq!((seq.min(), seq.max()), (par.min(), par.max()));
    }

    #[test]
    fn shards_and_tree() {
        let values: Vec<f64> = (1..=1000).map(f64::from).collect();
        let shards = split_shards(&values, 7);
        assert_eq!(shards.iter().map(|s| s.len()).sum::<usize>(), 1000);
        let template = DDSketch::new(0.02, MappingKind::Logarithmic, None).unwrap();
        let sketches = sketch_shards(&template, &shards).unwrap();
        let merged = tree_merge(sketches).unwrap().unwrap();
        let whole = sketch_slice_sequential(&template, &values).unwrap();
        assert_eq!(merged.positive(), whole.positive());
        assert!(tree_merge(Vec::new()).unwrap().is_none());

        let one = [5.0];
        let shards = split_shards(&one, 2);
        assert!(shards[0].is_empty());
        assert_eq!(shards[1], &[5.0]);
    }
}
