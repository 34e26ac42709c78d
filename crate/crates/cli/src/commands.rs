use std::fs;
use std::hint::black_box;
use std::time::Instant;

use ddsketch::eval::bounds::{bound_exponential, bound_pareto, empirical_upper_size};
use ddsketch::eval::generators::{gen_exponential, gen_pareto, RNG_FAMILY};
use ddsketch::eval::{BoundParams, Distribution, EvalReport, ExactQuantiles, RelativeError, Row};
use ddsketch::{parallel, DDSketch, Layout, MappingKind};

use crate::config::{Command, RunConfig, DEFAULT_N};
use crate::input::load_values;
use crate::EvalError;

/// Timed repetitions per benchmark row, after one untimed warm-up run.
pub const BENCH_REPS: usize = 5;

/// Suffix marking quantile rows whose answer came from a collapsed bucket.
pub const UNSAFE_SUFFIX: &str = ":unsafe";

pub fn run(cfg: &RunConfig) -> Result<EvalReport, EvalError> {
    cfg.validate()?;
    match cfg.command {
        Command::Accuracy => cmd_accuracy(cfg),
        Command::Size => cmd_size(cfg),
        Command::Bench => cmd_bench(cfg),
        Command::Merge => cmd_merge(cfg),
        Command::Bounds => cmd_bounds(cfg),
    }
}

fn header(cfg: &RunConfig, command: &str) -> EvalReport {
    let mut r = EvalReport::new();
    r.note("command", command);
    r.note("source", cfg.source());
    r.note("alpha", cfg.alpha);
    r.note("mapping", cfg.mapping_kind().name());
    r.note("max_buckets", cfg.max_buckets);
    r.note("seed", cfg.seed);
    r.note("rng", RNG_FAMILY);
    r
}

fn template(cfg: &RunConfig, kind: MappingKind) -> Result<DDSketch, EvalError> {
    Ok(DDSketch::new(cfg.alpha, kind, cfg.max_buckets.0)?)
}

fn quantile_list(cfg: &RunConfig) -> String {
    let qs: Vec<String> = cfg.quantiles.iter().map(|q| q.to_string()).collect();
    qs.join(",")
}

/// One row per requested quantile comparing `sketch` with the exact answer.
fn quantile_rows(
    cfg: &RunConfig,
    variant: &str,
    sketch: &DDSketch,
    exact: &ExactQuantiles,
) -> Result<Vec<Row>, EvalError> {
    let bytes = sketch.serialize().len();
    cfg.quantiles
        .iter()
        .map(|&q| {
            let est = sketch.quantile(q)?;
            let truth = exact.quantile(q)?;
            let mut variant = variant.to_string();
            if !sketch.is_quantile_safe(q)? {
                variant.push_str(UNSAFE_SUFFIX);
            }
            Ok(Row {
                dataset: cfg.dataset_name().into(),
                variant,
                n: exact.len() as u64,
                q: Some(q),
                estimate: Some(est),
                exact: Some(truth),
                relative_error: Some(RelativeError::of(est, truth)),
                rank_error: Some(exact.rank_error(est, q)?),
                bucket_count: Some(sketch.bucket_count()),
                bytes: Some(bytes),
                elapsed_ns: None,
            })
        })
        .collect()
}

/// Sketch over the whole stream against the exact quantiles.
pub fn cmd_accuracy(cfg: &RunConfig) -> Result<EvalReport, EvalError> {
    let values = load_values(cfg)?;
    let kind = cfg.mapping_kind();
    let sketch = parallel::sketch_slice_sequential(&template(cfg, kind)?, &values)?;
    let exact = ExactQuantiles::new(values)?;

    let mut r = header(cfg, "accuracy");
    r.note("quantiles", quantile_list(cfg));
    for row in quantile_rows(cfg, &format!("accuracy:{}", kind.name()), &sketch, &exact)? {
        r.push(row);
    }
    Ok(r)
}

/// Stream prefix lengths 1, 2, 5, 10, 20, 50, ... up to and including `n`.
pub fn checkpoints(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut decade = 1u64;
    'outer: loop {
        for step in [1, 2, 5] {
            let c = decade.saturating_mul(step);
            if c >= n {
                break 'outer;
            }
            out.push(c);
        }
        decade = decade.saturating_mul(10);
    }
    out.push(n);
    out
}

/// Bucket count and payload size as the stream grows.
pub fn cmd_size(cfg: &RunConfig) -> Result<EvalReport, EvalError> {
    let values = load_values(cfg)?;
    let kind = cfg.mapping_kind();
    let mut sketch = template(cfg, kind)?;
    let mut r = header(cfg, "size");
    let mut done = 0usize;
    for c in checkpoints(values.len() as u64) {
        let c = c as usize;
        sketch.extend_from_slice(&values[done..c])?;
        done = c;
        r.push(Row {
            dataset: cfg.dataset_name().into(),
            variant: format!("size:{}", kind.name()),
            n: c as u64,
            bucket_count: Some(sketch.bucket_count()),
            bytes: Some(sketch.serialize().len()),
            ..Row::default()
        });
    }
    Ok(r)
}

/// Runs `f` once untimed, then `BENCH_REPS` times, and returns the median
/// wall-clock nanoseconds together with the last result.
fn time_median<T>(mut f: impl FnMut() -> Result<T, EvalError>) -> Result<(u64, T), EvalError> {
    black_box(f()?);
    let mut times = Vec::with_capacity(BENCH_REPS);
    let mut last = None;
    for _ in 0..BENCH_REPS {
        let start = Instant::now();
        let out = black_box(f()?);
        times.push(start.elapsed().as_nanos() as u64);
        last = Some(out);
    }
    times.sort_unstable();
    Ok((
        times[BENCH_REPS / 2],
        last.expect("at least one repetition"),
    ))
}

/// Insert throughput for the logarithmic and linear mappings, plus the time
/// to merge the shard sketches of the configured mapping.
pub fn cmd_bench(cfg: &RunConfig) -> Result<EvalReport, EvalError> {
    let values = load_values(cfg)?;
    let mut r = header(cfg, "bench");
    r.note(
        "timing",
        format!(
            "elapsed_ns is the median of {BENCH_REPS} runs after one warm-up run; \
             insert rows time n inserts, the merge row times merging all shards"
        ),
    );
    r.note("shards", cfg.shards);

    for kind in [MappingKind::Logarithmic, MappingKind::LinearInterpolated] {
        let t = template(cfg, kind)?;
        let (ns, sketch) = time_median(|| Ok(parallel::sketch_slice_sequential(&t, &values)?))?;
        r.push(Row {
            dataset: cfg.dataset_name().into(),
            variant: format!("insert:{}", kind.name()),
            n: values.len() as u64,
            bucket_count: Some(sketch.bucket_count()),
            bytes: Some(sketch.serialize().len()),
            elapsed_ns: Some(ns),
            ..Row::default()
        });
    }

    let kind = cfg.mapping_kind();
    let t = template(cfg, kind)?;
    let shards = parallel::split_shards(&values, cfg.shards);
    let sketches = parallel::sketch_shards(&t, &shards)?;
    let (ns, merged) = time_median(|| {
        let mut acc = t.clone();
        for s in &sketches {
            acc.merge(s)?;
        }
        Ok(acc)
    })?;
    r.push(Row {
        dataset: cfg.dataset_name().into(),
        variant: format!("merge:{}", kind.name()),
        n: values.len() as u64,
        bucket_count: Some(merged.bucket_count()),
        bytes: Some(merged.serialize().len()),
        elapsed_ns: Some(ns),
        ..Row::default()
    });
    Ok(r)
}

/// Shard sketches sent through the wire format and merged in a tree, compared
/// with one sketch over the whole stream.
pub fn cmd_merge(cfg: &RunConfig) -> Result<EvalReport, EvalError> {
    let values = load_values(cfg)?;
    let kind = cfg.mapping_kind();
    let t = template(cfg, kind)?;

    let shards = parallel::split_shards(&values, cfg.shards);
    let payloads: Vec<Vec<u8>> = parallel::sketch_shards(&t, &shards)?
        .iter()
        .map(DDSketch::serialize)
        .collect();
    if let Some(dir) = &cfg.sketch_dir {
        let io = |source| EvalError::Io {
            path: dir.clone(),
            source,
        };
        fs::create_dir_all(dir).map_err(io)?;
        for (i, p) in payloads.iter().enumerate() {
            fs::write(dir.join(format!("shard-{i:04}.ddsk")), p).map_err(io)?;
        }
    }
    let decoded = payloads
        .iter()
        .map(|p| DDSketch::deserialize_with(p, cfg.max_buckets.0, Layout::Dense))
        .collect::<Result<Vec<_>, _>>()?;
    let mut merged = t.clone();
    if let Some(m) = parallel::tree_merge(decoded)? {
        merged.merge(&m)?;
    }

    let baseline = parallel::sketch_slice_sequential(&t, &values)?;
    let identical = merged.positive() == baseline.positive()
        && merged.negative() == baseline.negative()
        && merged.zero_count() == baseline.zero_count()
        && merged.count() == baseline.count();

    let exact = ExactQuantiles::new(values)?;
    let mut r = header(cfg, "merge");
    r.note("shards", cfg.shards);
    r.note("quantiles", quantile_list(cfg));
    r.push(Row {
        dataset: cfg.dataset_name().into(),
        variant: if identical {
            "buckets:identical".into()
        } else {
            "buckets:differ".into()
        },
        n: exact.len() as u64,
        bucket_count: Some(merged.bucket_count()),
        bytes: Some(merged.serialize().len()),
        ..Row::default()
    });
    let variant = format!("merged:{}x{}", cfg.shards, kind.name());
    for row in quantile_rows(cfg, &variant, &merged, &exact)? {
        r.push(row);
    }
    Ok(r)
}

/// Theoretical bucket bounds for exponential and Pareto data next to the
/// bucket span measured on a generated stream of each.
pub fn cmd_bounds(cfg: &RunConfig) -> Result<EvalReport, EvalError> {
    let n = cfg.n.unwrap_or(DEFAULT_N);
    let mut r = header(cfg, "bounds");
    r.note("delta1", "e^-10");
    r.note("delta2", "e^-10");
    r.note(
        "bucket_count",
        "buckets from the median's bucket to the top bucket of an unbounded sketch",
    );

    let cases = [
        (
            "exponential",
            Distribution::Exponential { lambda: cfg.lambda },
            gen_exponential(cfg.lambda, n as usize, cfg.seed)?,
        ),
        (
            "pareto",
            Distribution::Pareto { a: cfg.a, b: cfg.b },
            gen_pareto(cfg.a, cfg.b, n as usize, cfg.seed)?,
        ),
    ];
    for (name, dist, values) in cases {
        let mut p = BoundParams::with_defaults(n, dist);
        p.alpha = cfg.alpha;
        let bound = match name {
            "exponential" => bound_exponential(&p)?,
            _ => bound_pareto(&p)?,
        };
        let sketch = DDSketch::new(cfg.alpha, MappingKind::Logarithmic, None)?;
        let sketch = parallel::sketch_slice(&sketch, &values)?;
        r.push(Row {
            dataset: name.into(),
            variant: "bound".into(),
            n,
            q: Some(p.q),
            estimate: Some(bound),
            bucket_count: Some(empirical_upper_size(&sketch, p.q)?),
            ..Row::default()
        });
    }
    Ok(r)
}

/// Rows that miss a guaranteed bound: quantile rows answered from an
/// uncollapsed bucket with relative error above `alpha`, and bound rows whose
/// measured span exceeds the bound.
pub fn violations(report: &EvalReport, alpha: f64) -> Vec<String> {
    report
        .rows
        .iter()
        .filter(|row| {
            if row.variant == "bound" {
                return match (row.bucket_count, row.estimate) {
                    (Some(c), Some(b)) => c as f64 > b,
                    _ => false,
                };
            }
            if row.variant.ends_with(UNSAFE_SUFFIX) {
                return false;
            }
            match (row.relative_error, row.estimate) {
                (Some(e), Some(est)) => !e.within(alpha, est),
                _ => false,
            }
        })
        .map(|row| {
            format!(
                "{} {} n={} q={:?}: estimate {:?} exact {:?} relative error {:?} buckets {:?}",
                row.dataset,
                row.variant,
                row.n,
                row.q,
                row.estimate,
                row.exact,
                row.relative_error.and_then(|e| e.value()),
                row.bucket_count
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_sequence() {
        assert_eq!(checkpoints(1), vec![1]);
        assert_eq!(checkpoints(2), vec![1, 2]);
        assert_eq!(checkpoints(120), vec![1, 2, 5, 10, 20, 50, 100, 120]);
        assert_eq!(
            checkpoints(1000),
            vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000]
        );
    }

    #[test]
    fn violation_filter() {
        let mut r = EvalReport::new();
        let row = |variant: &str, est: f64, exact: f64| Row {
            variant: variant.into(),
            q: Some(0.5),
            estimate: Some(est),
            exact: Some(exact),
            relative_error: Some(RelativeError::of(est, exact)),
            ..Row::default()
        };
        r.push(row("accuracy:logarithmic", 1.005, 1.0));
        r.push(row("accuracy:logarithmic", 1.5, 1.0));
        r.push(row("accuracy:logarithmic:unsafe", 1.5, 1.0));
        r.push(Row {
            variant: "bound".into(),
            estimate: Some(10.0),
            bucket_count: Some(11),
            ..Row::default()
        });
        assert_eq!(violations(&r, 0.01).len(), 2);
    }
}
