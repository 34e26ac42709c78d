//! End-to-end acceptance checks. Prints one line per criterion and exits
//! nonzero if any criterion fails.

use std::time::Instant;

use ddsketch::eval::bounds::{bound_exponential, bound_pareto};
use ddsketch::eval::generators::{gen_pareto, ks_distance, Dataset};
use ddsketch::eval::{
    oracle_quantile, BoundParams, Distribution, EquiWidthHistogram, ExactQuantiles,
};
use ddsketch::{parallel, DDSketch, Layout, MappingKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn q_grid() -> impl Iterator<Item = f64> {
    (0..=100).map(|i| f64::from(i) / 100.0)
}

fn gamma_of(alpha: f64) -> f64 {
    (1.0 + alpha) / (1.0 - alpha)
}

fn rel_err(est: f64, exact: f64) -> f64 {
    (est - exact).abs() / exact.abs()
}

/// Relative-error guarantee on unbounded sketches.
fn alpha_guarantee() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = 10f64.powf(rng.gen_range(0.0..=5.0)).round() as usize;
        let seed = rng.gen();
        for alpha in [0.01, 0.05] {
            let ds = match case % 4 {
                0 => Dataset::Pareto {
                    a: rng.gen_range(0.5..3.0),
                    b: 1.0,
                },
                1 => Dataset::Exponential {
                    lambda: rng.gen_range(0.1..10.0),
                },
                2 => Dataset::Lognormal {
                    mu: 0.0,
                    sigma: rng.gen_range(0.5..4.0),
                },
                _ => Dataset::GammaPowers {
                    gamma: gamma_of(alpha),
                    lo: -300,
                    hi: 300,
                },
            };
            let values = ds.generate(n, seed).map_err(|e| e.to_string())?;
            let exact = ExactQuantiles::new(values.clone()).map_err(|e| e.to_string())?;
            for kind in MappingKind::ALL {
                let mut s = DDSketch::new(alpha, kind, None).map_err(|e| e.to_string())?;
                s.extend_from_slice(&values).map_err(|e| e.to_string())?;
                for q in q_grid() {
                    let est = s.quantile(q).map_err(|e| e.to_string())?;
                    let truth = exact.quantile(q).map_err(|e| e.to_string())?;
                    let e = rel_err(est, truth);
                    worst = worst.max(e / alpha);
                    checked += 1;
                    if e > alpha {
                        return Err(format!(
                            "case {case} {} n={n} alpha={alpha} {} q={q}: estimate {est} exact {truth} error {e}",
                            ds.name(),
                            kind.name()
                        ));
                    }
                }
            }
        }
    }
    Ok(format!(
        "{checked} quantile answers, worst error/alpha {worst:.6}"
    ))
}

/// Merges the sketches in a random binary tree.
fn random_tree_merge(mut sketches: Vec<DDSketch>, rng: &mut ChaCha8Rng) -> DDSketch {
    while sketches.len() > 1 {
        let i = rng.gen_range(0..sketches.len());
        let a = sketches.swap_remove(i);
        let j = rng.gen_range(0..sketches.len());
        let mut b = sketches.swap_remove(j);
        if rng.gen() {
            b.merge(&a).unwrap();
            sketches.push(b);
        } else {
            let mut a = a;
            a.merge(&b).unwrap();
            sketches.push(a);
        }
    }
    sketches.pop().unwrap()
}

fn full_mergeability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut merges = 0;
    for stream in 0..20 {
        let n = rng.gen_range(1..50_000);
        let mut values = gen_pareto(1.0, 1.0, n, rng.gen()).unwrap();
        if stream % 2 == 1 {
            for v in values.iter_mut() {
                match rng.gen_range(0..4) {
                    0 => *v = -*v,
                    1 if rng.gen_ratio(1, 10) => *v = 0.0,
                    _ => {}
                }
            }
        }
        let kind = MappingKind::ALL[stream % 3];
        let template = DDSketch::new(0.01, kind, None).unwrap();
        let baseline = parallel::sketch_slice_sequential(&template, &values).unwrap();
        for k in [2, 16] {
            let mut shuffled = values.clone();
            shuffled.shuffle(&mut rng);
            let shards = parallel::split_shards(&shuffled, k);
            let sketches = parallel::sketch_shards(&template, &shards).unwrap();
            let merged = random_tree_merge(sketches, &mut rng);
            merges += 1;
            let same_buckets = merged.positive() == baseline.positive()
                && merged.negative() == baseline.negative()
                && merged.zero_count() == baseline.zero_count()
                && merged.count() == baseline.count()
                && merged.min() == baseline.min()
                && merged.max() == baseline.max();
            if !same_buckets {
                return Err(format!(
                    "stream {stream} k={k}: merged buckets differ from baseline"
                ));
            }
            // the running sum depends on addition order
            let scale = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            if (merged.sum() - baseline.sum()).abs() > 1e-9 * scale {
                return Err(format!(
                    "stream {stream} k={k}: sum {} vs {}",
                    merged.sum(),
                    baseline.sum()
                ));
            }
            for q in q_grid() {
                let (a, b) = (merged.quantile(q).unwrap(), baseline.quantile(q).unwrap());
                if a.to_bits() != b.to_bits() {
                    return Err(format!("stream {stream} k={k} q={q}: {a} vs {b}"));
                }
            }
        }
    }
    Ok(format!(
        "{merges} tree merges bucket-identical with identical quantiles"
    ))
}

fn collapse_correctness() -> Outcome {
    let alpha = 0.01;
    let m = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut safe, mut unsafe_) = (0, 0);
    for case in 0..10 {
        let n = rng.gen_range(1_000..20_000);
        let ds = Dataset::GammaPowers {
            gamma: gamma_of(alpha),
            lo: 1,
            hi: 256,
        };
        let mut values = ds.generate(n, rng.gen()).unwrap();
        if case % 2 == 1 {
            values.iter_mut().for_each(|v| *v = -*v);
        }
        let exact = ExactQuantiles::new(values.clone()).unwrap();
        for kind in MappingKind::ALL {
            let mut s = DDSketch::new(alpha, kind, Some(m)).unwrap();
            s.extend_from_slice(&values).unwrap();
            if s.count() != n as u64 || s.positive().total() + s.negative().total() != n as u64 {
                return Err(format!("case {case}: count {} for {n} values", s.count()));
            }
            if s.bucket_count() > m {
                return Err(format!(
                    "case {case}: {} buckets above limit",
                    s.bucket_count()
                ));
            }
            for q in q_grid() {
                if !s.is_quantile_safe(q).unwrap() {
                    unsafe_ += 1;
                    continue;
                }
                safe += 1;
                let (est, truth) = (s.quantile(q).unwrap(), exact.quantile(q).unwrap());
                if rel_err(est, truth) > alpha {
                    return Err(format!(
                        "case {case} {} q={q} flagged safe: estimate {est} exact {truth}",
                        kind.name()
                    ));
                }
            }
        }
    }
    if safe == 0 || unsafe_ == 0 {
        return Err(format!("degenerate run: {safe} safe, {unsafe_} unsafe"));
    }
    Ok(format!(
        "{safe} safe answers within alpha, {unsafe_} flagged unsafe, counts conserved"
    ))
}

fn size_bounds() -> Outcome {
    let n = 1_000_000;
    let pareto = bound_pareto(&BoundParams::with_defaults(
        n,
        Distribution::Pareto { a: 1.0, b: 1.0 },
    ))
    .map_err(|e| e.to_string())?;
    let exponential = bound_exponential(&BoundParams::with_defaults(
        n,
        Distribution::Exponential { lambda: 1.0 },
    ))
    .map_err(|e| e.to_string())?;
    let values = gen_pareto(1.0, 1.0, n as usize, 4).unwrap();
    let template = DDSketch::new(0.01, MappingKind::Logarithmic, None).unwrap();
    let buckets = parallel::sketch_slice(&template, &values)
        .unwrap()
        .bucket_count();
    let detail = format!("pareto bound {pareto:.2}, exponential bound {exponential:.2}, empirical pareto buckets {buckets}");
    if (3379.0..=3382.0).contains(&pareto)
        && (272.0..=274.0).contains(&exponential)
        && buckets < 2048
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn throughput() -> String {
    let n = 10_000_000;
    let values = gen_pareto(1.0, 1.0, n, 5).unwrap();
    let mut line = format!("{n} inserts:");
    for kind in [MappingKind::Logarithmic, MappingKind::LinearInterpolated] {
        let mut s = DDSketch::new(0.01, kind, Some(2048)).unwrap();
        let start = Instant::now();
        s.extend_from_slice(&values).unwrap();
        let t = start.elapsed();
        line.push_str(&format!(
            " {} {:.3} s ({:.1} ns/insert, {} buckets);",
            kind.name(),
            t.as_secs_f64(),
            t.as_nanos() as f64 / n as f64,
            s.bucket_count()
        ));
    }
    line
}

fn random_sketch(rng: &mut ChaCha8Rng) -> DDSketch {
    let alpha = [0.005, 0.01, 0.02, 0.05][rng.gen_range(0..4)];
    let kind = MappingKind::ALL[rng.gen_range(0..3)];
    let layout = if rng.gen() {
        Layout::Dense
    } else {
        Layout::Sparse
    };
    let m = if rng.gen() {
        None
    } else {
        Some(rng.gen_range(2..200))
    };
    let mut s = DDSketch::with_layout(alpha, kind, m, layout).unwrap();
    let n = rng.gen_range(0..5_000);
    for _ in 0..n {
        let x = match rng.gen_range(0..10) {
            0 => 0.0,
            1..=3 => -rng.gen_range(1e-3..1e6f64),
            _ => 10f64.powf(rng.gen_range(-20.0..20.0)),
        };
        s.insert_n(x, rng.gen_range(1..4)).unwrap();
    }
    s
}

/// Offset of the first positive bucket counter: 62 bytes of fixed fields,
/// then the block's lowest index and span.
const FIRST_POSITIVE_COUNTER: usize = 70;

fn serialization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut rejected = 0;
    for case in 0..100 {
        let s = random_sketch(&mut rng);
        let bytes = s.serialize();
        let layout = if case % 2 == 0 {
            Layout::Dense
        } else {
            Layout::Sparse
        };
        let back = DDSketch::deserialize_with(&bytes, s.max_buckets(), layout)
            .map_err(|e| format!("case {case}: {e}"))?;
        if back != s || back.sum().to_bits() != s.sum().to_bits() || back.serialize() != bytes {
            return Err(format!("case {case}: round trip changed the sketch"));
        }

        let mut corrupt: Vec<Vec<u8>> = Vec::new();
        corrupt.push(bytes[..rng.gen_range(0..bytes.len())].to_vec());
        let mut longer = bytes.clone();
        longer.push(0);
        corrupt.push(longer);
        // magic, version, mapping kind, a high byte of alpha, the low byte of gamma
        for (pos, mask) in [(0usize, 1u8), (4, 2), (5, 4), (12, 1), (14, 1)] {
            let mut c = bytes.clone();
            c[pos] ^= mask;
            corrupt.push(c);
        }
        if s.positive().bucket_count() > 0 {
            let mut c = bytes.clone();
            c[FIRST_POSITIVE_COUNTER] ^= 1;
            corrupt.push(c);
        }
        for (i, c) in corrupt.iter().enumerate() {
            if DDSketch::deserialize(c).is_ok() {
                return Err(format!("case {case}: corruption {i} accepted"));
            }
            rejected += 1;
        }
    }
    Ok(format!(
        "100 exact round trips, {rejected} corrupted payloads rejected"
    ))
}

fn oracle_and_generator() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..1000 {
        let n = rng.gen_range(1..2_000);
        let distinct = rng.gen_range(1..=n);
        let data: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(0..distinct) as f64 * 0.37 - 50.0)
            .collect();
        let mut sorted = data.clone();
        sorted.sort_by(f64::total_cmp);
        let q: f64 = if case % 10 == 0 {
            [0.0, 1.0][case / 10 % 2]
        } else {
            rng.gen()
        };
        let expected = sorted[(q * (n - 1) as f64).floor() as usize];
        let got = oracle_quantile(&data, q).map_err(|e| e.to_string())?;
        let cached = ExactQuantiles::new(data).unwrap().quantile(q).unwrap();
        if got != expected || cached != expected {
            return Err(format!(
                "case {case} n={n} q={q}: {got} / {cached} vs sort {expected}"
            ));
        }
    }
    let values = gen_pareto(1.0, 1.0, 1_000_000, 8).unwrap();
    let ks = ks_distance(&values, |x| if x < 1.0 { 0.0 } else { 1.0 - 1.0 / x });
    if ks > 0.005 {
        return Err(format!("Pareto KS distance {ks}"));
    }
    Ok(format!(
        "1000 oracle cases match a full sort; Pareto KS distance {ks:.5}"
    ))
}

fn heavy_tail() -> Outcome {
    let values = gen_pareto(1.0, 1.0, 1_000_000, 9).unwrap();
    let template = DDSketch::new(0.01, MappingKind::Logarithmic, Some(2048)).unwrap();
    let sketch = parallel::sketch_slice_sequential(&template, &values).unwrap();
    let hist = EquiWidthHistogram::from_data(&values, 1000).unwrap();
    let exact = oracle_quantile(&values, 0.99).unwrap();
    let s_err = rel_err(sketch.quantile(0.99).unwrap(), exact);
    let h_err = rel_err(hist.quantile(0.99).unwrap(), exact);
    let detail = format!("p99 relative error: sketch {s_err:.5}, 1000-bin histogram {h_err:.2}");
    if s_err <= 0.01 && h_err > 0.1 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 alpha guarantee", alpha_guarantee),
        ("2 full mergeability", full_mergeability),
        ("3 collapse correctness", collapse_correctness),
        ("4 size bounds", size_bounds),
        ("6 serialization", serialization),
        ("7 oracle and generator", oracle_and_generator),
        ("8 heavy-tail contrast", heavy_tail),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{name}] {detail} ({secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{name}] {detail} ({secs:.1} s)");
            }
        }
    }
    println!("INFO [5 throughput] {}", throughput());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
