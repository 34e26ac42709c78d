//! Seeded synthetic data.
//!
//! All generators draw from ChaCha8 streams. Output is produced in fixed-size
//! blocks, block `k` using stream `k` of the seeded generator, so a sequence
//! is identical whether it is generated sequentially or in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Name of the generator family, recorded in report headers.
pub const RNG_FAMILY: &str = "ChaCha8 (rand_chacha), one stream per 65536-value block";

const BLOCK: usize = 1 << 16;

/// A parametrised synthetic distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dataset {
    /// Pareto with shape `a` and scale `b`: `F(t) = 1 - (b/t)^a` for `t >= b`.
    Pareto {
        a: f64,
        b: f64,
    },
    Exponential {
        lambda: f64,
    },
    Lognormal {
        mu: f64,
        sigma: f64,
    },
    /// Values `gamma^k` for integer `k` in `lo..=hi`, each nudged by at most one
    /// unit in the last place. Lands values on bucket boundaries.
    GammaPowers {
        gamma: f64,
        lo: i32,
        hi: i32,
    },
}

impl Dataset {
    pub fn name(&self) -> &'static str {
        match self {
            Dataset::Pareto { .. } => "pareto",
            Dataset::Exponential { .. } => "exponential",
            Dataset::Lognormal { .. } => "lognormal",
            Dataset::GammaPowers { .. } => "gamma-powers",
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Dataset::Pareto { a, b } => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
            Dataset::Exponential { lambda } => lambda > 0.0 && lambda.is_finite(),
            Dataset::Lognormal { mu, sigma } => mu.is_finite() && sigma >= 0.0 && sigma.is_finite(),
            Dataset::GammaPowers { gamma, lo, hi } => gamma > 1.0 && gamma.is_finite() && lo <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{self:?}")))
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Dataset::Pareto { a, b } => pareto_from_uniform(a, b, 1.0 - rng.gen::<f64>()),
            Dataset::Exponential { lambda } => exponential_from_uniform(lambda, rng.gen()),
            Dataset::Lognormal { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma * z).exp()
            }
            Dataset::GammaPowers { gamma, lo, hi } => {
                let x = gamma.powi(rng.gen_range(lo..=hi));
                match rng.gen_range(0..3) {
                    0 => x.next_down(),
                    1 => x,
                    _ => x.next_up(),
                }
            }
        }
    }

    /// `n` values, deterministic in `seed`.
    pub fn generate(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        let blocks: Vec<usize> = (0..n.div_ceil(BLOCK)).collect();
        let chunks = crate::parallel::map(&blocks, |&k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let len = BLOCK.min(n - k * BLOCK);
            (0..len).map(|_| self.draw(&mut rng)).collect::<Vec<f64>>()
        });
        Ok(chunks.concat())
    }
}

/// Inverse-CDF Pareto sample `b * u^(-1/a)` for `u` in `(0, 1]`.
pub fn pareto_from_uniform(a: f64, b: f64, u: f64) -> f64 {
    b * u.powf(-1.0 / a)
}

/// Inverse-CDF exponential sample `-ln(1 - u) / lambda` for `u` in `[0, 1)`.
pub fn exponential_from_uniform(lambda: f64, u: f64) -> f64 {
    -(1.0 - u).ln() / lambda
}

pub fn gen_pareto(a: f64, b: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    Dataset::Pareto { a, b }.generate(n, seed)
}

pub fn gen_exponential(lambda: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    Dataset::Exponential { lambda }.generate(n, seed)
}

pub fn gen_lognormal(mu: f64, sigma: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    Dataset::Lognormal { mu, sigma }.generate(n, seed)
}

pub fn gen_gamma_powers(gamma: f64, lo: i32, hi: i32, n: usize, seed: u64) -> Result<Vec<f64>> {
    Dataset::GammaPowers { gamma, lo, hi }.generate(n, seed)
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `data` and `cdf`.
pub fn ks_distance(data: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = data.to_vec();
    crate::parallel::sort_floats(&mut sorted);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_cdf_examples() {
        assert_eq!(pareto_from_uniform(1.0, 1.0, 0.25), 4.0);
        assert_eq!(pareto_from_uniform(1.0, 1.0, 1.0), 1.0);
        assert!(pareto_from_uniform(1.0, 1.0, 1.0 - 1e-12) > 1.0);
        let u = 1.0 - (-1.0f64).exp();
        assert!((exponential_from_uniform(1.0, u) - 1.0).abs() < 1e-12);
        for u in [0.1, 0.5, 0.9] {
            let one = exponential_from_uniform(1.0, u);
            assert!((exponential_from_uniform(2.0, u) - one / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_in_seed() {
        for d in [
            Dataset::Pareto { a: 1.0, b: 1.0 },
            Dataset::Exponential { lambda: 1.0 },
            Dataset::Lognormal {
                mu: 0.0,
                sigma: 1.0,
            },
            Dataset::GammaPowers {
                gamma: 1.02,
                lo: -50,
                hi: 50,
            },
        ] {
            let a = d.generate(200_000, 11).unwrap();
            let b = d.generate(200_000, 11).unwrap();
            let c = d.generate(200_000, 12).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
            assert_eq!(a.len(), 200_000);
            assert_eq!(d.generate(1000, 11).unwrap()[..], a[..1000]);
        }
    }

    #[test]
    fn exponential_rate_scales_samples() {
        let one = gen_exponential(1.0, 1000, 3).unwrap();
        let two = gen_exponential(2.0, 1000, 3).unwrap();
        for (x, y) in one.iter().zip(&two) {
            assert!((y - x / 2.0).abs() <= 1e-15 * x.max(1.0));
        }
    }

    #[test]
    fn lognormal_examples() {
        let flat = gen_lognormal(1.5, 0.0, 100, 1).unwrap();
        assert!(flat.iter().all(|&v| v == 1.5f64.exp()));
        let v = gen_lognormal(1.0, 0.8, 1_000_000, 5).unwrap();
        let median = super::super::oracle_quantile(&v, 0.5).unwrap();
        assert!((median / 1f64.exp() - 1.0).abs() < 0.01, "{median}");
    }

    #[test]
    fn pareto_passes_ks() {
        let v = gen_pareto(1.0, 1.0, 1_000_000, 42).unwrap();
        assert!(v.iter().all(|&x| x >= 1.0));
        let d = ks_distance(&v, |t| 1.0 - 1.0 / t);
        assert!(d <= 0.005, "{d}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gen_pareto(0.0, 1.0, 10, 0).is_err());
        assert!(gen_pareto(1.0, -1.0, 10, 0).is_err());
        assert!(gen_exponential(0.0, 10, 0).is_err());
        assert!(gen_lognormal(0.0, -1.0, 10, 0).is_err());
        assert!(gen_gamma_powers(1.0, 0, 1, 10, 0).is_err());
    }
}
