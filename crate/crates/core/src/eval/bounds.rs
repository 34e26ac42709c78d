//! Upper bounds on the number of buckets needed to keep the upper order
//! statistics of an i.i.d. stream accurate, holding with probability at
//! least `1 - delta1 - delta2`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sketch::{DDSketch, QuantileBucket};

pub type InverseCdf = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Distribution {
    /// CDF `1 - exp(-lambda t)`. Subexponential with parameters `(2/lambda, 2/lambda)`.
    Exponential { lambda: f64 },
    /// CDF `1 - (b/t)^a`.
    Pareto { a: f64, b: f64 },
    /// A subexponential distribution with parameters `(sigma, b)`, its mean and
    /// its inverse CDF.
    Subexponential {
        sigma: f64,
        b: f64,
        mean: f64,
        inverse_cdf: InverseCdf,
    },
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Exponential { lambda } => write!(f, "Exponential({lambda})"),
            Distribution::Pareto { a, b } => write!(f, "Pareto({a}, {b})"),
            Distribution::Subexponential { sigma, b, mean, .. } => {
                write!(f, "Subexponential(sigma={sigma}, b={b}, mean={mean})")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundParams {
    pub n: u64,
    pub delta1: f64,
    pub delta2: f64,
    pub alpha: f64,
    pub dist: Distribution,
    /// Lowest quantile that must stay accurate.
    pub q: f64,
}

impl BoundParams {
    /// `delta1 = delta2 = e^-10`, `alpha = 0.01`, `q = 1/2`.
    pub fn with_defaults(n: u64, dist: Distribution) -> Self {
        BoundParams {
            n,
            delta1: (-10.0f64).exp(),
            delta2: (-10.0f64).exp(),
            alpha: 0.01,
            dist,
            q: 0.5,
        }
    }

    /// `sqrt(ln(1/delta1) / 2n)`.
    pub fn t(&self) -> f64 {
        ((1.0 / self.delta1).ln() / (2.0 * self.n as f64)).sqrt()
    }

    pub fn gamma(&self) -> f64 {
        (1.0 + self.alpha) / (1.0 - self.alpha)
    }

    fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if !unit(self.delta1) || !unit(self.delta2) {
            return Err(Error::InvalidParameter("deltas must lie in (0, 1)".into()));
        }
        if !unit(self.alpha) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if !(self.q > 0.0 && self.q <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "q = {} outside (0, 1/2]",
                self.q
            )));
        }
        if self.t() >= self.q {
            return Err(Error::InvalidParameter(format!(
                "t = {} must be below q = {}; n is too small",
                self.t(),
                self.q
            )));
        }
        Ok(())
    }
}

/// Integer upper bound on `1 / ln(gamma)` used by the closed-form bounds;
/// 51 for `alpha = 0.01`.
pub fn inverse_log_gamma_bound(alpha: f64) -> f64 {
    let gamma = (1.0 + alpha) / (1.0 - alpha);
    (1.0 / gamma.ln()).ceil() + 1.0
}

/// `(ln(2b ln(n/delta2) + E[X]) - ln(F^-1(q - t))) / ln(gamma) + 1` for a
/// subexponential distribution with parameters `(sigma, b)`.
pub fn bound_subexponential(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let (b, mean, quantile): (f64, f64, InverseCdf) = match &p.dist {
        Distribution::Exponential { lambda } => {
            let lambda = *lambda;
            (
                2.0 / lambda,
                1.0 / lambda,
                Arc::new(move |u: f64| -(1.0 - u).ln() / lambda),
            )
        }
        Distribution::Subexponential {
            b,
            mean,
            inverse_cdf,
            ..
        } => (*b, *mean, inverse_cdf.clone()),
        Distribution::Pareto { .. } => {
            return Err(Error::InvalidParameter(
                "Pareto is not subexponential; use bound_pareto".into(),
            ))
        }
    };
    let n = p.n as f64;
    let max_term = (2.0 * b * (n / p.delta2).ln() + mean).ln();
    let low = quantile(p.q - p.t());
    if low.is_nan() || low <= 0.0 {
        return Err(Error::InvalidParameter(
            "F^-1(q - t) must be positive".into(),
        ));
    }
    Ok((max_term - low.ln()) / p.gamma().ln() + 1.0)
}

/// Closed-form exponential bound
/// `C (ln(4 (ln n + ln(1/delta2) + 1/4)) - ln(-ln(1 - p))) + 1`
/// with `C` from [`inverse_log_gamma_bound`] and `p = q - max(t, 1/8)`.
/// Independent of `lambda`. About 273 for `n = 10^6` under the defaults.
pub fn bound_exponential(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    if !matches!(p.dist, Distribution::Exponential { .. }) {
        return Err(Error::InvalidParameter(
            "expected an exponential distribution".into(),
        ));
    }
    let low = exponential_median_floor(p)?;
    let c = inverse_log_gamma_bound(p.alpha);
    let n = p.n as f64;
    Ok(c * ((4.0 * (n.ln() + (1.0 / p.delta2).ln() + 0.25)).ln() - low.ln()) + 1.0)
}

/// `-ln(1 - p)` for the loosened quantile `p = q - max(t, 1/8)`; 0.47 at `q = 1/2`.
fn exponential_median_floor(p: &BoundParams) -> Result<f64> {
    let level = p.q - p.t().max(0.125);
    if level <= 0.0 {
        return Err(Error::InvalidParameter(format!("q = {} too small", p.q)));
    }
    Ok(-(1.0 - level).ln())
}

/// Closed-form Pareto bound `C a^-1 (4 ln n + ln(1/delta2) + 1) + 1`.
/// About 3380 for `a = 1`, `n = 10^6` under the defaults.
pub fn bound_pareto(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let Distribution::Pareto { a, .. } = p.dist else {
        return Err(Error::InvalidParameter(
            "expected a Pareto distribution".into(),
        ));
    };
    if a.is_nan() || a <= 0.0 {
        return Err(Error::InvalidParameter(
            "Pareto shape must be positive".into(),
        ));
    }
    let c = inverse_log_gamma_bound(p.alpha);
    let n = p.n as f64;
    Ok(c / a * (4.0 * n.ln() + (1.0 / p.delta2).ln() + 1.0) + 1.0)
}

/// Largest `ln(n)` for which [`bound_exponential`] stays within `size`.
/// `p.n` is ignored except that `t` is taken at its `n -> infinity` limit.
pub fn max_log_n_exponential(size: f64, p: &BoundParams) -> Result<f64> {
    let mut limit = p.clone();
    limit.n = u64::MAX;
    let low = exponential_median_floor(&limit)?;
    let c = inverse_log_gamma_bound(p.alpha);
    Ok(low * ((size - 1.0) / c).exp() / 4.0 - (1.0 / p.delta2).ln() - 0.25)
}

/// Largest `ln(n)` for which [`bound_pareto`] stays within `size`.
pub fn max_log_n_pareto(size: f64, p: &BoundParams) -> Result<f64> {
    let Distribution::Pareto { a, .. } = p.dist else {
        return Err(Error::InvalidParameter(
            "expected a Pareto distribution".into(),
        ));
    };
    let c = inverse_log_gamma_bound(p.alpha);
    Ok(((size - 1.0) * a / c - (1.0 / p.delta2).ln() - 1.0) / 4.0)
}

/// Index span `max index - index(q) + 1` of the positive buckets from the
/// one answering `q` to the highest: the quantity the bounds above control.
pub fn empirical_upper_size(sketch: &DDSketch, q: f64) -> Result<usize> {
    let top = match sketch.positive().highest_index() {
        Some(i) => i as i64,
        None => return Ok(0),
    };
    let from = match sketch.quantile_bucket(q)? {
        QuantileBucket::Positive(i) => i as i64,
        _ => sketch.positive().lowest_index().expect("non-empty") as i64,
    };
    Ok((top - from + 1) as usize)
}
