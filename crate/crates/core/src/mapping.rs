//! Mapping between positive values and integer bucket indices.
//!
//! Bucket `i` covers the half-open range `(lower_bound(i), lower_bound(i + 1)]`.
//! For the logarithmic mapping that is `(γ^(i-1), γ^i]` with
//! `γ = (1 + α) / (1 - α)`. The interpolated mappings replace the logarithm by
//! a cheap approximation of `log2` built from the binary exponent and the
//! mantissa of the input, and shrink their buckets so that no bucket spans a
//! ratio wider than `γ`.

use crate::error::{Error, Result};

/// Relative narrowing applied to every bucket.
///
/// Keeps a value that floating-point rounding pushes across a bucket edge
/// strictly within `alpha` of its neighbour's representative.
const BOUNDARY_MARGIN: f64 = 1e-9;

const MANTISSA_MASK: u64 = (1 << 52) - 1;
const EXPONENT_ONE: u64 = 0x3ff << 52;

/// Which index function a mapping uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MappingKind {
    /// `ceil(ln(x) / ln(γ))`, the memory-optimal mapping.
    Logarithmic = 0,
    /// Binary exponent plus the mantissa interpolated linearly.
    LinearInterpolated = 1,
    /// Binary exponent plus the mantissa interpolated by a quadratic.
    QuadraticInterpolated = 2,
}

impl MappingKind {
    pub const ALL: [MappingKind; 3] = [
        MappingKind::Logarithmic,
        MappingKind::LinearInterpolated,
        MappingKind::QuadraticInterpolated,
    ];

    pub fn from_u8(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(MappingKind::Logarithmic),
            1 => Ok(MappingKind::LinearInterpolated),
            2 => Ok(MappingKind::QuadraticInterpolated),
            other => Err(Error::UnknownMappingKind(other)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MappingKind::Logarithmic => "logarithmic",
            MappingKind::LinearInterpolated => "linear",
            MappingKind::QuadraticInterpolated => "quadratic",
        }
    }

    /// Upper bound on `|approx_log2(x) - log2(x)|` for this kind.
    pub fn interpolation_error_log2(self) -> f64 {
        match self {
            MappingKind::Logarithmic => 0.0,
            // max over f in [0, 1) of log2(1 + f) - f
            MappingKind::LinearInterpolated => 0.0861,
            // max over f in [0, 1) of |log2(1 + f) - (4f - f^2) / 3|
            MappingKind::QuadraticInterpolated => 0.0098,
        }
    }

    /// Smallest value of `d approx_log / d ln(x)` in the kind's own log units.
    fn min_slope(self) -> f64 {
        match self {
            MappingKind::Logarithmic => 1.0,
            MappingKind::LinearInterpolated => 1.0,
            MappingKind::QuadraticInterpolated => 4.0 / 3.0,
        }
    }

    /// Approximate logarithm; natural log for `Logarithmic`, log2 otherwise.
    #[inline]
    fn approx_log(self, x: f64) -> f64 {
        match self {
            MappingKind::Logarithmic => x.ln(),
            MappingKind::LinearInterpolated => {
                let (exponent, frac) = split(x);
                exponent + frac
            }
            MappingKind::QuadraticInterpolated => {
                let (exponent, frac) = split(x);
                exponent + frac * (4.0 - frac) / 3.0
            }
        }
    }

    /// Inverse of [`approx_log`](Self::approx_log).
    #[inline]
    fn approx_exp(self, y: f64) -> f64 {
        match self {
            MappingKind::Logarithmic => y.exp(),
            MappingKind::LinearInterpolated => {
                let exponent = y.floor();
                (1.0 + (y - exponent)) * exponent.exp2()
            }
            MappingKind::QuadraticInterpolated => {
                let exponent = y.floor();
                let s = y - exponent;
                let frac = 2.0 - (4.0 - 3.0 * s).sqrt();
                (1.0 + frac) * exponent.exp2()
            }
        }
    }
}

/// Splits a positive normal float into its unbiased binary exponent and the
/// fractional part of its significand, `x = 2^e * (1 + f)`.
#[inline]
fn split(x: f64) -> (f64, f64) {
    let bits = x.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64 - 1023;
    let frac = f64::from_bits((bits & MANTISSA_MASK) | EXPONENT_ONE) - 1.0;
    (exponent as f64, frac)
}

/// Maps positive values to bucket indices and back.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMapping {
    alpha: f64,
    gamma: f64,
    kind: MappingKind,
    multiplier: f64,
    min_indexable: f64,
    max_indexable: f64,
}

impl IndexMapping {
    pub fn new(alpha: f64, kind: MappingKind) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        let gamma = (1.0 + alpha) / (1.0 - alpha);
        let multiplier = (1.0 + BOUNDARY_MARGIN) / (gamma.ln() * kind.min_slope());

        let lowest = kind.approx_exp((i32::MIN as f64 + 2.0) / multiplier) * gamma;
        let highest = kind.approx_exp((i32::MAX as f64 - 2.0) / multiplier) / gamma;
        let min_indexable = (f64::MIN_POSITIVE * gamma * gamma).max(lowest);
        let max_indexable = (f64::MAX / (gamma * gamma)).min(highest);

        Ok(IndexMapping {
            alpha,
            gamma,
            kind,
            multiplier,
            min_indexable,
            max_indexable,
        })
    }

    pub fn logarithmic(alpha: f64) -> Result<Self> {
        Self::new(alpha, MappingKind::Logarithmic)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kind(&self) -> MappingKind {
        self.kind
    }

    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    pub fn min_indexable(&self) -> f64 {
        self.min_indexable
    }

    pub fn max_indexable(&self) -> f64 {
        self.max_indexable
    }

    /// Two mappings produce identical buckets iff their `gamma` and kind match.
    pub fn is_compatible(&self, other: &IndexMapping) -> bool {
        self.gamma.to_bits() == other.gamma.to_bits() && self.kind == other.kind
    }

    /// Bucket index of `x`. Assumes `min_indexable <= x <= max_indexable`.
    #[inline]
    pub fn index(&self, x: f64) -> i32 {
        (self.kind.approx_log(x) * self.multiplier).ceil() as i32
    }

    /// Exclusive lower edge of bucket `i`.
    #[inline]
    pub fn lower_bound(&self, i: i32) -> f64 {
        self.kind.approx_exp((i as f64 - 1.0) / self.multiplier)
    }

    /// Representative of bucket `i`: the harmonic mean of its edges, which
    /// for the logarithmic mapping is `2γ^i / (γ + 1)`.
    #[inline]
    pub fn value(&self, i: i32) -> f64 {
        let lo = self.lower_bound(i);
        let hi = self.lower_bound(i + 1);
        lo * (2.0 / (1.0 + lo / hi))
    }

    /// Number of indices per doubling of the value, asymptotically.
    pub fn indices_per_octave(&self) -> f64 {
        match self.kind {
            MappingKind::Logarithmic => self.multiplier * std::f64::consts::LN_2,
            _ => self.multiplier,
        }
    }

    /// Bound, in octaves, on `|index(x) / indices_per_octave() - log2(x)|`.
    pub fn interpolation_slack(&self) -> f64 {
        self.kind.interpolation_error_log2() + 1.0 / self.indices_per_octave()
    }
}
