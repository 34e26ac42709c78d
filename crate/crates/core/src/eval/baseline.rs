use crate::error::{Error, Result};

/// Fixed-range histogram with equally wide bins, used as a contrast to the
/// sketch on heavy-tailed data.
#[derive(Debug, Clone)]
pub struct EquiWidthHistogram {
    lo: f64,
    hi: f64,
    bins: Vec<u64>,
    count: u64,
}

impl EquiWidthHistogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidParameter(format!(
                "histogram range [{lo}, {hi}] with {bins} bins"
            )));
        }
        Ok(EquiWidthHistogram {
            lo,
            hi,
            bins: vec![0; bins],
            count: 0,
        })
    }

    /// Histogram spanning the data's own range.
    pub fn from_data(data: &[f64], bins: usize) -> Result<Self> {
        let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        let mut h = Self::new(lo, hi, bins)?;
        for &v in data {
            h.insert(v);
        }
        Ok(h)
    }

    fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins.len() as f64
    }

    /// Values outside the range are clamped into the edge bins.
    pub fn insert(&mut self, x: f64) {
        let last = self.bins.len() - 1;
        let slot = if self.hi > self.lo {
            (((x - self.lo) / self.width()).floor().max(0.0) as usize).min(last)
        } else {
            0
        };
        self.bins[slot] += 1;
        self.count += 1;
    }

    /// Midpoint of the bin holding the lower `q`-quantile rank.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidQuantile(q));
        }
        if self.count == 0 {
            return Err(Error::EmptyData);
        }
        let rank = q * (self.count - 1) as f64;
        let mut seen = 0u64;
        for (k, &c) in self.bins.iter().enumerate() {
            seen += c;
            if seen as f64 > rank {
                return Ok(self.lo + (k as f64 + 0.5) * self.width());
            }
        }
        unreachable!("all values are binned")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_data() {
        let data: Vec<f64> = (0..=1000).map(f64::from).collect();
        let h = EquiWidthHistogram::from_data(&data, 10).unwrap();
        assert_eq!(h.quantile(0.5).unwrap(), 550.0);
        assert_eq!(h.quantile(0.0).unwrap(), 50.0);
        assert_eq!(h.quantile(1.0).unwrap(), 950.0);
    }

    #[test]
    fn constant_data() {
        let h = EquiWidthHistogram::from_data(&[3.0; 5], 4).unwrap();
        assert_eq!(h.quantile(0.5).unwrap(), 3.0);
    }
}
