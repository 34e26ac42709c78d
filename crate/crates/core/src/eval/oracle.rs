use crate::error::{Error, Result};

/// Zero-based position of the lower `q`-quantile, `floor(1 + q (n - 1)) - 1`.
fn position(n: usize, q: f64) -> usize {
    (q * (n - 1) as f64).floor() as usize
}

fn check_q(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidQuantile(q))
    }
}

/// Exact lower `q`-quantile by selection, without a full sort.
pub fn oracle_quantile(data: &[f64], q: f64) -> Result<f64> {
    check_q(q)?;
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut scratch = data.to_vec();
    let k = position(scratch.len(), q);
    let (_, v, _) = scratch.select_nth_unstable_by(k, f64::total_cmp);
    Ok(*v)
}

/// `|estimate - exact| / |exact|`; undefined for an exact value of zero.
pub fn relative_error(estimate: f64, exact: f64) -> Result<f64> {
    if exact == 0.0 {
        return Err(Error::ExactZero);
    }
    Ok((estimate - exact).abs() / exact.abs())
}

/// `|R(estimate) - floor(1 + q (n - 1))| / n` where `R` counts elements
/// less than or equal to the estimate.
pub fn rank_error(data: &[f64], estimate: f64, q: f64) -> Result<f64> {
    ExactQuantiles::new(data.to_vec())?.rank_error(estimate, q)
}

/// Sorted copy of a data set for repeated exact queries.
#[derive(Debug, Clone)]
pub struct ExactQuantiles {
    sorted: Vec<f64>,
}

impl ExactQuantiles {
    pub fn new(mut data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        if data.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFiniteValue(f64::NAN));
        }
        crate::parallel::sort_floats(&mut data);
        Ok(ExactQuantiles { sorted: data })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        check_q(q)?;
        Ok(self.sorted[position(self.sorted.len(), q)])
    }

    /// Number of elements `<= x`.
    pub fn rank(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    pub fn rank_error(&self, estimate: f64, q: f64) -> Result<f64> {
        check_q(q)?;
        let n = self.sorted.len();
        let target = position(n, q) + 1;
        Ok(self.rank(estimate).abs_diff(target) as f64 / n as f64)
    }
}
