//! Empirical distributions and Kolmogorov-Smirnov distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Contract(
                "empirical distribution needs at least one sample".into(),
            ));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::Contract("NaN sample".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalDistribution { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    /// Sample points without repetition, ascending.
    pub fn support(&self) -> Vec<f64> {
        let mut v = self.samples.clone();
        v.dedup();
        v
    }

    fn count_at_most(&self, s: f64) -> usize {
        self.samples.partition_point(|&x| x <= s)
    }

    fn count_below(&self, s: f64) -> usize {
        self.samples.partition_point(|&x| x < s)
    }
}

/// Fraction of samples `<= s`.
pub fn empirical_cdf(d: &EmpiricalDistribution, s: f64) -> f64 {
    d.count_at_most(s) as f64 / d.count() as f64
}

/// Fraction of samples `< s`.
pub fn empirical_cdf_left(d: &EmpiricalDistribution, s: f64) -> f64 {
    d.count_below(s) as f64 / d.count() as f64
}

/// `sup_s |F_n(s) - F(s)|` for a continuous `F`: at each sample point both
/// `F_n(x)` and `F_n(x-)` are compared with `F(x)`.
pub fn ks_distance(d: &EmpiricalDistribution, cdf: impl Fn(f64) -> f64) -> f64 {
    ks_distance_with_left_limits(d, &cdf, &cdf)
}

/// `sup_s |F_n(s) - F(s)|` for a right-continuous `F` with jumps, given its
/// left limits `F(x-)` separately. Exact when every jump of `F` is at a sample
/// point or `F` is flat between samples.
pub fn ks_distance_with_left_limits(
    d: &EmpiricalDistribution,
    cdf: impl Fn(f64) -> f64,
    cdf_left: impl Fn(f64) -> f64,
) -> f64 {
    let n = d.count() as f64;
    let mut sup = 0.0f64;
    for x in d.support() {
        let above = d.count_at_most(x) as f64 / n;
        let below = d.count_below(x) as f64 / n;
        sup = sup.max((above - cdf(x)).abs()).max((below - cdf_left(x)).abs());
    }
    sup.min(1.0)
}
