use std::f64::consts::{LN_2, PI};

use super::Kernel;
use crate::error::{Error, Result};
use crate::special::ln_factorial;

const MAX_LEVEL: u32 = 100;

/// Normalized Hermite functions without the Gaussian factor,
/// `h_k(s) = pi^{-1/4} (k!)^{-1/2} 2^{-k/2} H_k(s)`, for `k = 0..=kmax`.
fn hermite_normalized(kmax: u32, s: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(kmax as usize + 1);
    h.push(PI.powf(-0.25));
    if kmax >= 1 {
        h.push(2f64.sqrt() * s * h[0]);
    }
    for k in 1..kmax as usize {
        let kf = k as f64;
        let next = s * (2.0 / (kf + 1.0)).sqrt() * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// The GUE-minors kernel on levels `n1, n2` (cut above `s`).
pub fn gue_minors_kernel(n1: u32, s1: f64, n2: u32, s2: f64) -> Result<f64> {
    if n1 == 0 || n2 == 0 || n1 > MAX_LEVEL || n2 > MAX_LEVEL {
        return Err(Error::Contract(format!(
            "GUE-minors levels must lie in 1..={MAX_LEVEL}, got ({n1}, {n2})"
        )));
    }
    let h1 = hermite_normalized(n2, s1);
    let h2 = hermite_normalized(n1, s2);
    let mut sum = 0.0;
    for j in 1..=n1.min(n2) {
        let (a, b) = (n1 - j, n2 - j);
        let ratio = (0.5 * (ln_factorial(a as u64) - ln_factorial(b as u64))).exp();
        sum += ratio * h1[b as usize] * h2[a as usize];
    }
    let mut k = (-(s1 * s1 + s2 * s2) / 2.0).exp() * sum;
    if n2 > n1 && s2 > s1 {
        let m = (n2 - n1) as u64;
        let log =
            (s1 * s1 - s2 * s2) / 2.0 + 0.5 * m as f64 * LN_2 - ln_factorial(m - 1) + (m - 1) as f64 * (s2 - s1).ln();
        k -= log.exp();
    }
    Ok(k)
}

/// [`gue_minors_kernel`] as a [`Kernel`]; the time coordinate is the level.
#[derive(Debug, Clone, Copy, Default)]
pub struct GueMinorsKernel;

impl Kernel for GueMinorsKernel {
    fn eval(&self, t1: f64, x: f64, t2: f64, y: f64) -> Result<f64> {
        gue_minors_kernel(t1.round() as u32, x, t2.round() as u32, y)
    }
}
