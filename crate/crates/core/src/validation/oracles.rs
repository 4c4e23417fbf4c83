//! Reference values computed along paths independent of the kernels.

use std::collections::HashMap;

use statrs::distribution::{ContinuousCDF, DiscreteCDF, Normal, Poisson};

use crate::error::{Error, Result};

/// `P(Poisson(t) >= k)`.
pub fn poisson_tail(t: f64, k: i64) -> f64 {
    if k <= 0 {
        return 1.0;
    }
    Poisson::new(t).map(|p| p.sf((k - 1) as u64)).unwrap_or(f64::NAN)
}

/// Standard normal CDF.
pub fn gaussian_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).map(|n| n.cdf(x)).unwrap_or(f64::NAN)
}

/// Law of the first `n` particles from `x_k(0) = -2k`, obtained by integrating
/// the forward master equation with RK4. Particle 1 is confined to
/// `x_1 <= -2 + reach`; mass pushed past it is tracked in `leaked`.
#[derive(Debug, Clone)]
pub struct MasterLaw {
    pub states: Vec<Vec<i64>>,
    pub prob: Vec<f64>,
    pub leaked: f64,
}

impl MasterLaw {
    pub fn two_periodic(n: usize, t: f64, step: f64) -> Result<Self> {
        if n == 0 || !(t >= 0.0) || !(step > 0.0) {
            return Err(Error::Contract("master equation needs n >= 1, t >= 0, step > 0".into()));
        }
        // P(Poisson(t) > reach) < 1e-15 bounds the leak.
        let mut reach = 1i64;
        while poisson_tail(t, reach + 1) > 1e-15 {
            reach += 1;
        }
        let start: Vec<i64> = (1..=n as i64).map(|k| -2 * k).collect();
        let cap = -2 + reach;

        let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut states = vec![start.clone()];
        index.insert(start, 0);
        // (from, to or None for the leak)
        let mut moves: Vec<(usize, Option<usize>)> = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let s = states[i].clone();
            for k in 0..n {
                if k > 0 && s[k] + 1 >= s[k - 1] {
                    continue;
                }
                let mut next = s.clone();
                next[k] += 1;
                if next[0] > cap {
                    moves.push((i, None));
                    continue;
                }
                let j = *index.entry(next.clone()).or_insert_with(|| {
                    states.push(next);
                    states.len() - 1
                });
                moves.push((i, Some(j)));
            }
            i += 1;
        }

        let mut out_rate = vec![0.0; states.len()];
        for &(from, _) in &moves {
            out_rate[from] += 1.0;
        }
        let deriv = |p: &[f64]| {
            let mut d: Vec<f64> = p.iter().zip(&out_rate).map(|(x, r)| -x * r).collect();
            let mut leak = 0.0;
            for &(from, to) in &moves {
                match to {
                    Some(j) => d[j] += p[from],
                    None => leak += p[from],
                }
            }
            (d, leak)
        };

        let mut p = vec![0.0; states.len()];
        p[0] = 1.0;
        let mut leaked = 0.0;
        let steps = (t / step).ceil() as usize;
        let h = if steps == 0 { 0.0 } else { t / steps as f64 };
        let axpy = |p: &[f64], k: &[f64], c: f64| -> Vec<f64> { p.iter().zip(k).map(|(a, b)| a + c * b).collect() };
        for _ in 0..steps {
            let (k1, l1) = deriv(&p);
            let (k2, l2) = deriv(&axpy(&p, &k1, h / 2.0));
            let (k3, l3) = deriv(&axpy(&p, &k2, h / 2.0));
            let (k4, l4) = deriv(&axpy(&p, &k3, h));
            for j in 0..p.len() {
                p[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            leaked += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        }
        Ok(MasterLaw {
            states,
            prob: p,
            leaked,
        })
    }

    /// Probability of the configurations satisfying `event`.
    pub fn probability(&self, event: impl Fn(&[i64]) -> bool) -> f64 {
        self.states
            .iter()
            .zip(&self.prob)
            .filter(|(s, _)| event(s))
            .map(|(_, p)| p)
            .sum()
    }
}
