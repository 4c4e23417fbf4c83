use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A quadrature rule on a finite interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodesWeights {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl NodesWeights {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`, cached per order.
pub(crate) fn gauss_legendre_unit(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(legendre_rule(n));
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// `n`-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<NodesWeights> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInterval { a, b });
    }
    if n == 0 {
        return Err(Error::Domain("Gauss-Legendre rule needs n >= 1".into()));
    }
    let rule = gauss_legendre_unit(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(NodesWeights {
        nodes: rule.0.iter().map(|t| mid + half * t).collect(),
        weights: rule.1.iter().map(|w| half * w).collect(),
        interval: (a, b),
    })
}

/// Composite rule: `panels` equal panels of `per_panel` Gauss points each.
pub fn composite_gauss_legendre(panels: usize, per_panel: usize, a: f64, b: f64) -> Result<NodesWeights> {
    if !(a < b) {
        return Err(Error::InvalidInterval { a, b });
    }
    let rule = gauss_legendre_unit(per_panel);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * per_panel);
    let mut weights = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (t, w) in rule.0.iter().zip(rule.1.iter()) {
            nodes.push(lo + 0.5 * h * (t + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    Ok(NodesWeights {
        nodes,
        weights,
        interval: (a, b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_rules() {
        let r = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);

        let r = gauss_legendre(2, -1.0, 1.0).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-15 && (r.nodes[1] - x).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        let r = gauss_legendre(20, 0.0, 1.0).unwrap();
        assert!((r.integrate(|x| x.powi(5)) - 1.0 / 6.0).abs() < 1e-14);
        for n in [3usize, 7, 16, 33, 64] {
            let r = gauss_legendre(n, -2.0, 3.0).unwrap();
            let deg = 2 * n - 1;
            let exact = (3f64.powi(deg as i32 + 1) - (-2f64).powi(deg as i32 + 1)) / (deg + 1) as f64;
            let got = r.integrate(|x| x.powi(deg as i32));
            assert!((got - exact).abs() < 1e-12 * exact.abs(), "n={n}");
        }
    }

    #[test]
    fn weights_and_ordering() {
        for n in [1usize, 5, 40, 257] {
            let r = gauss_legendre(n, 1.5, 4.0).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.5).abs() < 1e-12 * 2.5);
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.nodes.iter().all(|&x| (1.5..=4.0).contains(&x)));
            assert!(r.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn invalid_interval() {
        assert!(matches!(
            gauss_legendre(4, 1.0, 1.0),
            Err(Error::InvalidInterval { .. })
        ));
    }
}
