//! Scalar special functions and quadrature primitives.

mod airy;
mod quadrature;

pub(crate) use airy::ai;
pub use airy::{airy_ai, airy_ai_prime, AI_0, AI_PRIME_0};
pub use quadrature::{composite_gauss_legendre, gauss_legendre, NodesWeights};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real number stored as sign and natural log of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLog {
    pub sign: i8,
    /// Meaningless when `sign == 0`.
    pub log_magnitude: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        log_magnitude: f64::NEG_INFINITY,
    };

    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        log_magnitude: 0.0,
    };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if x > 0.0 { 1 } else { -1 },
                log_magnitude: x.abs().ln(),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.log_magnitude.exp()
        }
    }

    /// Value times `exp(log_factor)`, combined before exponentiating.
    pub fn scaled_value(&self, log_factor: f64) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * (self.log_magnitude + log_factor).exp()
        }
    }
}

impl std::ops::Mul for SignedLog {
    type Output = SignedLog;

    fn mul(self, other: SignedLog) -> SignedLog {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        SignedLog {
            sign: self.sign * other.sign,
            log_magnitude: self.log_magnitude + other.log_magnitude,
        }
    }
}

/// ln(n!) by direct summation for small `n` and Stirling/Lanczos beyond.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 64 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

/// Generalized binomial coefficient `C(a, b) = a (a-1) ... (a-b+1) / b!`.
///
/// Zero for `b < 0`; negative `a` uses `C(a, b) = (-1)^b C(b - a - 1, b)`.
pub fn log_binomial(a: i64, b: i64) -> SignedLog {
    if b < 0 {
        return SignedLog::ZERO;
    }
    if b == 0 {
        return SignedLog::ONE;
    }
    let (top, sign) = if a < 0 {
        (b - a - 1, if b % 2 == 0 { 1 } else { -1 })
    } else {
        (a, 1)
    };
    if top < b {
        return SignedLog::ZERO;
    }
    let k = b.min(top - b);
    let log_magnitude = if k <= 256 {
        // ln prod_{i<k} (top - i) / (i + 1)
        (0..k).map(|i| ((top - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
    } else {
        ln_factorial(top as u64) - ln_factorial(b as u64) - ln_factorial((top - b) as u64)
    };
    SignedLog { sign, log_magnitude }
}

/// Physicists' Hermite polynomial `H_k(x)` by the three-term recurrence.
pub fn hermite_poly(k: u32, x: f64) -> Result<f64> {
    if k > 200 {
        return Err(Error::Domain(format!("Hermite degree {k} > 200")));
    }
    let mut h_prev = 1.0;
    if k == 0 {
        return Ok(1.0);
    }
    let mut h = 2.0 * x;
    for j in 1..k {
        let next = 2.0 * x * h - 2.0 * j as f64 * h_prev;
        h_prev = h;
        h = next;
    }
    if h.is_finite() {
        Ok(h)
    } else {
        Err(Error::Overflow(format!("H_{k}({x})")))
    }
}

/// Charlier polynomial `C_k(z; t)` normalized as `2F0(-k, -z; ; -1/t)`.
///
/// Recurrence `t C_{k+1} = (k + t - z) C_k - k C_{k-1}` with `C_0 = 1`,
/// `C_1 = 1 - z/t`. With this normalization
/// `(2t)^{k/2} C_k(t - sqrt(2t) s; t) -> H_k(s)` as `t -> infinity`.
pub fn charlier_poly(k: u32, z: f64, t: f64) -> Result<f64> {
    if k > 100 {
        return Err(Error::Domain(format!("Charlier degree {k} > 100")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("Charlier parameter t = {t}")));
    }
    let mut c_prev = 1.0;
    if k == 0 {
        return Ok(1.0);
    }
    let mut c = 1.0 - z / t;
    for j in 1..k {
        let jf = j as f64;
        let next = ((jf + t - z) * c - jf * c_prev) / t;
        c_prev = c;
        c = next;
    }
    if c.is_finite() {
        Ok(c)
    } else {
        Err(Error::Overflow(format!("C_{k}({z}; {t})")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_log_round_trip() {
        for &x in &[1e-300, -3.5, 7.25e12, -1e200, 1.0] {
            let s = SignedLog::from_f64(x);
            assert!((s.value() - x).abs() <= 1e-12 * x.abs());
        }
        assert!(SignedLog::from_f64(0.0).is_zero());
        assert_eq!(SignedLog::ZERO.value(), 0.0);
    }

    #[test]
    fn binomial_examples() {
        let c = log_binomial(5, 2);
        assert_eq!(c.sign, 1);
        assert!((c.log_magnitude - 10f64.ln()).abs() < 1e-14);
        let c = log_binomial(3, 0);
        assert_eq!(c.sign, 1);
        assert_eq!(c.log_magnitude, 0.0);
        // product-formula oracle: (-2)(-3)(-4)/3! = -4
        let c = log_binomial(-2, 3);
        assert_eq!(c.sign, -1);
        assert!((c.log_magnitude - 4f64.ln()).abs() < 1e-14);
        assert!(log_binomial(3, 5).is_zero());
        assert!(log_binomial(3, -1).is_zero());
        assert_eq!(log_binomial(-1, 7).value().round(), -1.0);
    }

    fn binomial_product_oracle(a: i64, b: i64) -> f64 {
        let mut v = 1.0;
        for i in 0..b {
            v *= (a - i) as f64 / (i + 1) as f64;
        }
        v
    }

    #[test]
    fn binomial_matches_product_formula_large() {
        for (a, b) in [(-40, 17), (300, 150), (1000, 600), (-500, 301), (60, 59)] {
            let exact = binomial_product_oracle(a, b);
            let got = log_binomial(a, b);
            assert_eq!(got.sign as f64, exact.signum());
            assert!((got.log_magnitude - exact.abs().ln()).abs() < 1e-10 * exact.abs().ln().abs().max(1.0));
        }
    }

    #[test]
    fn pascal_rule() {
        for a in -30i64..=30 {
            for b in 1i64..=30 {
                let lhs = log_binomial(a, b).value();
                let rhs = log_binomial(a - 1, b - 1).value() + log_binomial(a - 1, b).value();
                if lhs == 0.0 {
                    assert!(rhs.abs() < 1e-6, "a={a} b={b}");
                } else {
                    assert_eq!(lhs.signum(), rhs.signum(), "a={a} b={b}");
                    assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs(), "a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite_poly(0, 5.3).unwrap(), 1.0);
        assert_eq!(hermite_poly(2, 1.0).unwrap(), 2.0);
        // explicit coefficients: H_5 = 32x^5 - 160x^3 + 120x
        let x: f64 = 0.7;
        let expect = 32.0 * x.powi(5) - 160.0 * x.powi(3) + 120.0 * x;
        assert!((hermite_poly(5, x).unwrap() - expect).abs() < 1e-12);
        assert!(hermite_poly(200, 1e200).is_err());
    }

    #[test]
    fn hermite_derivative_relation() {
        let h = 1e-5;
        for k in 1..=10u32 {
            let mut x = -3.0;
            while x <= 3.0 {
                let d = (hermite_poly(k, x + h).unwrap() - hermite_poly(k, x - h).unwrap()) / (2.0 * h);
                let expect = 2.0 * k as f64 * hermite_poly(k - 1, x).unwrap();
                assert!((d - expect).abs() <= 1e-6 * expect.abs().max(1.0), "k={k} x={x}");
                x += 0.5;
            }
        }
    }

    fn charlier_limit_error(t: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for &s in &[-2.0, -1.0, 0.0, 1.0, 2.0] {
            for k in 0..=4u32 {
                let z = t - (2.0 * t).sqrt() * s;
                let v = (2.0 * t).powf(k as f64 / 2.0) * charlier_poly(k, z, t).unwrap();
                worst = worst.max((v - hermite_poly(k, s).unwrap()).abs());
            }
        }
        worst
    }

    #[test]
    fn charlier_examples() {
        assert_eq!(charlier_poly(0, 3.0, 2.0).unwrap(), 1.0);
        let t: f64 = 1e4;
        let v1 = (2.0 * t).sqrt() * charlier_poly(1, t - (2.0 * t).sqrt(), t).unwrap();
        assert!((v1 - 2.0).abs() < 0.05);
        let v2 = 2.0 * t * charlier_poly(2, t, t).unwrap();
        assert!((v2 + 2.0).abs() < 0.05);
    }

    #[test]
    fn charlier_converges_to_hermite() {
        let e = [1e3, 1e4, 1e5].map(charlier_limit_error);
        assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
    }
}
