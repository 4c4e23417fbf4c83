//! Airy function Ai and its derivative on the real line.
//!
//! Evaluation on `[-20, 8]` goes through a table of `(Ai, Ai')` pairs at
//! spacing 1/8 followed by a short Taylor expansion of the Airy equation
//! `y'' = x y` about the nearest node. Table nodes come from the Maclaurin
//! series on `[-3, 3]`, from Taylor continuation to the left of -3 (both
//! solutions oscillate there, so errors do not grow), and from the integral
//!
//! ```text
//! Ai(x) = exp(-zeta) / pi * int_0^inf exp(-sqrt(x) s^2) cos(s^3 / 3) ds,   x > 0
//! ```
//!
//! to the right of 3. Outside the table the classical asymptotic expansions
//! are used; at `|x| >= 8` (right) and `|x| >= 20` (left) they are accurate
//! well beyond double precision requirements.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use super::quadrature::gauss_legendre_unit;
use crate::error::{Error, Result};

/// Ai(0) = 3^(-2/3) / Gamma(2/3).
pub const AI_0: f64 = 0.355_028_053_887_817_2;
/// Ai'(0) = -3^(-1/3) / Gamma(1/3).
pub const AI_PRIME_0: f64 = -0.258_819_403_792_806_8;

const TABLE_LO: f64 = -20.0;
const TABLE_HI: f64 = 8.0;
const TABLE_STEPS_PER_UNIT: usize = 8;
const MACLAURIN_RADIUS: f64 = 3.0;

struct AiryTable {
    ai: Vec<f64>,
    ai_prime: Vec<f64>,
}

fn table() -> &'static AiryTable {
    static TABLE: OnceLock<AiryTable> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

fn node(i: usize) -> f64 {
    TABLE_LO + i as f64 / TABLE_STEPS_PER_UNIT as f64
}

fn build_table() -> AiryTable {
    let len = ((TABLE_HI - TABLE_LO) as usize) * TABLE_STEPS_PER_UNIT + 1;
    let mut ai = vec![0.0; len];
    let mut ai_prime = vec![0.0; len];
    let h = 1.0 / TABLE_STEPS_PER_UNIT as f64;
    let first_series = ((-MACLAURIN_RADIUS - TABLE_LO) as usize) * TABLE_STEPS_PER_UNIT;
    for i in first_series..len {
        let x = node(i);
        let (y, yp) = if x <= MACLAURIN_RADIUS {
            taylor(0.0, AI_0, AI_PRIME_0, x)
        } else {
            integral_representation(x)
        };
        ai[i] = y;
        ai_prime[i] = yp;
    }
    for i in (0..first_series).rev() {
        let (y, yp) = taylor(node(i + 1), ai[i + 1], ai_prime[i + 1], -h);
        ai[i] = y;
        ai_prime[i] = yp;
    }
    AiryTable { ai, ai_prime }
}

/// Solution of `y'' = x y` at `x0 + h` given `(y, y')` at `x0`.
///
/// Coefficients satisfy `(n+2)(n+1) c_{n+2} = x0 c_n + c_{n-1}`.
fn taylor(x0: f64, y0: f64, yp0: f64, h: f64) -> (f64, f64) {
    let mut c_prev2 = 0.0; // c_{n-1}
    let mut c_prev = y0; // c_n
    let mut c_cur = yp0; // c_{n+1}
    let mut y = y0 + yp0 * h;
    let mut yp = yp0;
    let mut hp = h; // h^{n+1}
    let scale = y0.abs().max(yp0.abs()).max(1e-300);
    let mut n = 0usize;
    let mut quiet = 0;
    loop {
        let c_next = (x0 * c_prev + c_prev2) / ((n + 2) as f64 * (n + 1) as f64);
        // c_next multiplies h^{n+2}
        let term_d = (n + 2) as f64 * c_next * hp;
        hp *= h;
        let term = c_next * hp;
        y += term;
        yp += term_d;
        if term.abs() < 1e-18 * scale && term_d.abs() < 1e-18 * scale {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        c_prev2 = c_prev;
        c_prev = c_cur;
        c_cur = c_next;
        n += 1;
        if n > 400 {
            break;
        }
    }
    (y, yp)
}

fn integral_representation(x: f64) -> (f64, f64) {
    let rule = gauss_legendre_unit(128);
    let (nodes, weights) = (&rule.0, &rule.1);
    let rx = x.sqrt();
    let zeta = 2.0 / 3.0 * x * rx;
    let upper = (40.0 / rx).sqrt();
    let half = 0.5 * upper;
    let mut i0 = 0.0;
    let mut i2 = 0.0;
    for (t, w) in nodes.iter().zip(weights.iter()) {
        let s = half * (t + 1.0);
        let g = (-rx * s * s).exp() * (s * s * s / 3.0).cos() * w * half;
        i0 += g;
        i2 += g * s * s;
    }
    let pref = (-zeta).exp() / PI;
    let ai = pref * i0;
    let ai_prime = pref * (-rx * i0 - i2 / (2.0 * rx));
    (ai, ai_prime)
}

/// Ratio `u_k / u_{k-1}` of the asymptotic-series coefficients.
fn u_ratio(k: usize) -> f64 {
    let k = k as f64;
    (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k)
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let mut u = 1.0;
    let mut sum_u = 1.0;
    let mut sum_v = 1.0;
    let mut zp = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        u *= u_ratio(k);
        zp /= -zeta;
        let kf = k as f64;
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let tu = u * zp;
        if tu.abs() > last {
            break;
        }
        last = tu.abs();
        sum_u += tu;
        sum_v += v * zp;
        if tu.abs() < 1e-17 {
            break;
        }
    }
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.powf(0.25);
    (e / q * sum_u, -e * q * sum_v)
}

fn asymptotic_negative(x: f64) -> (f64, f64) {
    let z = -x;
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let (mut pu, mut qu, mut pv, mut qv) = (1.0, 0.0, 1.0, 0.0);
    let mut u = 1.0;
    let mut zp = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..80 {
        u *= u_ratio(k);
        zp /= zeta;
        let kf = k as f64;
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let tu = u * zp;
        if tu.abs() > last {
            break;
        }
        last = tu.abs();
        // (-1)^{floor(k/2)} alternation of the even/odd sub-series
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            pu += sign * tu;
            pv += sign * v * zp;
        } else {
            qu += sign * tu;
            qv += sign * v * zp;
        }
        if tu < 1e-17 {
            break;
        }
    }
    let phase = zeta - FRAC_PI_4;
    let (s, c) = phase.sin_cos();
    let q = z.powf(0.25);
    let rpi = PI.sqrt();
    let ai = (c * pu + s * qu) / (rpi * q);
    let ai_prime = q / rpi * (s * pv - c * qv);
    (ai, ai_prime)
}

fn from_table(x: f64) -> (f64, f64) {
    let t = table();
    let pos = (x - TABLE_LO) * TABLE_STEPS_PER_UNIT as f64;
    let i = (pos.round() as usize).min(t.ai.len() - 1);
    let x0 = node(i);
    taylor(x0, t.ai[i], t.ai_prime[i], x - x0)
}

/// `(Ai(x), Ai'(x))` without input validation; NaN propagates.
pub(crate) fn airy_pair(x: f64) -> (f64, f64) {
    let pair = if x.is_nan() {
        (f64::NAN, f64::NAN)
    } else if x > TABLE_HI {
        asymptotic_positive(x)
    } else if x >= TABLE_LO {
        from_table(x)
    } else {
        asymptotic_negative(x)
    };
    #[cfg(feature = "fault-airy-sign")]
    {
        if x < 0.0 {
            return (-pair.0, -pair.1);
        }
    }
    pair
}

#[inline]
pub(crate) fn ai(x: f64) -> f64 {
    airy_pair(x).0
}

/// Airy function `Ai(x)` for finite real `x`.
pub fn airy_ai(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("Ai({x})")));
    }
    Ok(ai(x))
}

/// Derivative `Ai'(x)` for finite real `x`.
pub fn airy_ai_prime(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("Ai'({x})")));
    }
    Ok(airy_pair(x).1)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // Independent oracle: plain Maclaurin series with the textbook f/g split.
    fn maclaurin_oracle(x: f64) -> f64 {
        let x3 = x * x * x;
        let (mut f, mut g) = (1.0, x);
        let (mut tf, mut tg) = (1.0, x);
        for k in 1..200 {
            let k = k as f64;
            tf *= x3 / ((3.0 * k - 1.0) * (3.0 * k));
            tg *= x3 / ((3.0 * k) * (3.0 * k + 1.0));
            f += tf;
            g += tg;
            if tf.abs() + tg.abs() < 1e-30 {
                break;
            }
        }
        AI_0 * f + AI_PRIME_0 * g
    }

    #[test]
    fn known_values() {
        assert!((airy_ai(0.0).unwrap() - 0.355_028_053_9).abs() < 1e-10);
        assert!((airy_ai(0.0).unwrap() - maclaurin_oracle(0.0)).abs() < 1e-15);
        assert!((airy_ai(1.0).unwrap() - 0.135_292_416_3).abs() < 1e-10);
        assert!((airy_ai(1.0).unwrap() - maclaurin_oracle(1.0)).abs() < 1e-13);
        let far = airy_ai(30.0).unwrap();
        assert!(far.abs() < 1e-40 && far >= 0.0);
    }

    #[test]
    fn matches_series_oracle_where_it_is_reliable() {
        let mut x = -4.0;
        while x <= 4.0 {
            let d = (airy_ai(x).unwrap() - maclaurin_oracle(x)).abs();
            assert!(d < 1e-12, "x={x} diff={d:e}");
            x += 0.0371;
        }
    }

    #[test]
    fn branches_join_continuously() {
        for &x in &[TABLE_HI, TABLE_LO, MACLAURIN_RADIUS] {
            let (a, ap) = from_table(x);
            let (b, bp) = if x > 0.0 && x != MACLAURIN_RADIUS {
                asymptotic_positive(x)
            } else if x < 0.0 {
                asymptotic_negative(x)
            } else {
                integral_representation(x)
            };
            assert!((a - b).abs() < 1e-13 * (1.0 + a.abs()), "x={x}: {a} vs {b}");
            assert!((ap - bp).abs() < 1e-12 * (1.0 + ap.abs()), "x={x}: {ap} vs {bp}");
        }
    }

    #[test]
    fn ode_residual_small() {
        let h = 1e-3;
        let mut x = -5.0;
        while x <= 5.0 {
            let f = |y: f64| airy_ai(y).unwrap();
            let d2 =
                (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h);
            assert!((d2 - x * f(x)).abs() < 1e-6, "x={x}");
            x += 0.25;
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let h = 1e-4;
        for &x in &[-25.0, -12.3, -3.1, 0.4, 2.9, 3.3, 7.7, 9.0] {
            let fd = (ai(x + h) - ai(x - h)) / (2.0 * h);
            let d = airy_ai_prime(x).unwrap();
            assert!((fd - d).abs() < 1e-7 * (1.0 + d.abs()), "x={x}: {fd} vs {d}");
        }
    }

    #[test]
    fn high_precision_reference_values() {
        // (x, Ai, Ai') from a 30-digit evaluation
        let table: [(f64, f64, f64); 7] = [
            (-100.0, 0.176_753_393_239_552_88, -0.242_297_031_660_583_8),
            (-40.0, -0.045_933_923_437_957_25, -1.389_090_875_260_718_4),
            (-21.0, 0.226_358_493_678_988_97, 0.621_294_449_908_927_1),
            (-7.3, 0.335_770_370_515_147_3, -0.180_095_804_483_293_66),
            (5.5, 3.368_531_190_859_981_4e-5, -8.046_339_130_556_514e-5),
            (12.0, 1.393_184_688_875_360_8e-13, -4.854_736_554_985_308e-13),
            (25.0, 8.116_026_824_691_387e-38, -4.066_089_337_243_281e-37),
        ];
        for (x, a, ap) in table {
            let (ga, gap) = airy_pair(x);
            let scale = if x < 0.0 { 1.0 } else { a.abs() };
            assert!((ga - a).abs() < 1e-12 * scale, "Ai({x}) = {ga}, want {a}");
            let scale = if x < 0.0 { 1.0 } else { ap.abs() };
            assert!((gap - ap).abs() < 1e-11 * scale, "Ai'({x}) = {gap}, want {ap}");
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(airy_ai(f64::NAN).is_err());
        assert!(airy_ai(f64::INFINITY).is_err());
    }
}
