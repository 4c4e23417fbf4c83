use proptest::prelude::*;
use tasep_core::special::{airy_ai, airy_ai_prime, charlier_poly, gauss_legendre, hermite_poly, log_binomial};

fn ai(x: f64) -> f64 {
    airy_ai(x).unwrap()
}

proptest! {
    #[test]
    fn airy_solves_its_ode(x in -5.0f64..5.0) {
        let h = 1e-3;
        let d2 = (-ai(x + 2.0 * h) + 16.0 * ai(x + h) - 30.0 * ai(x) + 16.0 * ai(x - h) - ai(x - 2.0 * h)) / (12.0 * h * h);
        prop_assert!((d2 - x * ai(x)).abs() <= 1e-6);
    }

    #[test]
    fn airy_derivative_is_consistent(x in -8.0f64..8.0) {
        let h = 1e-4;
        let fd = (ai(x + h) - ai(x - h)) / (2.0 * h);
        prop_assert!((fd - airy_ai_prime(x).unwrap()).abs() <= 1e-7);
    }

    #[test]
    fn pascal_rule(a in -30i64..=30, b in 0i64..=30) {
        let lhs = log_binomial(a, b);
        let r1 = log_binomial(a - 1, b - 1).value();
        let r2 = log_binomial(a - 1, b).value();
        let rhs = r1 + r2;
        let v = lhs.value();
        if rhs == 0.0 {
            prop_assert!(lhs.is_zero());
        } else {
            prop_assert_eq!(v.signum(), rhs.signum());
            prop_assert!(((v - rhs) / rhs).abs() <= 1e-10, "C({a},{b}) = {v} vs {rhs}");
        }
    }

    #[test]
    fn hermite_derivative_relation(k in 1u32..=10, x in -3.0f64..3.0) {
        let h = 1e-5;
        let fd = (hermite_poly(k, x + h).unwrap() - hermite_poly(k, x - h).unwrap()) / (2.0 * h);
        let exact = 2.0 * k as f64 * hermite_poly(k - 1, x).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials(n in 1usize..40, a in -3.0f64..0.0, w in 0.1f64..5.0) {
        let b = a + w;
        let rule = gauss_legendre(n, a, b).unwrap();
        let deg = (2 * n - 1).min(12) as i32;
        let exact = (b.powi(deg + 1) - a.powi(deg + 1)) / (deg + 1) as f64;
        let got = rule.integrate(|x| x.powi(deg));
        prop_assert!((got - exact).abs() <= 1e-11 * exact.abs().max(1.0));
    }
}

#[test]
fn charlier_approaches_hermite() {
    let gap = |t: f64| {
        let mut worst = 0.0f64;
        for sigma in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            for k in 0..=4u32 {
                let c = charlier_poly(k, t - (2.0 * t).sqrt() * sigma, t).unwrap();
                let scaled = (2.0 * t).powf(k as f64 / 2.0) * c;
                worst = worst.max((scaled - hermite_poly(k, sigma).unwrap()).abs());
            }
        }
        worst
    };
    let (a, b, c) = (gap(1e3), gap(1e4), gap(1e5));
    assert!(a > b && b > c, "{a} {b} {c}");
}

#[test]
fn airy_matches_large_argument_asymptotics() {
    // Ai decays like exp(-2/3 x^{3/2}) / (2 sqrt(pi) x^{1/4}).
    for x in [6.0f64, 9.0, 14.0] {
        let lead = (-2.0 / 3.0 * x.powf(1.5)).exp() / (2.0 * std::f64::consts::PI.sqrt() * x.powf(0.25));
        let zeta = 2.0 / 3.0 * x.powf(1.5);
        let approx = lead * (1.0 - 5.0 / (72.0 * zeta));
        assert!(((ai(x) - approx) / ai(x)).abs() < 3e-3, "x = {x}");
    }
}
