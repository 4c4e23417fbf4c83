//! Acceptance criteria shared by the `acceptance` test target and the CLI
//! `selftest`, plus the oracles they compare against.

pub mod oracles;

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fredholm::{
    det_on_grid, finite_time_cdf_table, process_cdf, process_cdf_with, Conjugation, Process, QuadratureGrid,
};
use crate::kernels::{
    finite_time_kernel, k1_a5, k1_a6, k_airy, k_contour, rescaled_finite_kernel, rescaled_finite_kernel_hat,
    Airy21Kernel, CircleContour, ContourSpec, KernelQuery,
};
use crate::par::Execution;
use crate::scaling::{rescale, RegimeSpec};
use crate::sim::{
    evolve_coupled, evolve_shared, init_particles, rng_stream, sample_positions, Clocks, InitialCondition, SimConfig,
};
use crate::special::{airy_ai, airy_ai_prime};
use crate::stats::{ks_distance, ks_distance_with_left_limits, EmpiricalDistribution};
use oracles::{gaussian_cdf, poisson_tail, MasterLaw};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: String,
    pub title: String,
    pub passed: bool,
    /// Diagnostics are reported but never fail a run.
    pub gating: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(id: &str, title: &str, passed: bool, detail: String) -> Self {
        CheckOutcome {
            id: id.into(),
            title: title.into(),
            passed,
            gating: true,
            detail,
        }
    }

    fn from_result(id: &str, title: &str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(id, title, passed, detail),
            Err(e) => Self::new(id, title, false, format!("error: {e}")),
        }
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let kind = if self.gating { "" } else { " (diagnostic)" };
        format!("{status} [{}] {}{kind}: {}", self.id, self.title, self.detail)
    }
}

/// Whether every gating check passed.
pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|o| o.passed || !o.gating)
}

const SEED: u64 = 0x7A5E_2021;

pub fn airy_ode_invariant() -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let h = 1e-3;
        let mut worst_ode = 0.0f64;
        let mut worst_der = 0.0f64;
        let xs = (-24..=24).map(|i| i as f64 * 0.25).chain([-0.0004, 0.0004, 0.0]);
        for x in xs {
            let (m, c, p) = (airy_ai(x - h)?, airy_ai(x)?, airy_ai(x + h)?);
            worst_ode = worst_ode.max(((p - 2.0 * c + m) / (h * h) - x * c).abs());
            worst_der = worst_der.max(((p - m) / (2.0 * h) - airy_ai_prime(x)?).abs());
        }
        Ok((
            worst_ode < 1e-5 && worst_der < 1e-6,
            format!("max |Ai'' - x Ai| = {worst_ode:.2e} (< 1e-5), max derivative mismatch = {worst_der:.2e} (< 1e-6)"),
        ))
    };
    CheckOutcome::from_result("airy-ode", "Airy ODE invariant", run())
}

pub fn criterion_1() -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let vals = [-1.0, 0.0, 1.0];
        let ss = [-2.0, 0.0, 2.0];
        let c = ContourSpec::default();
        let mut worst = 0.0f64;
        let mut at = KernelQuery::new(0.0, 0.0, 0.0, 0.0);
        for &t1 in &vals {
            for &s1 in &ss {
                for &t2 in &vals {
                    for &s2 in &ss {
                        let q = KernelQuery::new(t1, s1, t2, s2);
                        let d = (k_airy(q) * (-q.conjugation_log()).exp() - k_contour(q, &c)?).abs();
                        if d > worst {
                            worst = d;
                            at = q;
                        }
                    }
                }
            }
        }
        Ok((
            worst <= 1e-6,
            format!("max deviation {worst:.2e} over 81 points (<= 1e-6), worst at {at:?}"),
        ))
    };
    CheckOutcome::from_result("1", "Airy form vs contour form", run())
}

pub fn criterion_2() -> CheckOutcome {
    let mut rng = rng_stream(SEED, 0, 2);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 20 {
        let (t1, t2) = (rng.random_range(-2.0..1.0), rng.random_range(-2.0..1.0));
        if t1 + t2 > -0.1 {
            continue;
        }
        let q = KernelQuery::new(t1, rng.random_range(-3.0..3.0), t2, rng.random_range(-3.0..3.0));
        worst = worst.max((k1_a5(q) - k1_a6(q)).abs());
        count += 1;
    }
    CheckOutcome::new(
        "2",
        "K1 half-line vs closed-form representation",
        worst <= 1e-8,
        format!("max deviation {worst:.2e} over 20 random points with tau1 + tau2 <= -0.1 (<= 1e-8)"),
    )
}

pub fn criterion_3() -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let base = ContourSpec::default();
        let variants = [
            ContourSpec {
                phi_plus: 0.34 * PI,
                ..base
            },
            ContourSpec {
                phi_plus: 0.40 * PI,
                phi_minus: 0.56 * PI,
                ..base
            },
            ContourSpec {
                anchor_plus: 0.8,
                anchor_minus: 0.1,
                ..base
            },
            ContourSpec {
                anchor_plus: 0.3,
                anchor_minus: -0.1,
                phi_minus: 0.62 * PI,
                ..base
            },
        ];
        let points = [
            KernelQuery::new(0.0, 0.0, 0.0, 0.0),
            KernelQuery::new(0.5, 0.1, 0.0, 0.2),
            KernelQuery::new(-0.5, 1.0, 0.5, -1.0),
            KernelQuery::new(1.0, -1.0, 1.0, 0.5),
            KernelQuery::new(-1.0, 0.5, -0.5, 0.0),
        ];
        let mut contour_worst = 0.0f64;
        for q in points {
            let v0 = k_contour(q, &base)?;
            for c in &variants {
                contour_worst = contour_worst.max((k_contour(q, c)? - v0).abs());
            }
        }
        let circles = [(0.2, 0.5), (0.3, 0.6), (0.25, 0.55)].map(|(r0, r1)| CircleContour {
            r0,
            r_neg1: r1,
            nodes: 256,
        });
        let sites = [
            (1.0, 1, -1, 1, -2),
            (2.0, 1, -1, 2, -3),
            (4.0, 2, -2, 1, 0),
            (3.0, 3, -4, 3, -5),
            (6.0, 2, 1, 4, -3),
        ];
        let mut circle_worst = 0.0f64;
        for (t, n1, x1, n2, x2) in sites {
            let v0 = finite_time_kernel(t, n1, x1, n2, x2, &circles[0])?;
            for c in &circles[1..] {
                circle_worst = circle_worst.max((finite_time_kernel(t, n1, x1, n2, x2, c)? - v0).abs());
            }
        }
        Ok((
            contour_worst <= 1e-6 && circle_worst <= 1e-8,
            format!("contour spread {contour_worst:.2e} (<= 1e-6), circle spread {circle_worst:.2e} (<= 1e-8)"),
        ))
    };
    CheckOutcome::from_result("3", "path independence", run())
}

pub fn criterion_4(exec: Execution) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let mut worst = 0.0f64;
        let mut count = 0;
        for t in [1.0f64, 4.0, 16.0] {
            let top = (t + 5.0 * t.sqrt()).ceil() as i64;
            let levels: Vec<i64> = (-3..=top).collect();
            let table = finite_time_cdf_table(t, 1, &levels, 1e-12, exec)?;
            for (a, r) in levels.iter().zip(&table) {
                worst = worst.max((r.value - poisson_tail(t, a + 2)).abs());
                count += 1;
            }
        }
        Ok((
            worst <= 1e-8,
            format!("max |det - Poisson tail| = {worst:.2e} over {count} (t, a) pairs (<= 1e-8)"),
        ))
    };
    CheckOutcome::from_result("4", "finite-time one-point law", run())
}

pub fn criterion_5(exec: Execution) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let mut worst = 0.0f64;
        let mut count = 0;
        for t in [0.5, 2.0, 4.0] {
            for n in [2usize, 3] {
                let law = MasterLaw::two_periodic(n, t, 1.0 / 1024.0)?;
                let label_sets: Vec<Vec<u64>> = if n == 2 {
                    vec![vec![2], vec![1, 2]]
                } else {
                    vec![vec![3], vec![1, 3], vec![2, 3], vec![1, 2, 3]]
                };
                for labels in &label_sets {
                    for d in 1..=6i64 {
                        for lead in [0i64, 1] {
                            let a: Vec<f64> = labels
                                .iter()
                                .enumerate()
                                .map(|(i, &k)| (-2 * k as i64 + d + if i == 0 { lead } else { 0 }) as f64)
                                .collect();
                            let times: Vec<f64> = labels.iter().map(|&k| k as f64).collect();
                            let det = process_cdf_with(Process::FiniteTime { t }, &times, &a, 1e-8, exec)?.value;
                            let exact = law
                                .probability(|s| labels.iter().zip(&a).all(|(&k, &ak)| s[k as usize - 1] as f64 >= ak));
                            worst = worst.max((det - exact).abs());
                            count += 1;
                        }
                    }
                }
            }
        }
        Ok((
            worst <= 1e-6,
            format!("max |det - master equation| = {worst:.2e} over {count} events (<= 1e-6)"),
        ))
    };
    CheckOutcome::from_result("5", "master-equation oracle", run())
}

pub fn criterion_6() -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let limit = k_airy(KernelQuery::new(0.0, 0.0, 0.0, 0.0));
        let mut errs = Vec::new();
        for t in [1e2, 1e3, 1e4] {
            errs.push((rescaled_finite_kernel(t, 0.0, 0.0, 0.0, 0.0)? - limit).abs());
        }
        Ok((
            errs[0] > errs[1] && errs[1] > errs[2],
            format!(
                "|K_t - K| at t = 1e2, 1e3, 1e4: {:.3e}, {:.3e}, {:.3e} (strictly decreasing)",
                errs[0], errs[1], errs[2]
            ),
        ))
    };
    CheckOutcome::from_result("6", "finite-t kernel convergence", run())
}

/// Sup-distance on `s in [-1, 2]` (step 1/4) between the one-point
/// Airy₂→₁ law at `tau` and `other(s)`.
fn endpoint_distance(tau: f64, other: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut d = 0.0f64;
    for i in 0..=12 {
        let s = -1.0 + 0.25 * i as f64;
        let a = process_cdf(Process::Airy21, &[tau], &[s], 1e-8)?.value;
        d = d.max((a - other(s)?).abs());
    }
    Ok(d)
}

pub fn criterion_7() -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let airy2 = |s: f64| process_cdf(Process::Airy2, &[0.0], &[s], 1e-8).map(|r| r.value);
        // Kernel limit: K -> 2^{-1/3} Ai(2^{-1/3}(x + y)), i.e. X -> 2^{1/3} A1.
        let airy1 = |s: f64| process_cdf(Process::Airy1, &[0.0], &[s / 2f64.cbrt()], 1e-8).map(|r| r.value);
        let airy1_inverse = |s: f64| process_cdf(Process::Airy1, &[0.0], &[s * 2f64.cbrt()], 1e-8).map(|r| r.value);
        let (m2, m4) = (endpoint_distance(-2.0, airy2)?, endpoint_distance(-4.0, airy2)?);
        let (p2, p4) = (endpoint_distance(2.0, airy1)?, endpoint_distance(4.0, airy1)?);
        let inverse = endpoint_distance(4.0, airy1_inverse)?;
        let passed = m4 <= 0.02 && p4 <= 0.02 && m4 < m2 && p4 <= p2.max(1e-7);
        Ok((
            passed,
            format!(
                "vs Airy2: d(-2) = {m2:.4}, d(-4) = {m4:.4}; vs 2^(1/3) Airy1: d(2) = {p2:.2e}, d(4) = {p4:.2e} \
                 (targets 0.02 at |tau| = 4, decreasing); 2^(-1/3) Airy1 scaling gives d(4) = {inverse:.4}"
            ),
        ))
    };
    CheckOutcome::from_result("7", "interpolation endpoints", run())
}

/// Replicas used by [`criterion_8`].
pub const TRANSITION_REPLICAS: u32 = 10_000;

pub fn criterion_8(replicas: u32, exec: Execution) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let t: f64 = 512.0;
        let n = 128u64;
        let cfg = SimConfig {
            ic: InitialCondition::TwoPeriodic,
            n_particles: n as usize,
            horizon: t,
            seed: SEED,
            coupling: false,
        };
        let raw: Vec<i64> = sample_positions(&cfg, &[n], replicas, exec)?
            .into_iter()
            .map(|r| r[0])
            .collect();
        let xs: Vec<f64> = raw
            .iter()
            .map(|&x| rescale(RegimeSpec::Transition, x, 0.0, t))
            .collect::<Result<_>>()?;
        let d = EmpiricalDistribution::new(xs)?;

        // X <= s  iff  x_n >= -s (t/2)^{1/3}.
        let c = (0.5 * t).cbrt();
        let lo = *raw.iter().min().unwrap_or(&0);
        let hi = *raw.iter().max().unwrap_or(&0) + 1;
        let levels: Vec<i64> = (lo..=hi).collect();
        let table = finite_time_cdf_table(t, n, &levels, 1e-10, exec)?;
        let at = |a: i64| table[(a - lo) as usize].value;
        let site = |s: f64| (-s * c).round() as i64;
        let ks_exact = ks_distance_with_left_limits(&d, |s| at(site(s)), |s| at(site(s) + 1));

        let support = d.support();
        let limit: Vec<f64> = exec.try_map_range(support.len(), |i| {
            process_cdf_with(Process::Airy21, &[0.0], &[support[i]], 1e-8, Execution::Sequential).map(|r| r.value)
        })?;
        let ks_limit = ks_distance(&d, |s| {
            let i = support.partition_point(|&x| x < s);
            limit[i.min(limit.len() - 1)]
        });
        // The exact law against the limit, without sampling noise.
        let mut bias = 0.0f64;
        for (i, &s) in support.iter().enumerate() {
            bias = bias
                .max((at(site(s)) - limit[i]).abs())
                .max((at(site(s) + 1) - limit[i]).abs());
        }
        Ok((
            ks_limit <= 0.05 && ks_exact <= 0.02,
            format!(
                "t = 512, {replicas} replicas: KS vs Airy2->1 = {ks_limit:.4} (<= 0.05), KS vs exact t = 512 law = \
                 {ks_exact:.4} (<= 0.02); exact law vs limit at the sample points = {bias:.4}"
            ),
        ))
    };
    CheckOutcome::from_result("8", "Monte Carlo vs limit law", run())
}

pub const GUE_REPLICAS: u32 = 10_000;

/// The determinant half always runs; the Monte Carlo half only with `replicas`.
pub fn criterion_9(replicas: Option<u32>, exec: Execution) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let target = |s: f64| gaussian_cdf(SQRT_2 * s);
        let mut worst = 0.0f64;
        for i in 0..=16 {
            let s = -2.0 + 0.25 * i as f64;
            worst =
                worst.max((process_cdf_with(Process::GueMinors, &[1.0], &[s], 1e-8, exec)?.value - target(s)).abs());
        }
        let mut passed = worst <= 1e-6;
        let mut detail = format!("det vs Phi(sqrt2 s): {worst:.2e} (<= 1e-6)");
        if let Some(replicas) = replicas {
            let t = 256.0;
            let cfg = SimConfig {
                ic: InitialCondition::TwoPeriodic,
                n_particles: 1,
                horizon: t,
                seed: SEED,
                coupling: false,
            };
            let raw = sample_positions(&cfg, &[1], replicas, exec)?;
            let xs: Vec<f64> = raw
                .iter()
                .map(|r| rescale(RegimeSpec::GueMinors, r[0], 1.0, t))
                .collect::<Result<_>>()?;
            let ks = ks_distance(&EmpiricalDistribution::new(xs)?, target);
            // x_1(t) = -2 + Poisson(t) exactly, so the finite-t bias is computable.
            let mut bias = 0.0f64;
            for k in 0..=(2.0 * t) as i64 {
                let s = rescale(RegimeSpec::GueMinors, -2 + k, 1.0, t)?;
                bias = bias
                    .max((poisson_tail(t, k) - target(s)).abs())
                    .max((poisson_tail(t, k + 1) - target(s)).abs());
            }
            passed &= ks <= 0.05;
            let _ = write!(
                detail,
                "; t = 256 MC ({replicas} replicas) KS = {ks:.4} (<= 0.05); exact t = 256 law is at KS {bias:.4} from the limit"
            );
        }
        Ok((passed, detail))
    };
    CheckOutcome::from_result("9", "GUE-minors endpoint", run())
}

pub fn criterion_10() -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let n = 32usize;
        let m = 2i64;
        let lower = init_particles(&InitialCondition::TwoPeriodic, n)?;
        let upper = init_particles(&InitialCondition::Perturbed { offsets: vec![m; n] }, n)?;
        let mut ordered = 0;
        for trial in 0..1000u32 {
            let clocks = if trial % 2 == 0 { Clocks::Particle } else { Clocks::Site };
            let mut rng = rng_stream(SEED, trial, 10);
            let (a, b) = evolve_coupled(&lower, &upper, 10.0, clocks, &mut rng)?;
            if a.positions.iter().zip(&b.positions).all(|(x, z)| x <= z) {
                ordered += 1;
            }
        }

        let t: f64 = 64.0;
        let label = 16usize;
        let c = (0.5 * t).cbrt();
        let mut sandwich = 0;
        let mut worst = 0.0f64;
        for trial in 0..1000u32 {
            let mut rng = rng_stream(SEED, trial, 11);
            let mut offsets = Vec::with_capacity(n);
            let mut prev = m;
            for _ in 0..n {
                let o = rng.random_range(-m..=m.min(prev + 1));
                offsets.push(o);
                prev = o;
            }
            let mut x = lower.clone();
            let mut z = init_particles(&InitialCondition::Perturbed { offsets }, n)?;
            evolve_shared(&mut [&mut x, &mut z], t, Clocks::Particle, &mut rng)?;
            let gap = x
                .positions
                .iter()
                .zip(&z.positions)
                .map(|(a, b)| (a - b).abs())
                .max()
                .unwrap_or(0);
            let diff = (rescale(RegimeSpec::Transition, x.positions[label - 1], 0.0, t)?
                - rescale(RegimeSpec::Transition, z.positions[label - 1], 0.0, t)?)
            .abs();
            worst = worst.max(diff);
            if gap <= m && diff <= m as f64 / c + 1e-12 {
                sandwich += 1;
            }
        }
        Ok((
            ordered == 1000 && sandwich == 1000,
            format!(
                "order kept in {ordered}/1000 shifted trials; |dX| <= M/(t/2)^(1/3) = {:.4} in {sandwich}/1000 perturbed trials \
                 (max {worst:.4})",
                m as f64 / c
            ),
        ))
    };
    CheckOutcome::from_result("10", "coupling monotonicity", run())
}

pub fn criterion_11(exec: Execution) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let grid = QuadratureGrid::gauss_legendre(&[0.0, 0.5], &[0.0, 0.5], 12.0, 24)?;
        let plain = det_on_grid(&Airy21Kernel, &grid, Conjugation::None, exec)?;
        let mut sim = 0.0f64;
        for c in [Conjugation::Weighted, Conjugation::Exponential] {
            sim = sim.max(((det_on_grid(&Airy21Kernel, &grid, c, exec)? - plain) / plain).abs());
        }

        let rank_one = |_: f64, x: f64, _: f64, y: f64| x * y;
        let g = QuadratureGrid::gauss_legendre(&[0.0], &[0.0], 1.0, 8)?;
        let r1 = (det_on_grid(&rank_one, &g, Conjugation::None, exec)? - 2.0 / 3.0).abs();

        let tol = 1e-8;
        let mut shape_ok = true;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=10 {
            let v = process_cdf_with(Process::Airy21, &[0.0], &[-2.0 + 0.5 * i as f64], tol, exec)?.value;
            shape_ok &= v >= prev - 2.0 * tol && (-2.0 * tol..=1.0 + 2.0 * tol).contains(&v);
            prev = v;
        }
        Ok((
            sim <= 1e-10 && r1 <= 1e-10 && shape_ok,
            format!(
                "similarity {sim:.2e} (<= 1e-10), rank-one {r1:.2e} (<= 1e-10), tabulated CDF monotone and in range: {shape_ok}"
            ),
        ))
    };
    CheckOutcome::from_result("11", "Fredholm engine hygiene", run())
}

pub fn criterion_12() -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let t = 1e4;
        let mut ok = true;
        let mut detail = String::from("t = 1e4:");
        for s in [5.0, 7.0, 10.0] {
            let v = rescaled_finite_kernel_hat(t, 0.0, s, 0.0, s)?.abs();
            let bound = (-2.0 * s).exp();
            ok &= v <= bound;
            let _ = write!(detail, " s = {s}: |K^| = {v:.2e} vs e^(-2s) = {bound:.2e};");
        }
        Ok((ok, detail))
    };
    let mut o = CheckOutcome::from_result("12", "moderate-deviation decay", run());
    o.gating = false;
    o
}

/// Everything except Monte Carlo at `t >= 256`.
pub fn selftest(exec: Execution) -> Vec<CheckOutcome> {
    vec![
        airy_ode_invariant(),
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(exec),
        criterion_5(exec),
        criterion_6(),
        criterion_7(),
        criterion_9(None, exec),
        criterion_10(),
        criterion_11(exec),
        criterion_12(),
    ]
}
