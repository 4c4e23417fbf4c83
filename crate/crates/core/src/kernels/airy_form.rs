use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{scaled_coords, Kernel, KernelQuery};
use crate::error::Result;
use crate::par::Execution;
use crate::special::{ai, composite_gauss_legendre, NodesWeights};

const PANEL: f64 = 0.5;
const PER_PANEL: usize = 16;
/// Integrand range kept below its peak, in natural-log units.
const LOG_DYNAMIC_RANGE: f64 = 40.0;
const LAMBDA_MAX: f64 = 400.0;

/// Upper bound for `ln |Ai(x)|`.
fn log_ai_bound(x: f64) -> f64 {
    if x <= 0.5 {
        0.54f64.ln()
    } else {
        let tail = -2.0 / 3.0 * x * x.sqrt() - 0.25 * x.ln() - (2.0 * PI.sqrt()).ln();
        tail.min(0.3551f64.ln())
    }
}

/// Composite Gauss rule on `[0, L]` for integrands bounded by
/// `exp(rate * l) |Ai(lead + l)| |Ai(second + l)|`, with `L` chosen where the
/// bound has fallen well below its peak.
fn lambda_rule(rate: f64, lead: f64, second: Option<f64>) -> NodesWeights {
    let bound = |l: f64| rate * l + log_ai_bound(lead + l) + second.map_or(0.0, |b| log_ai_bound(b + l));
    let mut peak = bound(0.0);
    let mut prev = peak;
    let mut panels = 1usize;
    loop {
        let l = panels as f64 * PANEL;
        let b = bound(l);
        peak = peak.max(b);
        if (b < peak - LOG_DYNAMIC_RANGE && b < prev) || l >= LAMBDA_MAX {
            break;
        }
        prev = b;
        panels += 1;
    }
    composite_gauss_legendre(panels, PER_PANEL, 0.0, panels as f64 * PANEL).expect("positive interval")
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn gaussian_heat(dt: f64, ds: f64) -> f64 {
    (-(ds * ds) / (4.0 * dt)).exp() / (4.0 * PI * dt).sqrt()
}

/// `-exp(c1 - c2) (4 pi dt)^{-1/2} exp(-(s~2 - s~1)^2 / (4 dt))` for `tau2 > tau1`,
/// where `c_i = 2/3 tau_i^3 + tau_i s~_i`.
///
/// This is the orientation of the prefactor under which `K0 + K1 + K2` is a
/// conjugate of the contour-integral kernel and reduces to the extended Airy₂
/// kernel for very negative times.
pub fn k0_term(q: KernelQuery) -> f64 {
    if q.tau2 <= q.tau1 {
        return 0.0;
    }
    let dt = q.tau2 - q.tau1;
    let ds = q.s_tilde2() - q.s_tilde1();
    let log = q.conjugation_log() - ds * ds / (4.0 * dt) - 0.5 * (4.0 * PI * dt).ln();
    -log.exp()
}

/// `sum_q a[i][q] b[j][q]` as a matrix product.
fn contract(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b.transpose()
}

fn airy_table(points: &[f64], rule: &NodesWeights, sign: f64, weight: impl Fn(f64, f64) -> f64) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), rule.len(), |i, q| {
        let l = rule.nodes[q];
        ai(points[i] + sign * l) * weight(l, rule.weights[q])
    })
}

/// `K2` on a block: rows `s^1` at `tau1`, columns `s^2` at `tau2`, given in
/// `s^`-coordinates.
fn k2_block(tau1: f64, sh1: &[f64], tau2: f64, sh2: &[f64]) -> DMatrix<f64> {
    let rate = tau2 - tau1;
    let rule = lambda_rule(rate, min_of(sh1), Some(min_of(sh2)));
    let a = airy_table(sh1, &rule, 1.0, |l, w| w * (rate * l).exp());
    let b = airy_table(sh2, &rule, 1.0, |_, _| 1.0);
    contract(&a, &b)
}

/// First `K1` representation (absolutely convergent for `tau1 + tau2 < 0`).
fn k1_a5_block(tau1: f64, sh1: &[f64], tau2: f64, sh2: &[f64]) -> DMatrix<f64> {
    let rate = tau1 + tau2;
    let rule = lambda_rule(rate, min_of(sh2), None);
    let a = airy_table(sh1, &rule, -1.0, |_, _| 1.0);
    let b = airy_table(sh2, &rule, 1.0, |l, w| w * (rate * l).exp());
    contract(&a, &b)
}

/// Second `K1` representation: negative-axis integral plus closed-form term.
fn k1_a6_block(tau1: f64, st1: &[f64], sh1: &[f64], tau2: f64, st2: &[f64], sh2: &[f64]) -> DMatrix<f64> {
    let sigma = tau1 + tau2;
    let rule = lambda_rule(-sigma, min_of(sh1), None);
    let a = airy_table(sh1, &rule, 1.0, |m, w| w * (-sigma * m).exp());
    let b = airy_table(sh2, &rule, -1.0, |_, _| 1.0);
    let mut k = -contract(&a, &b);
    let c = 2f64.powf(-1.0 / 3.0);
    let gap = 0.5 * (tau1 - tau2).powi(2);
    for i in 0..st1.len() {
        for j in 0..st2.len() {
            let arg = c * (st1[i] + st2[j] + gap);
            let e = -0.5 * sigma * (sh2[j] - sh1[i]);
            k[(i, j)] += c * ai(arg) * e.exp();
        }
    }
    k
}

struct Coords {
    tilde: Vec<f64>,
    hat: Vec<f64>,
}

fn coords(tau: f64, s: &[f64]) -> Coords {
    let (tilde, hat) = s.iter().map(|&x| scaled_coords(tau, x)).unzip();
    Coords { tilde, hat }
}

fn k1_block(tau1: f64, c1: &Coords, tau2: f64, c2: &Coords) -> DMatrix<f64> {
    if tau1 + tau2 < 0.0 {
        k1_a5_block(tau1, &c1.hat, tau2, &c2.hat)
    } else {
        k1_a6_block(tau1, &c1.tilde, &c1.hat, tau2, &c2.tilde, &c2.hat)
    }
}

fn airy21_block(tau1: f64, s1: &[f64], tau2: f64, s2: &[f64]) -> DMatrix<f64> {
    let c1 = coords(tau1, s1);
    let c2 = coords(tau2, s2);
    let mut k = k2_block(tau1, &c1.hat, tau2, &c2.hat) + k1_block(tau1, &c1, tau2, &c2);
    if tau2 > tau1 {
        for i in 0..s1.len() {
            for j in 0..s2.len() {
                k[(i, j)] += k0_term(KernelQuery::new(tau1, s1[i], tau2, s2[j]));
            }
        }
    }
    k
}

fn scalar(m: DMatrix<f64>) -> f64 {
    m[(0, 0)]
}

/// `int_0^inf exp(l (tau2 - tau1)) Ai(s^2 + l) Ai(s^1 + l) dl`.
pub fn k2_term(q: KernelQuery) -> f64 {
    scalar(k2_block(q.tau1, &[q.s_hat1()], q.tau2, &[q.s_hat2()]))
}

/// `int_0^inf exp(l (tau1 + tau2)) Ai(s^2 + l) Ai(s^1 - l) dl`.
pub fn k1_a5(q: KernelQuery) -> f64 {
    scalar(k1_a5_block(q.tau1, &[q.s_hat1()], q.tau2, &[q.s_hat2()]))
}

/// The equivalent form `-int_{-inf}^0 (...) + 2^{-1/3} Ai(...) exp(...)`.
pub fn k1_a6(q: KernelQuery) -> f64 {
    scalar(k1_a6_block(
        q.tau1,
        &[q.s_tilde1()],
        &[q.s_hat1()],
        q.tau2,
        &[q.s_tilde2()],
        &[q.s_hat2()],
    ))
}

/// `K1`, switching representation at `tau1 + tau2 = 0`.
pub fn k1_term(q: KernelQuery) -> f64 {
    if q.tau1 + q.tau2 < 0.0 {
        k1_a5(q)
    } else {
        k1_a6(q)
    }
}

/// The Airy₂→₁ kernel `K0 + K1 + K2`.
pub fn k_airy(q: KernelQuery) -> f64 {
    k0_term(q) + k1_term(q) + k2_term(q)
}

/// Extended Airy₂ kernel `int_0^inf e^{l (tau2 - tau1)} Ai(s1 + l) Ai(s2 + l) dl`
/// minus the heat-kernel term for `tau2 > tau1`.
pub fn airy2_extended(q: KernelQuery) -> f64 {
    scalar(airy2_block(q.tau1, &[q.s1], q.tau2, &[q.s2]))
}

fn airy2_block(tau1: f64, s1: &[f64], tau2: f64, s2: &[f64]) -> DMatrix<f64> {
    let mut k = k2_block(tau1, s1, tau2, s2);
    if tau2 > tau1 {
        let d = tau2 - tau1;
        for i in 0..s1.len() {
            for j in 0..s2.len() {
                let (x, y) = (s1[i], s2[j]);
                let log = d * d * d / 12.0 - 0.5 * (x + y) * d;
                k[(i, j)] -= gaussian_heat(d, x - y) * log.exp();
            }
        }
    }
    k
}

/// Extended Airy₁ kernel.
pub fn airy1_extended(q: KernelQuery) -> f64 {
    let d = q.tau2 - q.tau1;
    let sum = q.s1 + q.s2;
    let mut k = ai(sum + d * d) * (d * sum + 2.0 / 3.0 * d * d * d).exp();
    if d > 0.0 {
        k -= gaussian_heat(d, q.s2 - q.s1);
    }
    k
}

/// [`k_airy`] as a [`Kernel`], with factorized block assembly.
#[derive(Debug, Clone, Copy, Default)]
pub struct Airy21Kernel;

impl Kernel for Airy21Kernel {
    fn eval(&self, t1: f64, x: f64, t2: f64, y: f64) -> Result<f64> {
        Ok(k_airy(KernelQuery::new(t1, x, t2, y)))
    }

    fn block(&self, t1: f64, xs: &[f64], t2: f64, ys: &[f64], _exec: Execution) -> Result<DMatrix<f64>> {
        Ok(airy21_block(t1, xs, t2, ys))
    }
}

/// [`airy2_extended`] as a [`Kernel`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Airy2Kernel;

impl Kernel for Airy2Kernel {
    fn eval(&self, t1: f64, x: f64, t2: f64, y: f64) -> Result<f64> {
        Ok(airy2_extended(KernelQuery::new(t1, x, t2, y)))
    }

    fn block(&self, t1: f64, xs: &[f64], t2: f64, ys: &[f64], _exec: Execution) -> Result<DMatrix<f64>> {
        Ok(airy2_block(t1, xs, t2, ys))
    }
}

/// [`airy1_extended`] as a [`Kernel`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Airy1Kernel;

impl Kernel for Airy1Kernel {
    fn eval(&self, t1: f64, x: f64, t2: f64, y: f64) -> Result<f64> {
        Ok(airy1_extended(KernelQuery::new(t1, x, t2, y)))
    }
}
