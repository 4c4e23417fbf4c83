use std::f64::consts::{LN_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{scaled_coords, Kernel};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::special::log_binomial;

const MAX_NODES: usize = 8192;
const AGREEMENT: f64 = 1e-10;
const COLUMN_CHUNK: usize = 512;
/// Relative roundoff of a trapezoid sum against its largest term.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// Circles `|v| = r0` and `|u + 1| = r_neg1`, discretized by the trapezoid rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleContour {
    pub r0: f64,
    pub r_neg1: f64,
    pub nodes: usize,
}

impl Default for CircleContour {
    fn default() -> Self {
        CircleContour {
            r0: 0.2,
            r_neg1: 0.5,
            nodes: 256,
        }
    }
}

impl CircleContour {
    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0 < self.r_neg1 && self.r0 + self.r_neg1 < 1.0) || self.nodes == 0 {
            return Err(Error::ContourConstraint(format!(
                "need 0 < r0 < r_neg1 and r0 + r_neg1 < 1 with nodes > 0, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Circles passing at distance `O(t^{-1/3})` from the double critical
    /// point `-1/2`, so the integrand stays of order one on them for large `t`.
    pub fn for_time(t: f64) -> Self {
        let eps = (4.0 * t).powf(-1.0 / 3.0).min(0.3);
        let nodes = ((20.0 / eps).ceil() as usize).max(64).next_power_of_two();
        CircleContour {
            r0: 0.5 - eps,
            r_neg1: 0.5 - 0.5 * eps,
            nodes,
        }
    }
}

impl CircleContour {
    /// This circle followed by pairs nearly touching at `-c` for smaller `c`,
    /// which suit sites far to the right of the bulk.
    fn family(&self) -> Vec<CircleContour> {
        let gap = 1.0 - self.r0 - self.r_neg1;
        let mut out = vec![*self];
        for c in [0.4, 0.25, 0.15, 0.08, 0.04] {
            let d = (0.5 * gap).min(c / 3.0);
            out.push(CircleContour {
                r0: c - d,
                r_neg1: 1.0 - c - d,
                nodes: self.nodes,
            });
        }
        out
    }

    /// `log max |(1 + 2v) / ((u - v)(1 + u + v))|` over the two circles.
    fn log_cross_bound(&self) -> f64 {
        ((1.0 + 2.0 * self.r0) / ((1.0 - self.r0 - self.r_neg1) * (self.r_neg1 - self.r0))).ln()
    }
}

/// A lattice point `(n, x)`: particle label and position.
type Site = (u64, i64);

struct Circles {
    v: Vec<Complex64>,
    u: Vec<Complex64>,
}

impl Circles {
    fn new(c: &CircleContour, nodes: usize) -> Self {
        let angle = |k: usize| 2.0 * PI * k as f64 / nodes as f64;
        Circles {
            v: (0..nodes).map(|k| Complex64::from_polar(c.r0, angle(k))).collect(),
            u: (0..nodes)
                .map(|k| Complex64::from_polar(c.r_neg1, angle(k)) - 1.0)
                .collect(),
        }
    }

    fn cross(&self, k: usize, j: usize) -> Complex64 {
        let (u, v) = (self.u[k], self.v[j]);
        (1.0 + 2.0 * v) / ((u - v) * (1.0 + u + v))
    }
}

/// Per-node log factors of the column (`v`, with `dv`) and row (`u`, with `du`)
/// integrands, including the `2^{x2 - x1}` conjugation.
fn log_column(t: f64, (n2, x2): Site, v: Complex64) -> Complex64 {
    let n = n2 as f64;
    let x = x2 as f64;
    -v * t + (x + n) * (1.0 + v).ln() - (n - 1.0) * v.ln() + x * LN_2
}

fn log_row(t: f64, (n1, x1): Site, u: Complex64) -> Complex64 {
    let n = n1 as f64;
    let x = x1 as f64;
    u * t + n * u.ln() - (x + n) * (1.0 + u).ln() - x * LN_2
}

/// Rows of `exp(log - shift)` with the per-row shift returned separately.
fn scaled_rows(
    sites: &[Site],
    nodes: &[Complex64],
    f: impl Fn(Site, Complex64) -> Complex64,
) -> (DMatrix<f64>, DMatrix<f64>, Vec<f64>) {
    let mut re = DMatrix::zeros(sites.len(), nodes.len());
    let mut im = DMatrix::zeros(sites.len(), nodes.len());
    let mut shifts = Vec::with_capacity(sites.len());
    for (p, &site) in sites.iter().enumerate() {
        let logs: Vec<Complex64> = nodes.iter().map(|&z| f(site, z)).collect();
        let shift = logs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        for (k, l) in logs.iter().enumerate() {
            let e = (l - shift).exp();
            re[(p, k)] = e.re;
            im[(p, k)] = e.im;
        }
        shifts.push(shift);
    }
    (re, im, shifts)
}

/// The double-integral part `2^{x2 - x1} K^_t` on all row/column site pairs,
/// at a fixed node count.
/// The block at a fixed node count and the roundoff level of each entry.
fn hat_block_fixed(
    t: f64,
    circle: &CircleContour,
    nodes: usize,
    rows: &[Site],
    cols: &[Site],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let circles = Circles::new(circle, nodes);
    let (b_re, b_im, b_shift) = scaled_rows(rows, &circles.u, |s, u| log_row(t, s, u));
    let (a_re, a_im, a_shift) = scaled_rows(cols, &circles.v, |s, v| log_column(t, s, v));

    let mut e_re = DMatrix::<f64>::zeros(rows.len(), cols.len());
    let mut e_im = DMatrix::<f64>::zeros(rows.len(), cols.len());
    let mut start = 0;
    while start < nodes {
        let width = COLUMN_CHUNK.min(nodes - start);
        let mut c_re = DMatrix::<f64>::zeros(nodes, width);
        let mut c_im = DMatrix::<f64>::zeros(nodes, width);
        for k in 0..nodes {
            for j in 0..width {
                let c = circles.cross(k, start + j);
                c_re[(k, j)] = c.re;
                c_im[(k, j)] = c.im;
            }
        }
        let d_re = &b_re * &c_re - &b_im * &c_im;
        let d_im = &b_re * &c_im + &b_im * &c_re;
        let ar = a_re.columns(start, width);
        let ai = a_im.columns(start, width);
        e_re += &d_re * ar.transpose() - &d_im * ai.transpose();
        e_im += &d_re * ai.transpose() + &d_im * ar.transpose();
        start += width;
    }

    let norm = (nodes as f64).powi(2);
    let cross_max = circle.log_cross_bound().exp();
    let mut out = DMatrix::zeros(rows.len(), cols.len());
    let mut noise = DMatrix::zeros(rows.len(), cols.len());
    for p in 0..rows.len() {
        for q in 0..cols.len() {
            let sign = if (rows[p].0 + cols[q].0).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            let scale = (b_shift[p] + a_shift[q]).exp() / norm;
            let (re, im) = (e_re[(p, q)] * scale, e_im[(p, q)] * scale);
            // roundoff scales with the integrand, not with the integral
            let magnitude = (b_shift[p] + a_shift[q]).exp() * cross_max;
            if im.abs() > 1e-9 * re.abs().max(magnitude) {
                return Err(Error::ImaginaryResidue { real: re, imag: im });
            }
            out[(p, q)] = sign * re;
            noise[(p, q)] = ROUNDOFF * magnitude;
        }
    }
    Ok((out, noise))
}

/// Largest real part of the log integrand at each site.
fn log_peaks(sites: &[Site], nodes: &[Complex64], f: impl Fn(Site, Complex64) -> Complex64) -> Vec<f64> {
    sites
        .iter()
        .map(|&s| nodes.iter().map(|&z| f(s, z).re).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// Minimum gain (in log magnitude) before an entry leaves the given circle.
const SWITCH_GAIN: f64 = 2.0;

/// The double-integral block, each entry taken on the member of
/// [`CircleContour::family`] where its integrand is smallest, which bounds the
/// cancellation in the trapezoid sums.
fn hat_block(t: f64, circle: &CircleContour, rows: &[Site], cols: &[Site]) -> Result<DMatrix<f64>> {
    circle.validate()?;
    let family = circle.family();
    let peaks: Vec<(Vec<f64>, Vec<f64>, f64)> = family
        .iter()
        .map(|c| {
            let circles = Circles::new(c, c.nodes);
            (
                log_peaks(rows, &circles.u, |s, u| log_row(t, s, u)),
                log_peaks(cols, &circles.v, |s, v| log_column(t, s, v)),
                c.log_cross_bound(),
            )
        })
        .collect();
    let nc = cols.len();
    let mut choice = vec![0usize; rows.len() * nc];
    for p in 0..rows.len() {
        for q in 0..nc {
            let size = |c: usize| peaks[c].0[p] + peaks[c].1[q] + peaks[c].2;
            let mut best = (0, size(0) - SWITCH_GAIN);
            for c in 1..family.len() {
                if size(c) < best.1 {
                    best = (c, size(c));
                }
            }
            choice[p * nc + q] = best.0;
        }
    }

    let mut out = DMatrix::zeros(rows.len(), nc);
    for (c, contour) in family.iter().enumerate() {
        let rsel: Vec<usize> = (0..rows.len())
            .filter(|&p| (0..nc).any(|q| choice[p * nc + q] == c))
            .collect();
        if rsel.is_empty() {
            continue;
        }
        let csel: Vec<usize> = (0..nc)
            .filter(|&q| rsel.iter().any(|&p| choice[p * nc + q] == c))
            .collect();
        let r: Vec<Site> = rsel.iter().map(|&p| rows[p]).collect();
        let k: Vec<Site> = csel.iter().map(|&q| cols[q]).collect();
        let sub = hat_block_on(t, contour, &r, &k)?;
        for (i, &p) in rsel.iter().enumerate() {
            for (j, &q) in csel.iter().enumerate() {
                if choice[p * nc + q] == c {
                    out[(p, q)] = sub[(i, j)];
                }
            }
        }
    }
    Ok(out)
}

/// Doubles the node count until two successive blocks agree.
fn hat_block_on(t: f64, circle: &CircleContour, rows: &[Site], cols: &[Site]) -> Result<DMatrix<f64>> {
    let mut nodes = circle.nodes;
    let (mut prev, mut prev_noise) = hat_block_fixed(t, circle, nodes, rows, cols)?;
    loop {
        if 2 * nodes > MAX_NODES {
            let last = prev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            return Err(Error::NonConvergence { last, previous: last });
        }
        nodes *= 2;
        let (next, noise) = hat_block_fixed(t, circle, nodes, rows, cols)?;
        let size = next.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let settled = (0..next.len()).all(|i| (next[i] - prev[i]).abs() <= AGREEMENT * size + noise[i] + prev_noise[i]);
        if settled {
            return Ok(next);
        }
        prev = next;
        prev_noise = noise;
    }
}

/// `-binom(x1 - x2 - 1, n2 - n1 - 1) 2^{x2 - x1}` for `n2 > n1`, else 0. The
/// binomial counts paths, so it vanishes unless `x1 - x2 >= n2 - n1`.
fn binomial_conj((n1, x1): Site, (n2, x2): Site) -> f64 {
    if n2 <= n1 || x1 - x2 < (n2 - n1) as i64 {
        return 0.0;
    }
    let b = log_binomial(x1 - x2 - 1, n2 as i64 - n1 as i64 - 1);
    -b.scaled_value((x2 - x1) as f64 * LN_2)
}

fn check_sites(sites: &[Site]) -> Result<()> {
    if let Some(s) = sites.iter().find(|s| s.0 == 0) {
        return Err(Error::Domain(format!("particle labels start at 1, got {s:?}")));
    }
    Ok(())
}

/// `2^{x2 - x1} K_t(n1, x1; n2, x2)` on a block of sites.
pub(crate) fn finite_time_block_conj(
    t: f64,
    circle: &CircleContour,
    rows: &[Site],
    cols: &[Site],
) -> Result<DMatrix<f64>> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    check_sites(rows)?;
    check_sites(cols)?;
    let mut k = hat_block(t, circle, rows, cols)?;
    for (p, &r) in rows.iter().enumerate() {
        for (q, &c) in cols.iter().enumerate() {
            k[(p, q)] += binomial_conj(r, c);
        }
    }
    Ok(k)
}

/// The exact finite-time kernel `K_t(n1, x1; n2, x2)` for particles started
/// from `x_k(0) = -2k`.
pub fn finite_time_kernel(t: f64, n1: u64, x1: i64, n2: u64, x2: i64, c: &CircleContour) -> Result<f64> {
    let conj = finite_time_block_conj(t, c, &[(n1, x1)], &[(n2, x2)])?[(0, 0)];
    Ok(conj * ((x1 - x2) as f64 * LN_2).exp())
}

/// Lattice point for `(tau, s)` under the transition-region scaling.
pub(crate) fn transition_site(t: f64, tau: f64, s: f64) -> Result<Site> {
    let c = (0.5 * t).cbrt();
    let n = (t / 4.0 + tau * c * c + 1e-9).floor();
    if n < 1.0 {
        return Err(Error::Domain(format!("index {n} < 1 at t = {t}, tau = {tau}")));
    }
    let st = scaled_coords(tau, s).0;
    let x = (-2.0 * tau * c * c - st * c + 1e-9).floor();
    Ok((n as u64, x as i64))
}

/// `K_t(n1, x1; n2, x2) (t/2)^{1/3} 2^{x2 - x1}` at the lattice points of
/// `(tau_i, s_i)`.
pub fn rescaled_finite_kernel(t: f64, tau1: f64, s1: f64, tau2: f64, s2: f64) -> Result<f64> {
    let r = transition_site(t, tau1, s1)?;
    let c = transition_site(t, tau2, s2)?;
    let conj = finite_time_block_conj(t, &CircleContour::for_time(t), &[r], &[c])?[(0, 0)];
    Ok(conj * (0.5 * t).cbrt())
}

/// The double-integral part of [`rescaled_finite_kernel`] alone.
pub fn rescaled_finite_kernel_hat(t: f64, tau1: f64, s1: f64, tau2: f64, s2: f64) -> Result<f64> {
    let r = transition_site(t, tau1, s1)?;
    let c = transition_site(t, tau2, s2)?;
    let circle = CircleContour::for_time(t);
    circle.validate()?;
    Ok(hat_block(t, &circle, &[r], &[c])?[(0, 0)] * (0.5 * t).cbrt())
}

/// `2^{x2 - x1} K_t` as a [`Kernel`] on (label, position) pairs. The
/// conjugation leaves every Fredholm determinant unchanged.
#[derive(Debug, Clone, Copy)]
pub struct FiniteTimeKernel {
    pub t: f64,
    pub circle: CircleContour,
}

impl FiniteTimeKernel {
    pub fn new(t: f64) -> Self {
        FiniteTimeKernel {
            t,
            circle: CircleContour::for_time(t),
        }
    }
}

fn to_site(n: f64, x: f64) -> Site {
    (n.round() as u64, x.round() as i64)
}

impl Kernel for FiniteTimeKernel {
    fn eval(&self, t1: f64, x: f64, t2: f64, y: f64) -> Result<f64> {
        Ok(finite_time_block_conj(self.t, &self.circle, &[to_site(t1, x)], &[to_site(t2, y)])?[(0, 0)])
    }

    fn block(&self, t1: f64, xs: &[f64], t2: f64, ys: &[f64], _exec: Execution) -> Result<DMatrix<f64>> {
        let rows: Vec<Site> = xs.iter().map(|&x| to_site(t1, x)).collect();
        let cols: Vec<Site> = ys.iter().map(|&y| to_site(t2, y)).collect();
        finite_time_block_conj(self.t, &self.circle, &rows, &cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_independence() {
        for &(t, n1, x1, n2, x2) in &[
            (1.0, 1, -1, 1, -2),
            (2.0, 1, -1, 2, -3),
            (4.0, 2, -2, 1, 0),
            (3.0, 3, -4, 3, -5),
        ] {
            let a = finite_time_kernel(t, n1, x1, n2, x2, &CircleContour::default()).unwrap();
            let b = finite_time_kernel(
                t,
                n1,
                x1,
                n2,
                x2,
                &CircleContour {
                    r0: 0.3,
                    r_neg1: 0.6,
                    nodes: 256,
                },
            )
            .unwrap();
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn single_particle_diagonal_is_poisson_mass() {
        // With one particle the kernel on n = 1 is the projection onto the
        // Poisson(t) law of x_1(t) + 2, so K(1, x; 1, x) = P(x_1(t) = x).
        let t: f64 = 1.3;
        for x in -2..4 {
            let k = finite_time_kernel(t, 1, x, 1, x, &CircleContour::default()).unwrap();
            let m = (x + 2) as i32;
            let mass = (-t).exp() * t.powi(m) / (1..=m).map(|i| i as f64).product::<f64>();
            assert!((k - mass).abs() < 1e-12, "x={x}: {k} vs {mass}");
        }
        let k = finite_time_kernel(t, 1, -3, 1, -3, &CircleContour::default()).unwrap();
        assert!(k.abs() < 1e-14);
    }

    #[test]
    fn adapted_circles_are_admissible() {
        for t in [0.5, 1.0, 16.0, 512.0, 1e4] {
            CircleContour::for_time(t).validate().unwrap();
        }
    }

    #[test]
    fn lattice_map_at_t16() {
        assert_eq!(transition_site(16.0, 0.0, 0.0).unwrap(), (4, 0));
        assert_eq!(transition_site(16.0, 0.0, 1.5).unwrap(), (4, -3));
        assert!(transition_site(1.0, -2.0, 0.0).is_err());
    }

    #[test]
    fn binomial_term_only_for_later_labels() {
        assert_eq!(binomial_conj((2, -1), (2, -5)), 0.0);
        assert_eq!(binomial_conj((3, -1), (2, -5)), 0.0);
        // binom(3, 0) 2^{-4}
        assert!((binomial_conj((1, -1), (2, -5)) + 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(binomial_conj((1, -2), (2, -2)), 0.0);
        assert_eq!(binomial_conj((1, -2), (3, -3)), 0.0);
        assert!((binomial_conj((1, 0), (3, -2)) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_circles() {
        let c = CircleContour {
            r0: 0.6,
            r_neg1: 0.5,
            nodes: 64,
        };
        assert!(matches!(
            finite_time_kernel(1.0, 1, 0, 1, 0, &c),
            Err(Error::ContourConstraint(_))
        ));
    }
}
