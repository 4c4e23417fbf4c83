use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::KernelQuery;
use crate::error::{Error, Result};
use crate::special::gauss_legendre;

/// Two-ray paths `gamma_+` (through `anchor_plus`, leaving at angles
/// `±phi_plus`) and `gamma_-` (through `anchor_minus`, angles `±phi_minus`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub anchor_plus: f64,
    pub anchor_minus: f64,
    pub truncation_radius: f64,
    pub nodes_per_branch: usize,
}

impl Default for ContourSpec {
    /// Angles near `pi/3` and `2pi/3` give the cubic terms their fastest decay,
    /// which keeps the `tau z^2` growth along `gamma_-` small for `|tau| <= 1`.
    fn default() -> Self {
        ContourSpec {
            phi_plus: 0.36 * PI,
            phi_minus: 0.60 * PI,
            anchor_plus: 0.5,
            anchor_minus: -0.25,
            truncation_radius: 12.0,
            nodes_per_branch: 400,
        }
    }
}

impl ContourSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::ContourConstraint(m.to_string()));
        if !(self.phi_plus > PI / 3.0 && self.phi_plus < PI / 2.0) {
            return fail("phi_plus must lie in (pi/3, pi/2)");
        }
        if !(self.phi_minus > PI / 2.0 && self.phi_minus < PI - self.phi_plus) {
            return fail("phi_minus must lie in (pi/2, pi - phi_plus)");
        }
        if !(self.anchor_plus > 0.0) {
            return fail("anchor_plus must be positive");
        }
        // gamma_- strictly between -gamma_+ and gamma_+; with the angle bounds
        // above the rays then never meet.
        if !(self.anchor_minus > -self.anchor_plus && self.anchor_minus < self.anchor_plus) {
            return fail("anchor_minus must lie in (-anchor_plus, anchor_plus)");
        }
        if !(self.truncation_radius > 0.0) || self.nodes_per_branch == 0 {
            return fail("truncation radius and node count must be positive");
        }
        Ok(())
    }

    /// Quadrature points and oriented weights `dw` along a path: both branches,
    /// the upper one traversed with `sign_upper`.
    fn path(&self, anchor: f64, phi: f64, sign_upper: f64) -> Result<Vec<(Complex64, Complex64, f64)>> {
        let rule = gauss_legendre(self.nodes_per_branch, 0.0, self.truncation_radius)?;
        let mut pts = Vec::with_capacity(2 * rule.len());
        for sign in [1.0, -1.0] {
            let dir = Complex64::from_polar(1.0, sign * phi);
            let orient = if sign > 0.0 { sign_upper } else { -sign_upper };
            for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
                pts.push((anchor + r * dir, dir * (orient * w), r));
            }
        }
        Ok(pts)
    }
}

/// The Airy₂→₁ kernel from its double contour integral.
pub fn k_contour(q: KernelQuery, c: &ContourSpec) -> Result<f64> {
    c.validate()?;
    let (st1, st2) = (q.s_tilde1(), q.s_tilde2());
    // gamma_+ runs downward, gamma_- upward.
    let wpath = c.path(c.anchor_plus, c.phi_plus, -1.0)?;
    let zpath = c.path(c.anchor_minus, c.phi_minus, 1.0)?;

    let log_f = |w: Complex64| w * w * w / 3.0 + q.tau2 * w * w - st2 * w;
    let log_g = |z: Complex64| -(z * z * z / 3.0 + q.tau1 * z * z - st1 * z);
    let fw: Vec<Complex64> = wpath.iter().map(|&(w, _, _)| log_f(w)).collect();
    let gz: Vec<Complex64> = zpath.iter().map(|&(z, _, _)| log_g(z)).collect();

    check_truncation(&fw, &wpath, c.truncation_radius, "gamma_+")?;
    check_truncation(&gz, &zpath, c.truncation_radius, "gamma_-")?;

    let shift_w = fw.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let shift_z = gz.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let wvals: Vec<(Complex64, Complex64)> = wpath
        .iter()
        .zip(&fw)
        .map(|(&(w, dw, _), l)| (w, (l - shift_w).exp() * dw))
        .collect();

    let mut sum = Complex64::new(0.0, 0.0);
    for (&(z, dz, _), l) in zpath.iter().zip(&gz) {
        let gz = (l - shift_z).exp() * dz;
        let mut inner = Complex64::new(0.0, 0.0);
        for &(w, fw) in &wvals {
            inner += fw * (2.0 * w) / ((z - w) * (z + w));
        }
        sum += gz * inner;
    }
    // (2 pi i)^{-2} = -1 / (4 pi^2)
    let value = -sum * (shift_w + shift_z).exp() / (4.0 * PI * PI);
    let scale = value.re.abs().max(1.0);
    if value.im.abs() > 1e-8 * scale {
        return Err(Error::ImaginaryResidue {
            real: value.re,
            imag: value.im,
        });
    }

    let mut k = value.re;
    if q.tau2 > q.tau1 {
        let d = q.tau2 - q.tau1;
        k -= (-(st2 - st1).powi(2) / (4.0 * d)).exp() / (4.0 * PI * d).sqrt();
    }
    Ok(k)
}

fn check_truncation(logs: &[Complex64], path: &[(Complex64, Complex64, f64)], radius: f64, name: &str) -> Result<()> {
    let peak = logs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let edge = logs
        .iter()
        .zip(path)
        .filter(|(_, p)| p.2 > 0.95 * radius)
        .map(|(l, _)| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if edge - peak > (1e-14f64).ln() {
        return Err(Error::Truncation(format!(
            "{name}: integrand at radius {radius} is exp({:.1}) of its maximum",
            edge - peak
        )));
    }
    Ok(())
}
