//! Correlation kernels: the Airy₂→₁ kernel in contour and Airy form, the
//! exact finite-time TASEP kernel, and the Airy₁/Airy₂/GUE-minors comparison
//! kernels.

mod airy_form;
mod contour;
mod finite_time;
mod gue;

pub use airy_form::{
    airy1_extended, airy2_extended, k0_term, k1_a5, k1_a6, k1_term, k2_term, k_airy, Airy1Kernel, Airy21Kernel,
    Airy2Kernel,
};
pub use contour::{k_contour, ContourSpec};
pub use finite_time::{
    finite_time_kernel, rescaled_finite_kernel, rescaled_finite_kernel_hat, CircleContour, FiniteTimeKernel,
};
pub use gue::{gue_minors_kernel, GueMinorsKernel};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

/// A space-time argument pair `(tau1, s1; tau2, s2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelQuery {
    pub tau1: f64,
    pub s1: f64,
    pub tau2: f64,
    pub s2: f64,
}

impl KernelQuery {
    pub fn new(tau1: f64, s1: f64, tau2: f64, s2: f64) -> Self {
        KernelQuery { tau1, s1, tau2, s2 }
    }

    pub fn s_tilde1(&self) -> f64 {
        scaled_coords(self.tau1, self.s1).0
    }

    pub fn s_tilde2(&self) -> f64 {
        scaled_coords(self.tau2, self.s2).0
    }

    pub fn s_hat1(&self) -> f64 {
        scaled_coords(self.tau1, self.s1).1
    }

    pub fn s_hat2(&self) -> f64 {
        scaled_coords(self.tau2, self.s2).1
    }

    /// Log of the factor relating the two representations,
    /// `k_airy = k_contour * exp(conjugation_log)`, namely `c(tau1, s~1) - c(tau2, s~2)`
    /// with `c(tau, s~) = 2/3 tau^3 + tau s~`.
    pub fn conjugation_log(&self) -> f64 {
        conjugation_exponent(self.tau1, self.s_tilde1()) - conjugation_exponent(self.tau2, self.s_tilde2())
    }
}

pub(crate) fn conjugation_exponent(tau: f64, s_tilde: f64) -> f64 {
    2.0 / 3.0 * tau * tau * tau + tau * s_tilde
}

/// `(s - min(0, tau)^2, s + max(0, tau)^2)`.
pub fn scaled_coords(tau: f64, s: f64) -> (f64, f64) {
    let neg = tau.min(0.0);
    let pos = tau.max(0.0);
    (s - neg * neg, s + pos * pos)
}

/// The exponent functions `f0, f1, f2, f3` of the rescaled finite-time kernel,
/// principal branch throughout.
pub fn f_functions(v: Complex64) -> Result<[Complex64; 4]> {
    if v == Complex64::new(0.0, 0.0) || v == Complex64::new(-1.0, 0.0) {
        return Err(Error::Pole(format!("f-functions at v = {v}")));
    }
    let one = Complex64::new(1.0, 0.0);
    // Adding +0 maps a -0 imaginary part onto the upper side of the cut.
    let ln = |z: Complex64| Complex64::new(z.re, z.im + 0.0).ln();
    let f0 = -v + 0.25 * ln((one + v) / v);
    let f1 = -ln(-4.0 * v * (one + v));
    let f2 = -ln(2.0 * (one + v));
    let f3 = ln(one + v);
    Ok([f0, f1, f2, f3])
}

/// Scaling constants of the curved-density region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionScaling {
    pub alpha: f64,
    pub s_h: f64,
    pub s_v: f64,
}

impl RegionScaling {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("curved region needs 0 < alpha < 1, got {alpha}")));
        }
        let b = 2.0 - alpha.sqrt();
        Ok(RegionScaling {
            alpha,
            s_h: alpha.powf(-2.0 / 3.0) * b.powf(-1.0 / 3.0),
            s_v: alpha.powf(1.0 / 6.0) * b.powf(-2.0 / 3.0),
        })
    }
}

/// A kernel on `{times} x R` (or a lattice), evaluable pointwise and by block.
///
/// `block` returns the matrix `K(t1, xs[i]; t2, ys[j])`. The default fills it
/// entry by entry; kernels with a factorized structure override it.
pub trait Kernel: Sync {
    fn eval(&self, t1: f64, x: f64, t2: f64, y: f64) -> Result<f64>;

    fn block(&self, t1: f64, xs: &[f64], t2: f64, ys: &[f64], exec: Execution) -> Result<DMatrix<f64>> {
        let n = ys.len();
        let flat = exec.try_map_range(xs.len() * n, |idx| self.eval(t1, xs[idx / n], t2, ys[idx % n]))?;
        Ok(DMatrix::from_row_slice(xs.len(), n, &flat))
    }
}

impl<F> Kernel for F
where
    F: Fn(f64, f64, f64, f64) -> f64 + Sync,
{
    fn eval(&self, t1: f64, x: f64, t2: f64, y: f64) -> Result<f64> {
        Ok(self(t1, x, t2, y))
    }
}
