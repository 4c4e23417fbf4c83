//! Macroscopic profile and the fluctuation rescalings of the four regions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Limit particle density at macroscopic position `xi = x / t`.
pub fn macro_density(xi: f64) -> f64 {
    if xi < 0.0 {
        0.5
    } else if xi <= 1.0 {
        0.5 * (1.0 - xi)
    } else {
        0.0
    }
}

/// Limit position (divided by `t`) of particle number `(1/4 + a) t`.
pub fn macro_position(a: f64) -> Result<f64> {
    if !(a >= -0.25) {
        return Err(Error::Domain(format!("macro_position needs a >= -1/4, got {a}")));
    }
    Ok(if a <= 0.0 {
        1.0 - (1.0 + 4.0 * a).sqrt()
    } else {
        -2.0 * a
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum RegimeSpec {
    GueMinors,
    Airy2 { alpha: f64 },
    Transition,
    Airy1 { alpha: f64 },
}

impl RegimeSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RegimeSpec::Airy2 { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                Err(Error::Domain(format!("airy2 regime needs 0 < alpha < 1, got {alpha}")))
            }
            RegimeSpec::Airy1 { alpha } if !(alpha > 1.0 && alpha.is_finite()) => {
                Err(Error::Domain(format!("airy1 regime needs alpha > 1, got {alpha}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegimeSpec::GueMinors => "gue_minors",
            RegimeSpec::Airy2 { .. } => "airy2",
            RegimeSpec::Transition => "transition",
            RegimeSpec::Airy1 { .. } => "airy1",
        }
    }

    /// `A` in `X_t(tau) -> A * L(T(tau))` for the regime's standard limit `L`.
    pub fn limit_amplitude(&self) -> f64 {
        match *self {
            RegimeSpec::Airy2 { alpha } => (2.0 - alpha.sqrt()).powf(2.0 / 3.0) / alpha.powf(1.0 / 6.0),
            RegimeSpec::Airy1 { .. } => 2f64.cbrt(),
            _ => 1.0,
        }
    }

    /// `T(tau)` in `X_t(tau) -> A * L(T(tau))`.
    pub fn limit_time(&self, tau: f64) -> f64 {
        match *self {
            RegimeSpec::Airy2 { alpha } => tau * alpha.powf(2.0 / 3.0) * (2.0 - alpha.sqrt()).cbrt(),
            RegimeSpec::Airy1 { .. } => 2f64.powf(2.0 / 3.0) * tau,
            _ => tau,
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// Particle label observed at `tau` (for [`RegimeSpec::GueMinors`], `tau` is
/// the label itself).
pub fn index_for(spec: RegimeSpec, tau: f64, t: f64) -> Result<u64> {
    spec.validate()?;
    check_time(t)?;
    let c2 = (0.5 * t).powf(2.0 / 3.0);
    let n = match spec {
        RegimeSpec::GueMinors => {
            if tau.fract() != 0.0 {
                return Err(Error::Domain(format!("gue_minors index must be an integer, got {tau}")));
            }
            tau
        }
        RegimeSpec::Transition => (t / 4.0 + tau * c2 + 1e-9).floor(),
        RegimeSpec::Airy2 { alpha } | RegimeSpec::Airy1 { alpha } => (alpha * t / 4.0 + tau * c2 + 1e-9).floor(),
    };
    if n < 1.0 {
        return Err(Error::Domain(format!("index {n} < 1 for tau = {tau}, t = {t}")));
    }
    Ok(n as u64)
}

/// Centered and scaled position of particle `index_for(spec, tau, t)`.
pub fn rescale(spec: RegimeSpec, x: i64, tau: f64, t: f64) -> Result<f64> {
    spec.validate()?;
    check_time(t)?;
    let x = x as f64;
    let c = (0.5 * t).cbrt();
    Ok(match spec {
        RegimeSpec::GueMinors => (x - t) / -(2.0 * t).sqrt(),
        RegimeSpec::Transition => {
            let neg = tau.min(0.0);
            (x - (-2.0 * tau * c * c + neg * neg * c)) / -c
        }
        RegimeSpec::Airy2 { alpha } => {
            let centre = (1.0 - alpha.sqrt()) * t - 2.0 * tau * c * c / alpha.sqrt() + tau * tau * alpha.powf(-1.5) * c;
            (x - centre) / -c
        }
        RegimeSpec::Airy1 { alpha } => (x - ((1.0 - alpha) * t / 2.0 - 2.0 * tau * c * c)) / -c,
    })
}

/// [`rescale`] divided by the limit amplitude, so the target law is the
/// standard one at time [`RegimeSpec::limit_time`].
pub fn rescale_normalized(spec: RegimeSpec, x: i64, tau: f64, t: f64) -> Result<f64> {
    Ok(rescale(spec, x, tau, t)? / spec.limit_amplitude())
}
