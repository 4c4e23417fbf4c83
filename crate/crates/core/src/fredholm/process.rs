use serde::{Deserialize, Serialize};

use super::{
    det_identity_minus, fredholm_det, Conjugation, FredholmOptions, FredholmResult, QuadratureGrid, DEFAULT_CUTOFF,
};
use crate::error::{Error, Result};
use crate::kernels::{Airy1Kernel, Airy21Kernel, Airy2Kernel, FiniteTimeKernel, GueMinorsKernel, Kernel};
use crate::par::Execution;

const START_NODES: usize = 16;
const START_WINDOW: i64 = 32;

/// A process whose finite-dimensional laws are Fredholm determinants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Process {
    Airy21,
    Airy1,
    Airy2,
    /// Particle positions at time `t` from `x_k(0) = -2k`; "times" are particle labels.
    FiniteTime {
        t: f64,
    },
    /// "Times" are the minor sizes `n`.
    GueMinors,
}

/// Which joint event the determinant computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    /// `P(X(tau_k) <= s_k for all k)`: cut `x > s_k`.
    AtMost,
    /// `P(x_{n_k}(t) >= a_k for all k)`: cut `x < a_k` on the lattice.
    AtLeast,
}

impl Process {
    pub fn event(&self) -> Event {
        match self {
            Process::FiniteTime { .. } => Event::AtLeast,
            _ => Event::AtMost,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Process::Airy21 => "airy21",
            Process::Airy1 => "airy1",
            Process::Airy2 => "airy2",
            Process::FiniteTime { .. } => "finite_time",
            Process::GueMinors => "gue_minors",
        }
    }

    fn conjugation(&self) -> Conjugation {
        match self {
            Process::Airy21 => Conjugation::Exponential,
            _ => Conjugation::None,
        }
    }
}

fn integer_labels(times: &[f64], what: &str) -> Result<()> {
    if times.iter().any(|&n| !(n >= 1.0 && n.fract() == 0.0)) {
        return Err(Error::Contract(format!(
            "{what} must be positive integers, got {times:?}"
        )));
    }
    Ok(())
}

/// [`process_cdf_with`] on the default execution mode.
pub fn process_cdf(process: Process, times: &[f64], levels: &[f64], tol: f64) -> Result<FredholmResult> {
    process_cdf_with(process, times, levels, tol, Execution::default())
}

/// The joint law of `process` at `times`, as declared by [`Process::event`]:
/// `P(X(tau_k) <= s_k, all k)` for the continuous processes and
/// `P(x_{n_k}(t) >= a_k, all k)` for [`Process::FiniteTime`].
pub fn process_cdf_with(
    process: Process,
    times: &[f64],
    levels: &[f64],
    tol: f64,
    exec: Execution,
) -> Result<FredholmResult> {
    if !(tol >= 1e-8) {
        return Err(Error::Contract(format!("tolerance must be at least 1e-8, got {tol}")));
    }
    let opts = FredholmOptions {
        conjugation: process.conjugation(),
        tol,
        exec,
        ..FredholmOptions::default()
    };
    let continuous = |kernel: &dyn Kernel| {
        let grid = QuadratureGrid::gauss_legendre(times, levels, DEFAULT_CUTOFF, START_NODES)?;
        fredholm_det(kernel, &grid, &opts)
    };
    match process {
        Process::Airy21 => continuous(&Airy21Kernel),
        Process::Airy2 => continuous(&Airy2Kernel),
        Process::Airy1 => continuous(&Airy1Kernel),
        Process::GueMinors => {
            integer_labels(times, "GUE-minors levels")?;
            continuous(&GueMinorsKernel)
        }
        Process::FiniteTime { t } => {
            if !(t > 0.0) {
                return Err(Error::Domain(format!("time must be positive, got {t}")));
            }
            integer_labels(times, "particle labels")?;
            let thresholds: Vec<f64> = levels.iter().map(|a| a.ceil()).collect();
            let floors: Vec<i64> = times.iter().map(|&n| -2 * n as i64).collect();
            let grid = QuadratureGrid::lattice(times, &thresholds, START_WINDOW, &floors)?;
            let opts = FredholmOptions {
                max_resolution: usize::MAX,
                ..opts
            };
            fredholm_det(&FiniteTimeKernel::new(t), &grid, &opts)
        }
    }
}

/// `P(x_n(t) >= a)` for many thresholds `a`, sharing one kernel evaluation on
/// `[-2n, max a - 1]`.
pub fn finite_time_cdf_table(t: f64, n: u64, levels: &[i64], tol: f64, exec: Execution) -> Result<Vec<FredholmResult>> {
    if n == 0 || !(t > 0.0) {
        return Err(Error::Domain(format!("need n >= 1 and t > 0, got n = {n}, t = {t}")));
    }
    let floor = -2 * n as i64;
    let Some(&top) = levels.iter().max() else {
        return Ok(Vec::new());
    };
    let sites: Vec<f64> = (floor..top.max(floor)).map(|x| x as f64).collect();
    let kernel = FiniteTimeKernel::new(t);
    let full = if sites.is_empty() {
        nalgebra::DMatrix::zeros(0, 0)
    } else {
        kernel.block(n as f64, &sites, n as f64, &sites, exec)?
    };

    let det_from = |lo: i64, a: i64| {
        let (i0, i1) = ((lo - floor) as usize, (a - floor).max(0) as usize);
        if i1 <= i0 {
            return 1.0;
        }
        det_identity_minus(full.view((i0, i0), (i1 - i0, i1 - i0)).into_owned())
    };
    let results = exec.map_range(levels.len(), |i| {
        let a = levels[i];
        let mut window = START_WINDOW;
        let mut prev = det_from(floor.max(a - window), a);
        loop {
            window *= 2;
            let lo = floor.max(a - window);
            let value = det_from(lo, a);
            let err = (value - prev).abs();
            if err <= tol || lo == floor {
                return FredholmResult {
                    value,
                    error_estimate: err,
                    grid_nodes: (a - lo).max(0) as usize,
                    cutoff: window as f64,
                };
            }
            prev = value;
        }
    });
    Ok(results)
}
