//! Nyström discretization of `det(1 - chi K chi)` on `{times} x R` (Gauss-Legendre
//! slices above each threshold) or `{labels} x Z` (integer slices below it).

mod process;

pub use process::{finite_time_cdf_table, process_cdf, process_cdf_with, Event, Process};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{scaled_coords, Kernel};
use crate::par::Execution;
use crate::special::{gauss_legendre, NodesWeights};

pub const DEFAULT_CUTOFF: f64 = 12.0;
const TAIL_RATIO: f64 = 1e-12;
const MAX_CUTOFF_DOUBLINGS: usize = 4;

/// How each slice is discretized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    /// `n` Gauss-Legendre nodes on `[s_k, s_k + cutoff]`.
    GaussLegendre { nodes: usize },
    /// The integers in `[max(floor_k, a_k - window), a_k - 1]`, weight one.
    Lattice { window: i64, floors: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub times: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub cutoff: f64,
    pub scheme: Scheme,
    pub slices: Vec<NodesWeights>,
}

fn check_times(times: &[f64], thresholds: &[f64]) -> Result<()> {
    if times.is_empty() || times.len() != thresholds.len() {
        return Err(Error::Contract(format!(
            "need one threshold per time, got {} times and {} thresholds",
            times.len(),
            thresholds.len()
        )));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Contract(format!("times must be strictly increasing: {times:?}")));
    }
    if times.iter().chain(thresholds).any(|v| !v.is_finite()) {
        return Err(Error::Contract("times and thresholds must be finite".into()));
    }
    Ok(())
}

impl QuadratureGrid {
    pub fn gauss_legendre(times: &[f64], thresholds: &[f64], cutoff: f64, nodes: usize) -> Result<Self> {
        check_times(times, thresholds)?;
        if !(cutoff > 0.0) || nodes == 0 {
            return Err(Error::Contract(format!(
                "cutoff {cutoff} and node count {nodes} must be positive"
            )));
        }
        let slices = thresholds
            .iter()
            .map(|&s| gauss_legendre(nodes, s, s + cutoff))
            .collect::<Result<Vec<_>>>()?;
        Ok(QuadratureGrid {
            times: times.to_vec(),
            thresholds: thresholds.to_vec(),
            cutoff,
            scheme: Scheme::GaussLegendre { nodes },
            slices,
        })
    }

    /// Integer slices below integer thresholds `a_k`. Sites under `floors[k]`
    /// are assumed to carry zero kernel rows.
    pub fn lattice(times: &[f64], thresholds: &[f64], window: i64, floors: &[i64]) -> Result<Self> {
        check_times(times, thresholds)?;
        if window < 1 || floors.len() != times.len() {
            return Err(Error::Contract(
                "lattice grid needs window >= 1 and one floor per slice".into(),
            ));
        }
        if thresholds.iter().any(|a| a.fract() != 0.0) {
            return Err(Error::Contract(format!(
                "lattice thresholds must be integers: {thresholds:?}"
            )));
        }
        let slices = thresholds
            .iter()
            .zip(floors)
            .map(|(&a, &floor)| {
                let a = a as i64;
                let lo = floor.max(a - window);
                let nodes: Vec<f64> = (lo..a).map(|x| x as f64).collect();
                NodesWeights {
                    weights: vec![1.0; nodes.len()],
                    nodes,
                    interval: (lo as f64, (a - 1) as f64),
                }
            })
            .collect();
        Ok(QuadratureGrid {
            times: times.to_vec(),
            thresholds: thresholds.to_vec(),
            cutoff: window as f64,
            scheme: Scheme::Lattice {
                window,
                floors: floors.to_vec(),
            },
            slices,
        })
    }

    pub fn grid_nodes(&self) -> usize {
        self.slices.iter().map(|s| s.len()).sum()
    }

    /// Twice the nodes (continuous) or twice the window (lattice).
    pub fn refined(&self) -> Result<Self> {
        match &self.scheme {
            Scheme::GaussLegendre { nodes } => {
                Self::gauss_legendre(&self.times, &self.thresholds, self.cutoff, 2 * nodes)
            }
            Scheme::Lattice { window, floors } => Self::lattice(&self.times, &self.thresholds, 2 * window, floors),
        }
    }

    fn with_cutoff(&self, cutoff: f64) -> Result<Self> {
        match &self.scheme {
            Scheme::GaussLegendre { nodes } => Self::gauss_legendre(&self.times, &self.thresholds, cutoff, *nodes),
            Scheme::Lattice { .. } => Ok(self.clone()),
        }
    }

    /// Whether every lattice slice already reaches its floor.
    fn is_complete(&self) -> bool {
        match &self.scheme {
            Scheme::GaussLegendre { .. } => false,
            Scheme::Lattice { window, floors } => self
                .thresholds
                .iter()
                .zip(floors)
                .all(|(&a, &f)| a as i64 - window <= f),
        }
    }
}

/// Diagonal similarity applied before taking the determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conjugation {
    #[default]
    None,
    /// `(1 + x^2)^{2k} e^{tau x + 2/3 tau^3}` in the shifted coordinate `x = s~`.
    Weighted,
    /// `e^{-tau s^}` for `tau > 0` and 1 otherwise, which removes the
    /// exponential factor of the closed-form part of the Airy₂→₁ kernel. At
    /// negative times that part is absent and the factor would only grow.
    Exponential,
}

/// `(1 + x^2)^{2k} e^{tau x + 2/3 tau^3}` for slice `k >= 1`.
pub fn conjugation_weight(k: usize, tau: f64, x: f64) -> Result<f64> {
    let log = log_weight(k, tau, x)?;
    if log > 700.0 {
        return Err(Error::Overflow(format!(
            "conjugation weight exp({log:.1}) at k={k}, tau={tau}, x={x}"
        )));
    }
    Ok(log.exp())
}

fn log_weight(k: usize, tau: f64, x: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Contract("slice index starts at 1".into()));
    }
    Ok(2.0 * k as f64 * (x * x).ln_1p() + tau * x + 2.0 / 3.0 * tau.powi(3))
}

fn log_conjugation(conj: Conjugation, k: usize, tau: f64, s: f64) -> Result<f64> {
    let (st, sh) = scaled_coords(tau, s);
    match conj {
        Conjugation::None => Ok(0.0),
        Conjugation::Weighted => log_weight(k + 1, tau, st),
        Conjugation::Exponential => Ok(-tau.max(0.0) * sh),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FredholmResult {
    pub value: f64,
    pub error_estimate: f64,
    pub grid_nodes: usize,
    pub cutoff: f64,
}

/// `sqrt(w_i w_j) D(k, x_i) K(tau_k, x_i; tau_l, x_j) / D(l, x_j)` over all slice pairs.
pub fn assemble(
    kernel: &dyn Kernel,
    grid: &QuadratureGrid,
    conj: Conjugation,
    exec: Execution,
) -> Result<DMatrix<f64>> {
    let m = grid.times.len();
    let offsets: Vec<usize> = grid
        .slices
        .iter()
        .scan(0, |acc, s| {
            let o = *acc;
            *acc += s.len();
            Some(o)
        })
        .collect();
    let total = grid.grid_nodes();
    let logs: Vec<Vec<f64>> = grid
        .slices
        .iter()
        .enumerate()
        .map(|(k, s)| {
            s.nodes
                .iter()
                .map(|&x| log_conjugation(conj, k, grid.times[k], x))
                .collect()
        })
        .collect::<Result<_>>()?;

    let blocks = exec.try_map_range(m * m, |idx| {
        let (k, l) = (idx / m, idx % m);
        let (a, b) = (&grid.slices[k], &grid.slices[l]);
        if a.is_empty() || b.is_empty() {
            return Ok(DMatrix::zeros(a.len(), b.len()));
        }
        let mut blk = kernel.block(grid.times[k], &a.nodes, grid.times[l], &b.nodes, exec)?;
        for i in 0..a.len() {
            for j in 0..b.len() {
                let scale = (a.weights[i] * b.weights[j]).sqrt() * (logs[k][i] - logs[l][j]).exp();
                blk[(i, j)] *= scale;
            }
        }
        Ok::<_, Error>(blk)
    })?;

    let mut out = DMatrix::zeros(total, total);
    for (idx, blk) in blocks.into_iter().enumerate() {
        let (k, l) = (idx / m, idx % m);
        out.view_mut((offsets[k], offsets[l]), blk.shape()).copy_from(&blk);
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow("non-finite entry in the discretized kernel".into()));
    }
    Ok(out)
}

/// `det(1 - M)` by partial-pivoting LU.
pub fn det_identity_minus(m: DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 1.0;
    }
    (DMatrix::identity(n, n) - m).lu().determinant()
}

/// The determinant on a fixed grid.
pub fn det_on_grid(kernel: &dyn Kernel, grid: &QuadratureGrid, conj: Conjugation, exec: Execution) -> Result<f64> {
    Ok(det_identity_minus(assemble(kernel, grid, conj, exec)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FredholmOptions {
    pub conjugation: Conjugation,
    pub tol: f64,
    /// Upper bound on nodes per slice (continuous) or window width (lattice).
    pub max_resolution: usize,
    pub exec: Execution,
}

impl Default for FredholmOptions {
    fn default() -> Self {
        FredholmOptions {
            conjugation: Conjugation::None,
            tol: 1e-10,
            max_resolution: 512,
            exec: Execution::Parallel,
        }
    }
}

/// Doubles the cutoff until the kernel diagonal at `s_k + L` is negligible
/// against its maximum on each slice.
fn extend_cutoff(kernel: &dyn Kernel, grid: QuadratureGrid) -> Result<QuadratureGrid> {
    if !matches!(grid.scheme, Scheme::GaussLegendre { .. }) {
        return Ok(grid);
    }
    let mut grid = grid;
    for _ in 0..=MAX_CUTOFF_DOUBLINGS {
        let mut ok = true;
        for (k, slice) in grid.slices.iter().enumerate() {
            let tau = grid.times[k];
            let peak = slice
                .nodes
                .iter()
                .map(|&x| kernel.eval(tau, x, tau, x).map(f64::abs))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let end = grid.thresholds[k] + grid.cutoff;
            let edge = kernel.eval(tau, end, tau, end)?.abs();
            if edge > TAIL_RATIO * peak {
                ok = false;
            }
        }
        if ok {
            return Ok(grid);
        }
        grid = grid.with_cutoff(2.0 * grid.cutoff)?;
    }
    Err(Error::Truncation(format!(
        "kernel diagonal still above tail ratio at cutoff {}",
        grid.cutoff
    )))
}

fn resolution(grid: &QuadratureGrid) -> usize {
    match grid.scheme {
        Scheme::GaussLegendre { nodes } => nodes,
        Scheme::Lattice { window, .. } => window as usize,
    }
}

/// Determinant with refinement: doubles the resolution until two successive
/// values agree within `opts.tol`. The reported value is the finer one.
pub fn fredholm_det(kernel: &dyn Kernel, grid: &QuadratureGrid, opts: &FredholmOptions) -> Result<FredholmResult> {
    let mut coarse = extend_cutoff(kernel, grid.clone())?;
    let mut prev = None;
    loop {
        let fine = coarse.refined()?;
        let (before, value) = match coarse.scheme {
            Scheme::Lattice { .. } => {
                // The coarse sites are a subset of the fine ones.
                let m = assemble(kernel, &fine, opts.conjugation, opts.exec)?;
                let keep = nested_indices(&coarse, &fine);
                let sub = m.select_rows(&keep).select_columns(&keep);
                (det_identity_minus(sub), det_identity_minus(m))
            }
            Scheme::GaussLegendre { .. } => {
                let before = match prev {
                    Some(v) => v,
                    None => det_on_grid(kernel, &coarse, opts.conjugation, opts.exec)?,
                };
                (before, det_on_grid(kernel, &fine, opts.conjugation, opts.exec)?)
            }
        };
        let err = (value - before).abs();
        if err <= opts.tol {
            return Ok(FredholmResult {
                value,
                error_estimate: err,
                grid_nodes: fine.grid_nodes(),
                cutoff: fine.cutoff,
            });
        }
        if resolution(&fine) >= opts.max_resolution && !fine.is_complete() {
            return Err(Error::NonConvergence {
                last: value,
                previous: before,
            });
        }
        coarse = fine;
        prev = Some(value);
    }
}

/// Positions in `fine` of the nodes of `coarse`, slice by slice.
fn nested_indices(coarse: &QuadratureGrid, fine: &QuadratureGrid) -> Vec<usize> {
    let mut keep = Vec::new();
    let mut offset = 0;
    for (c, f) in coarse.slices.iter().zip(&fine.slices) {
        for (i, x) in f.nodes.iter().enumerate() {
            if c.nodes.first().is_some_and(|&lo| *x >= lo) {
                keep.push(offset + i);
            }
        }
        offset += f.len();
    }
    keep
}
