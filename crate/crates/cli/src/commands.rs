use std::collections::BTreeMap;

use tasep_core::fredholm::{finite_time_cdf_table, process_cdf_with, Event, FredholmResult, Process};
use tasep_core::scaling::{index_for, rescale};
use tasep_core::sim::{sample_positions, InitialCondition, SimConfig};
use tasep_core::stats::{ks_distance_with_left_limits, EmpiricalDistribution};
use tasep_core::Execution;

use crate::config::{limit_process, CommandKind, ExperimentConfig, Interpolation, UsageError};
use crate::io::{self, DataFile, ReportRow, SampleRow, TableRow};

#[derive(Debug)]
pub enum RunError {
    Usage(UsageError),
    /// A module error or a violated numerical invariant.
    Numerical(String),
    Io(String),
}

impl From<UsageError> for RunError {
    fn from(e: UsageError) -> Self {
        RunError::Usage(e)
    }
}

impl From<tasep_core::Error> for RunError {
    fn from(e: tasep_core::Error) -> Self {
        RunError::Numerical(e.to_string())
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Numerical(_) | RunError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Usage(_) => "usage",
            RunError::Numerical(_) => "numerical",
            RunError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> String {
        match self {
            RunError::Usage(e) => e.0.clone(),
            RunError::Numerical(m) | RunError::Io(m) => m.clone(),
        }
    }
}

pub fn save<R: io::Row>(file: &DataFile<R>) -> Result<(), RunError> {
    io::write_atomic(&file.config.output, &io::render(file))
        .map_err(|e| RunError::Io(format!("cannot write {}: {e}", file.config.output.display())))
}

/// One-point CDF rows `(tau, s)` for every `tau` and `s`, checked for range
/// and monotonicity in `s`.
pub fn tabulate(cfg: &ExperimentConfig) -> Result<DataFile<TableRow>, RunError> {
    let process = cfg
        .process
        .ok_or_else(|| UsageError("tabulate needs `process`".into()))?;
    let tol = cfg.tol.unwrap_or(crate::config::DEFAULT_TOL);
    let exec = cfg.execution;
    let mut rows = Vec::with_capacity(cfg.taus.len() * cfg.s_grid.len());
    for &tau in &cfg.taus {
        let results: Vec<FredholmResult> = match process {
            Process::FiniteTime { t } => {
                let levels: Vec<i64> = cfg.s_grid.iter().map(|&s| s as i64).collect();
                finite_time_cdf_table(t, tau as u64, &levels, tol, exec)?
            }
            _ => exec.try_map_range(cfg.s_grid.len(), |i| {
                process_cdf_with(process, &[tau], &[cfg.s_grid[i]], tol, Execution::Sequential)
            })?,
        };
        for (&s, r) in cfg.s_grid.iter().zip(&results) {
            rows.push(TableRow {
                tau,
                s,
                cdf: r.value,
                err: r.error_estimate,
            });
        }
    }
    check_table(process.event(), &rows, tol)?;
    Ok(DataFile {
        config: cfg.clone(),
        rows,
    })
}

fn check_table(event: Event, rows: &[TableRow], tol: f64) -> Result<(), RunError> {
    let mut by_tau: BTreeMap<u64, Vec<&TableRow>> = BTreeMap::new();
    for r in rows {
        by_tau.entry(r.tau.to_bits()).or_default().push(r);
    }
    for group in by_tau.values_mut() {
        group.sort_by(|a, b| a.s.total_cmp(&b.s));
        for r in group.iter() {
            let slack = 2.0 * tol + r.err;
            if !(r.cdf >= -slack && r.cdf <= 1.0 + slack) {
                return Err(RunError::Numerical(format!(
                    "cdf {} out of [0, 1] at tau = {}, s = {}",
                    r.cdf, r.tau, r.s
                )));
            }
        }
        for w in group.windows(2) {
            let slack = 2.0 * tol + w[0].err + w[1].err;
            let rise = match event {
                Event::AtMost => w[1].cdf - w[0].cdf,
                Event::AtLeast => w[0].cdf - w[1].cdf,
            };
            if rise < -slack {
                return Err(RunError::Numerical(format!(
                    "cdf not monotone at tau = {} between s = {} and s = {}",
                    w[0].tau, w[0].s, w[1].s
                )));
            }
        }
    }
    Ok(())
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<DataFile<SampleRow>, RunError> {
    let missing = |f: &str| RunError::Usage(UsageError(format!("simulate needs `{f}`")));
    let regime = cfg.regime.ok_or_else(|| missing("regime"))?;
    let t = cfg.t.ok_or_else(|| missing("t"))?;
    let replicas = cfg.replicas.ok_or_else(|| missing("replicas"))?;
    let indices = cfg
        .taus
        .iter()
        .map(|&tau| index_for(regime, tau, t))
        .collect::<Result<Vec<_>, _>>()?;
    let sim = SimConfig {
        ic: InitialCondition::TwoPeriodic,
        n_particles: cfg.n_particles.unwrap_or(0),
        horizon: t,
        seed: cfg.seed.unwrap_or(crate::config::DEFAULT_SEED),
        coupling: false,
    };
    let raw = sample_positions(&sim, &indices, replicas, cfg.execution)?;
    let mut rows = Vec::with_capacity(raw.len() * indices.len());
    for (replica, xs) in raw.iter().enumerate() {
        for ((&tau, &n), &x) in cfg.taus.iter().zip(&indices).zip(xs) {
            rows.push(SampleRow {
                replica: replica as u32,
                tau,
                n,
                x_raw: x,
                x_rescaled: rescale(regime, x, tau, t)?,
            });
        }
    }
    Ok(DataFile {
        config: cfg.clone(),
        rows,
    })
}

/// A tabulated CDF in `s`, read between grid points by `mode`.
struct TableCdf {
    s: Vec<f64>,
    cdf: Vec<f64>,
    mode: Interpolation,
}

impl TableCdf {
    fn at(&self, x: f64) -> f64 {
        let i = self.s.partition_point(|&s| s <= x);
        match self.mode {
            Interpolation::Step => {
                if i == 0 {
                    0.0
                } else {
                    self.cdf[i - 1]
                }
            }
            Interpolation::Linear => {
                if i == 0 {
                    self.cdf[0]
                } else if i == self.s.len() {
                    self.cdf[i - 1]
                } else {
                    let w = (x - self.s[i - 1]) / (self.s[i] - self.s[i - 1]);
                    self.cdf[i - 1] + w * (self.cdf[i] - self.cdf[i - 1])
                }
            }
        }
    }

    fn left(&self, x: f64) -> f64 {
        match self.mode {
            Interpolation::Linear => self.at(x),
            Interpolation::Step => {
                let i = self.s.partition_point(|&s| s < x);
                if i == 0 {
                    0.0
                } else {
                    self.cdf[i - 1]
                }
            }
        }
    }
}

/// KS distance per observed `tau` between the samples and the table at the
/// matching limit time.
pub fn compare(cfg: &ExperimentConfig) -> Result<DataFile<ReportRow>, RunError> {
    let missing = |f: &str| RunError::Usage(UsageError(format!("compare needs `{f}`")));
    let samples: DataFile<SampleRow> = io::read(cfg.samples.as_deref().ok_or_else(|| missing("samples"))?)?;
    let table: DataFile<TableRow> = io::read(cfg.table.as_deref().ok_or_else(|| missing("table"))?)?;
    if samples.config.command != CommandKind::Simulate || table.config.command != CommandKind::Tabulate {
        return Err(UsageError("compare needs a simulate output and a tabulate output".into()).into());
    }
    let regime = samples
        .config
        .regime
        .ok_or_else(|| UsageError("sample file config has no regime".into()))?;
    let process = table
        .config
        .process
        .ok_or_else(|| UsageError("table file config has no process".into()))?;
    if limit_process(regime) != process {
        return Err(UsageError(format!(
            "regime {} is compared against {}, but the table is for {}",
            regime.name(),
            limit_process(regime).name(),
            process.name()
        ))
        .into());
    }
    let threshold = cfg.threshold.unwrap_or(crate::config::DEFAULT_THRESHOLD);
    let mode = cfg.interpolation.unwrap_or_default();

    let mut taus: Vec<(f64, u64)> = Vec::new();
    for r in &samples.rows {
        if !taus.iter().any(|&(t, _)| t.to_bits() == r.tau.to_bits()) {
            taus.push((r.tau, r.n));
        }
    }
    let mut rows = Vec::with_capacity(taus.len());
    for (tau, n) in taus {
        let xs: Vec<f64> = samples
            .rows
            .iter()
            .filter(|r| r.tau.to_bits() == tau.to_bits())
            .map(|r| r.x_rescaled / regime.limit_amplitude())
            .collect();
        let target = regime.limit_time(tau);
        let mut grid: Vec<(f64, f64)> = table
            .rows
            .iter()
            .filter(|r| (r.tau - target).abs() <= 1e-9 * target.abs().max(1.0))
            .map(|r| (r.s, r.cdf))
            .collect();
        if grid.is_empty() {
            return Err(UsageError(format!("table has no rows at tau = {target}")).into());
        }
        grid.sort_by(|a, b| a.0.total_cmp(&b.0));
        let cdf = TableCdf {
            s: grid.iter().map(|g| g.0).collect(),
            cdf: grid.iter().map(|g| g.1).collect(),
            mode,
        };
        let replicas = xs.len();
        let d = EmpiricalDistribution::new(xs)?;
        let ks = ks_distance_with_left_limits(&d, |x| cdf.at(x), |x| cdf.left(x));
        rows.push(ReportRow {
            tau,
            n,
            replicas,
            ks,
            threshold,
            passed: ks <= threshold,
        });
    }
    Ok(DataFile {
        config: cfg.clone(),
        rows,
    })
}
