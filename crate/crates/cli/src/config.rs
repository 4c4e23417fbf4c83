use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tasep_core::fredholm::Process;
use tasep_core::scaling::{index_for, RegimeSpec};
use tasep_core::Execution;

/// A configuration problem, reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Tabulate,
    Simulate,
    Compare,
}

/// How a table is read between its grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Linear,
    /// Right-continuous steps, exact for tables of empirical or lattice laws.
    Step,
}

/// The declarative description of one run. Output files embed the resolved
/// form, with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<Process>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<RegimeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Times, or particle labels for `finite_time` and `gue_minors`.
    #[serde(default)]
    pub taus: Vec<f64>,
    #[serde(default)]
    pub s_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_particles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<Interpolation>,
    #[serde(default)]
    pub execution: Execution,
    pub output: PathBuf,
}

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_THRESHOLD: f64 = 0.05;

fn require<T: Clone>(v: &Option<T>, name: &str, cmd: CommandKind) -> Result<T, UsageError> {
    v.clone()
        .ok_or_else(|| UsageError(format!("{cmd:?} needs `{name}`").to_lowercase()))
}

fn forbid<T>(v: &Option<T>, name: &str, cmd: CommandKind) -> Result<(), UsageError> {
    match v {
        Some(_) => Err(UsageError(format!("`{name}` does not apply to {cmd:?}").to_lowercase())),
        None => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn empty(command: CommandKind) -> Self {
        ExperimentConfig {
            command,
            process: None,
            regime: None,
            t: None,
            taus: Vec::new(),
            s_grid: Vec::new(),
            replicas: None,
            seed: None,
            n_particles: None,
            tol: None,
            samples: None,
            table: None,
            threshold: None,
            interpolation: None,
            execution: Execution::default(),
            output: PathBuf::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, UsageError> {
        serde_json::from_str(text).map_err(|e| UsageError(format!("bad config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Checks the fields `command` needs and fills in defaults.
    pub fn resolve(mut self) -> Result<Self, UsageError> {
        let cmd = self.command;
        if self.output.as_os_str().is_empty() {
            return Err(UsageError("missing `output`".into()));
        }
        let finite = |v: f64| v.is_finite();
        match cmd {
            CommandKind::Tabulate => {
                let process = require(&self.process, "process", cmd)?;
                forbid(&self.regime, "regime", cmd)?;
                forbid(&self.replicas, "replicas", cmd)?;
                forbid(&self.samples, "samples", cmd)?;
                if self.taus.is_empty() {
                    return Err(UsageError("empty tau list".into()));
                }
                if self.s_grid.is_empty() {
                    return Err(UsageError("empty s grid".into()));
                }
                if !self.taus.iter().chain(&self.s_grid).copied().all(finite) {
                    return Err(UsageError("non-finite tau or s".into()));
                }
                if matches!(process, Process::FiniteTime { .. } | Process::GueMinors)
                    && self.taus.iter().any(|&n| !(n >= 1.0 && n.fract() == 0.0))
                {
                    return Err(UsageError(format!(
                        "{} labels must be positive integers",
                        process.name()
                    )));
                }
                if let Process::FiniteTime { t } = process {
                    if !(t > 0.0 && t.is_finite()) {
                        return Err(UsageError(format!("finite_time needs t > 0, got {t}")));
                    }
                    if self.s_grid.iter().any(|s| s.fract() != 0.0) {
                        return Err(UsageError("finite_time levels must be integers".into()));
                    }
                }
                let tol = self.tol.unwrap_or(DEFAULT_TOL);
                if !(tol >= 1e-8) {
                    return Err(UsageError(format!("tol must be >= 1e-8, got {tol}")));
                }
                self.tol = Some(tol);
            }
            CommandKind::Simulate => {
                let regime = require(&self.regime, "regime", cmd)?;
                let t = require(&self.t, "t", cmd)?;
                forbid(&self.process, "process", cmd)?;
                regime.validate().map_err(|e| UsageError(e.to_string()))?;
                if !(t > 0.0 && t.is_finite()) {
                    return Err(UsageError(format!("t must be positive, got {t}")));
                }
                if self.taus.is_empty() {
                    return Err(UsageError("empty tau list".into()));
                }
                let mut top = 0;
                for &tau in &self.taus {
                    top = top.max(index_for(regime, tau, t).map_err(|e| UsageError(e.to_string()))?);
                }
                let n = self.n_particles.unwrap_or(top as usize);
                if (n as u64) < top {
                    return Err(UsageError(format!(
                        "n_particles = {n} is below the largest observed label {top}"
                    )));
                }
                let replicas = require(&self.replicas, "replicas", cmd)?;
                if replicas == 0 {
                    return Err(UsageError("replicas must be positive".into()));
                }
                self.n_particles = Some(n);
                self.seed = Some(self.seed.unwrap_or(DEFAULT_SEED));
            }
            CommandKind::Compare => {
                require(&self.samples, "samples", cmd)?;
                require(&self.table, "table", cmd)?;
                forbid(&self.process, "process", cmd)?;
                forbid(&self.regime, "regime", cmd)?;
                let threshold = self.threshold.unwrap_or(DEFAULT_THRESHOLD);
                if !(0.0..=1.0).contains(&threshold) {
                    return Err(UsageError(format!("threshold must lie in [0, 1], got {threshold}")));
                }
                self.threshold = Some(threshold);
                self.interpolation = Some(self.interpolation.unwrap_or_default());
            }
        }
        Ok(self)
    }
}

/// `a:b:step` (inclusive of `b` up to rounding) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, UsageError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| UsageError(format!("bad number `{s}` in grid `{text}`")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || !(b >= a) {
                return Err(UsageError(format!("grid `{text}` needs a <= b and step > 0")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|i| a + step * i as f64).collect())
        }
        [_] => text.split(',').map(num).collect(),
        _ => Err(UsageError(format!("grid `{text}` is neither a:b:step nor a list"))),
    }
}

/// The limit process that a simulated regime is compared against.
pub fn limit_process(regime: RegimeSpec) -> Process {
    match regime {
        RegimeSpec::Transition => Process::Airy21,
        RegimeSpec::GueMinors => Process::GueMinors,
        RegimeSpec::Airy2 { .. } => Process::Airy2,
        RegimeSpec::Airy1 { .. } => Process::Airy1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("-2:3:0.5").unwrap().len(), 11);
        assert_eq!(parse_grid("0,1.5, 2").unwrap(), vec![0.0, 1.5, 2.0]);
        assert!(parse_grid("").unwrap().is_empty());
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn config_round_trip() {
        let mut c = ExperimentConfig::empty(CommandKind::Tabulate);
        c.process = Some(Process::FiniteTime { t: 4.0 });
        c.taus = vec![1.0];
        c.s_grid = vec![-1.0, 0.0];
        c.output = "out.csv".into();
        let c = c.resolve().unwrap();
        assert_eq!(c.tol, Some(DEFAULT_TOL));
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn rejects_missing_and_stray_fields() {
        let mut c = ExperimentConfig::empty(CommandKind::Simulate);
        c.output = "o".into();
        assert!(c.clone().resolve().is_err());
        c.regime = Some(RegimeSpec::Transition);
        c.t = Some(64.0);
        c.taus = vec![0.0];
        c.replicas = Some(10);
        assert_eq!(c.clone().resolve().unwrap().n_particles, Some(16));
        c.process = Some(Process::Airy21);
        assert!(c.resolve().is_err());
        assert!(ExperimentConfig::from_json(r#"{"command":"tabulate","output":"o","bogus":1}"#).is_err());
    }
}
