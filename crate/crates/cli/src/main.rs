#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tasep_core::fredholm::Process;
use tasep_core::kernels::{
    airy1_extended, airy2_extended, finite_time_kernel, gue_minors_kernel, k_airy, k_contour, rescaled_finite_kernel,
    CircleContour, ContourSpec, KernelQuery,
};
use tasep_core::scaling::RegimeSpec;
use tasep_core::validation;
use tasep_core::Execution;

use commands::RunError;
use config::{parse_grid, CommandKind, ExperimentConfig, Interpolation, UsageError};

/// Default size of the worker pool.
const THREADS_ENV: &str = "TASEP_THREADS";

#[derive(Parser)]
#[command(
    name = "tasep-lab",
    version,
    about = "Fredholm determinants and Monte Carlo for TASEP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-point CDF table of a limit or finite-time process.
    Tabulate(RunArgs),
    /// Rescaled particle positions from independent replicas.
    Simulate(RunArgs),
    /// KS distance between a sample file and a table file.
    Compare(RunArgs),
    /// A single kernel value, printed as JSON.
    KernelEval(KernelArgs),
    /// The fast acceptance checks; exit 0 iff all pass.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcessName {
    Airy21,
    Airy1,
    Airy2,
    FiniteTime,
    GueMinors,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeName {
    Transition,
    GueMinors,
    Airy2,
    Airy1,
}

/// Flags mirroring the config fields; any flag given overrides `--config`.
#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    process: Option<ProcessName>,
    #[arg(long, value_enum)]
    regime: Option<RegimeName>,
    /// Density parameter of the airy1 and airy2 regimes.
    #[arg(long)]
    alpha: Option<f64>,
    /// Time horizon (also the time of the finite_time process).
    #[arg(long)]
    t: Option<f64>,
    /// `a:b:step` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    /// `a:b:step` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    #[arg(long)]
    replicas: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_particles: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_enum)]
    interpolation: Option<Interpolation>,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelName {
    /// Transition kernel from its contour integrals.
    Airy21,
    /// Transition kernel from Airy functions.
    Airy21Airy,
    Airy2,
    Airy1,
    GueMinors,
    /// Needs `--t`, `--n1`, `--x1`, `--n2`, `--x2`.
    FiniteTime,
    /// The finite-time kernel in transition scaling; needs `--t`.
    FiniteTimeRescaled,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, value_enum)]
    kernel: KernelName,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    tau1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    s1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    tau2: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    s2: f64,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 1)]
    n1: u64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    x1: i64,
    #[arg(long, default_value_t = 1)]
    n2: u64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    x2: i64,
}

#[derive(Args)]
struct SelftestArgs {
    /// Also write the report here.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

fn usage(msg: impl Into<String>) -> RunError {
    RunError::Usage(UsageError(msg.into()))
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn resolve(kind: CommandKind, a: RunArgs) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::empty(kind),
    };
    if cfg.command != kind {
        return Err(usage(
            format!("config is for {:?}, not {kind:?}", cfg.command).to_lowercase(),
        ));
    }
    if let Some(p) = a.process {
        cfg.process = Some(match p {
            ProcessName::Airy21 => Process::Airy21,
            ProcessName::Airy1 => Process::Airy1,
            ProcessName::Airy2 => Process::Airy2,
            ProcessName::GueMinors => Process::GueMinors,
            ProcessName::FiniteTime => Process::FiniteTime {
                t: a.t.ok_or_else(|| usage("--process finite-time needs --t"))?,
            },
        });
    }
    if let Some(r) = a.regime {
        let alpha = || a.alpha.ok_or_else(|| usage("this regime needs --alpha"));
        cfg.regime = Some(match r {
            RegimeName::Transition => RegimeSpec::Transition,
            RegimeName::GueMinors => RegimeSpec::GueMinors,
            RegimeName::Airy2 => RegimeSpec::Airy2 { alpha: alpha()? },
            RegimeName::Airy1 => RegimeSpec::Airy1 { alpha: alpha()? },
        });
    }
    if kind == CommandKind::Simulate {
        cfg.t = a.t.or(cfg.t);
    }
    if let Some(tau) = &a.tau {
        cfg.taus = parse_grid(tau)?;
    }
    if let Some(s) = &a.s {
        cfg.s_grid = parse_grid(s)?;
    }
    cfg.replicas = a.replicas.or(cfg.replicas);
    cfg.seed = a.seed.or(cfg.seed);
    cfg.n_particles = a.n_particles.or(cfg.n_particles);
    cfg.tol = a.tol.or(cfg.tol);
    cfg.samples = a.samples.or(cfg.samples);
    cfg.table = a.table.or(cfg.table);
    cfg.threshold = a.threshold.or(cfg.threshold);
    cfg.interpolation = a.interpolation.or(cfg.interpolation);
    if a.sequential {
        cfg.execution = Execution::Sequential;
    }
    if let Some(o) = a.output {
        cfg.output = o;
    }
    Ok(cfg.resolve()?)
}

fn kernel_eval(a: KernelArgs) -> Result<(), RunError> {
    let q = KernelQuery::new(a.tau1, a.s1, a.tau2, a.s2);
    let need_t = || a.t.ok_or_else(|| usage("this kernel needs --t"));
    let (name, value) = match a.kernel {
        KernelName::Airy21 => (
            "airy21",
            k_contour(q, &ContourSpec::default())? * q.conjugation_log().exp(),
        ),
        KernelName::Airy21Airy => ("airy21_airy", k_airy(q)),
        KernelName::Airy2 => ("airy2", airy2_extended(q)),
        KernelName::Airy1 => ("airy1", airy1_extended(q)),
        KernelName::GueMinors => {
            let label = |x: f64| {
                if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                    Ok(x as u32)
                } else {
                    Err(usage(format!(
                        "gue_minors labels are --tau1/--tau2 and must be positive integers, got {x}"
                    )))
                }
            };
            (
                "gue_minors",
                gue_minors_kernel(label(a.tau1)?, a.s1, label(a.tau2)?, a.s2)?,
            )
        }
        KernelName::FiniteTime => {
            let t = need_t()?;
            (
                "finite_time",
                finite_time_kernel(t, a.n1, a.x1, a.n2, a.x2, &CircleContour::for_time(t))?,
            )
        }
        KernelName::FiniteTimeRescaled => (
            "finite_time_rescaled",
            rescaled_finite_kernel(need_t()?, a.tau1, a.s1, a.tau2, a.s2)?,
        ),
    };
    println!("{}", json!({ "kernel": name, "value": value }));
    Ok(())
}

fn selftest(a: SelftestArgs) -> Result<bool, RunError> {
    let outcomes = validation::selftest(execution(a.sequential));
    let mut report = String::new();
    for o in &outcomes {
        report.push_str(&o.line());
        report.push('\n');
    }
    print!("{report}");
    if let Some(path) = a.output {
        io::write_atomic(&path, report.as_bytes())
            .map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(validation::all_passed(&outcomes))
}

fn configure_threads() -> Result<(), RunError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| RunError::Io(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> Result<bool, RunError> {
    configure_threads()?;
    match cli.command {
        Command::Tabulate(a) => {
            let cfg = resolve(CommandKind::Tabulate, a)?;
            commands::save(&commands::tabulate(&cfg)?)?;
            Ok(true)
        }
        Command::Simulate(a) => {
            let cfg = resolve(CommandKind::Simulate, a)?;
            commands::save(&commands::simulate(&cfg)?)?;
            Ok(true)
        }
        Command::Compare(a) => {
            let cfg = resolve(CommandKind::Compare, a)?;
            let report = commands::compare(&cfg)?;
            commands::save(&report)?;
            for r in &report.rows {
                let verdict = if r.passed { "PASS" } else { "FAIL" };
                println!(
                    "{verdict} tau = {} (n = {}): KS = {:.4} vs threshold {}",
                    r.tau, r.n, r.ks, r.threshold
                );
            }
            Ok(report.rows.iter().all(|r| r.passed))
        }
        Command::KernelEval(a) => kernel_eval(a).map(|_| true),
        Command::Selftest(a) => selftest(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", json!({ "error": { "kind": e.kind(), "message": e.message() } }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
