use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tasep-lab"))
        .args(args)
        .env_remove("TASEP_THREADS")
        .output()
        .expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

/// `(s, cdf)` columns of a table file.
fn table(file: &str) -> Vec<(f64, f64)> {
    std::fs::read_to_string(file)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[1], f[2])
        })
        .collect()
}

#[test]
fn tabulate_airy21_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "t.csv");
    let o = lab(&[
        "tabulate",
        "--process",
        "airy21",
        "--tau",
        "0",
        "--s=-2:3:0.5",
        "-o",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = table(&out);
    assert_eq!(rows.len(), 11);
    assert!(rows.windows(2).all(|w| w[1].1 >= w[0].1));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# config: {"));
    assert_eq!(text.lines().nth(1), Some("tau,s,cdf,err"));
}

#[test]
fn tabulate_gue_median() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "g.csv");
    let o = lab(&[
        "tabulate",
        "--process",
        "gue-minors",
        "--tau",
        "1",
        "--s",
        "0",
        "-o",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!((table(&out)[0].1 - 0.5).abs() <= 1e-8);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "x.csv");
    let o = lab(&["tabulate", "--process", "airy21", "--tau", "0", "--s", "", "-o", &out]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(r#""kind":"usage""#), "{err}");
    assert!(!Path::new(&out).exists());

    assert_eq!(lab(&["tabulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        lab(&[
            "simulate",
            "--regime",
            "transition",
            "--t",
            "16",
            "--tau",
            "0",
            "-o",
            &out
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn config_file_and_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    let a = path(dir.path(), "a.csv");
    let b = path(dir.path(), "b.csv");
    let cfg = path(dir.path(), "cfg.json");
    std::fs::write(
        &cfg,
        format!(r#"{{"command":"tabulate","process":{{"kind":"finite_time","t":4.0}},"taus":[1.0],"s_grid":[-1.0,0.0,3.0],"output":"{b}"}}"#),
    )
    .unwrap();
    assert_eq!(
        lab(&[
            "tabulate",
            "--process",
            "finite-time",
            "--t",
            "4",
            "--tau",
            "1",
            "--s=-1,0,3",
            "-o",
            &a
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(lab(&["tabulate", "--config", &cfg]).status.code(), Some(0));
    assert_eq!(table(&a), table(&b));
    assert_eq!(lab(&["simulate", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "s.csv");
    let args = [
        "simulate",
        "--regime",
        "transition",
        "--t",
        "32",
        "--tau",
        "0,0.5",
        "--replicas",
        "200",
        "--seed",
        "9",
        "-o",
        &out,
    ];
    assert_eq!(lab(&args).status.code(), Some(0));
    let first = std::fs::read(&out).unwrap();
    assert_eq!(lab(&args).status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), first);
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().nth(1), Some("replica,tau,n,x_raw,x_rescaled"));
    assert_eq!(text.lines().count(), 2 + 400);
}

#[test]
fn self_comparison_has_zero_distance() {
    let dir = tempfile::tempdir().unwrap();
    let samples = path(dir.path(), "s.csv");
    let o = lab(&[
        "simulate",
        "--regime",
        "transition",
        "--t",
        "32",
        "--tau",
        "0",
        "--replicas",
        "300",
        "-o",
        &samples,
    ]);
    assert_eq!(o.status.code(), Some(0));

    // The samples' own empirical CDF, written as a table.
    let text = std::fs::read_to_string(&samples).unwrap();
    let mut xs: Vec<f64> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut body = String::from("tau,s,cdf,err\n");
    let mut support = xs.clone();
    support.dedup();
    for s in support {
        let count = xs.iter().filter(|&&x| x <= s).count() as f64;
        body.push_str(&format!("0.0,{s},{},0.0\n", count / n));
    }
    let table = path(dir.path(), "t.csv");
    std::fs::write(
        &table,
        String::from(r#"# config: {"command":"tabulate","process":{"kind":"airy21"},"taus":[0.0],"output":"x"}"#)
            + "\n"
            + &body,
    )
    .unwrap();

    let report = path(dir.path(), "r.csv");
    let o = lab(&[
        "compare",
        "--samples",
        &samples,
        "--table",
        &table,
        "--interpolation",
        "step",
        "--threshold",
        "0",
        "-o",
        &report,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let row = std::fs::read_to_string(&report)
        .unwrap()
        .lines()
        .nth(2)
        .unwrap()
        .to_owned();
    assert_eq!(row.split(',').nth(3), Some("0.0"));
}

#[test]
fn compare_rejects_mismatched_files() {
    let dir = tempfile::tempdir().unwrap();
    let samples = path(dir.path(), "s.csv");
    let table = path(dir.path(), "g.csv");
    let report = path(dir.path(), "r.csv");
    lab(&[
        "simulate",
        "--regime",
        "transition",
        "--t",
        "16",
        "--tau",
        "0",
        "--replicas",
        "10",
        "-o",
        &samples,
    ]);
    lab(&[
        "tabulate",
        "--process",
        "gue-minors",
        "--tau",
        "1",
        "--s",
        "0",
        "-o",
        &table,
    ]);
    assert_eq!(
        lab(&["compare", "--samples", &samples, "--table", &table, "-o", &report])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lab(&["compare", "--samples", &table, "--table", &samples, "-o", &report])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn kernel_eval_prints_json() {
    let o = lab(&[
        "kernel-eval",
        "--kernel",
        "airy21",
        "--tau1",
        "0.5",
        "--s1=-1",
        "--tau2",
        "0",
        "--s2",
        "0",
    ]);
    let c = lab(&[
        "kernel-eval",
        "--kernel",
        "airy21-airy",
        "--tau1",
        "0.5",
        "--s1=-1",
        "--tau2",
        "0",
        "--s2",
        "0",
    ]);
    let value = |o: &Output| -> f64 {
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["value"].as_f64().unwrap()
    };
    assert!((value(&o) - value(&c)).abs() < 1e-6);
    assert_eq!(lab(&["kernel-eval", "--kernel", "finite-time"]).status.code(), Some(2));
}

#[test]
fn selftest_exit_code_matches_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "report.txt");
    let o = lab(&["selftest", "-o", &out]);
    let report = String::from_utf8(o.stdout).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), report);
    for id in ["airy-ode", "1", "2", "3", "4", "5", "6", "7", "9", "10", "11", "12"] {
        assert!(report.contains(&format!("[{id}]")), "missing check {id}");
    }
    let gating_failure = report
        .lines()
        .any(|l| l.starts_with("FAIL") && !l.contains("(diagnostic)"));
    assert_eq!(o.status.code(), Some(if gating_failure { 1 } else { 0 }));

    let again = lab(&["selftest"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), report);
}
