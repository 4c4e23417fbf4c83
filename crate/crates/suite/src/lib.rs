//! Reporting for the acceptance suite. Lines go straight to the process
//! stdout so they survive the test harness's output capture.

use std::io::Write;

use tasep_core::validation::CheckOutcome;

/// Prints the PASS/FAIL line of `o`.
pub fn report(o: &CheckOutcome) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "\n{}", o.line());
    let _ = out.flush();
}

/// Prints `o` and fails the calling test if it is a gating check that failed.
pub fn check(o: CheckOutcome) {
    report(&o);
    assert!(o.passed || !o.gating, "{}", o.line());
}
