use tasep_core::validation::{self, GUE_REPLICAS, TRANSITION_REPLICAS};
use tasep_core::Execution;
use tasep_suite::check;

const EXEC: Execution = Execution::Parallel;

#[test]
fn airy_ode_invariant() {
    check(validation::airy_ode_invariant());
}

#[test]
fn c01_airy_form_matches_contour_form() {
    check(validation::criterion_1());
}

#[test]
fn c02_k1_representations() {
    check(validation::criterion_2());
}

#[test]
fn c03_path_independence() {
    check(validation::criterion_3());
}

#[test]
fn c04_finite_time_one_point_law() {
    check(validation::criterion_4(EXEC));
}

#[test]
fn c05_master_equation() {
    check(validation::criterion_5(EXEC));
}

#[test]
fn c06_finite_time_kernel_convergence() {
    check(validation::criterion_6());
}

#[test]
fn c07_interpolation_endpoints() {
    check(validation::criterion_7());
}

#[test]
fn c08_monte_carlo_vs_limit() {
    check(validation::criterion_8(TRANSITION_REPLICAS, EXEC));
}

#[test]
fn c09_gue_minors_endpoint() {
    check(validation::criterion_9(Some(GUE_REPLICAS), EXEC));
}

#[test]
fn c10_coupling_monotonicity() {
    check(validation::criterion_10());
}

#[test]
fn c11_fredholm_engine() {
    check(validation::criterion_11(EXEC));
}

#[test]
fn c12_moderate_deviations() {
    check(validation::criterion_12());
}
