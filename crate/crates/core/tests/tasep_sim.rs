use std::collections::HashMap;

use proptest::prelude::*;
use tasep_core::sim::{
    evolve_coupled, evolve_in_place, init_particles, rng_stream, sample_positions, Clocks, InitialCondition,
    ParticleConfig, SimConfig,
};
use tasep_core::validation::oracles::MasterLaw;
use tasep_core::Execution;

fn config(n: usize, horizon: f64, seed: u64, coupling: bool) -> SimConfig {
    SimConfig {
        ic: InitialCondition::TwoPeriodic,
        n_particles: n,
        horizon,
        seed,
        coupling,
    }
}

/// Offsets in `{-1, 0}` keep `-2k + o_k` strictly decreasing.
fn offsets(n: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-1i64..=0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_is_preserved(seed in any::<u64>(), offs in offsets(12), steps in 1usize..20) {
        let mut s = init_particles(&InitialCondition::Perturbed { offsets: offs }, 12).unwrap();
        let mut rng = rng_stream(seed, 0, 0);
        for _ in 0..steps {
            evolve_in_place(&mut s, 0.7, &mut rng);
            prop_assert!(s.check_order().is_ok(), "{:?}", s.positions);
        }
    }

    #[test]
    fn coupling_keeps_componentwise_order(
        seed in any::<u64>(),
        lo in offsets(10),
        lift in proptest::collection::vec(0i64..=1, 10),
        site in any::<bool>(),
    ) {
        // Any offsets in {-1, 0} give an ordered state; these sit above `lo`.
        let upper_offs: Vec<i64> = lo.iter().zip(&lift).map(|(&a, &b)| (a + b).min(0)).collect();
        let lower = init_particles(&InitialCondition::Perturbed { offsets: lo }, 10).unwrap();
        let upper = init_particles(&InitialCondition::Perturbed { offsets: upper_offs }, 10).unwrap();
        let clocks = if site { Clocks::Site } else { Clocks::Particle };
        let mut rng = rng_stream(seed, 0, 1);
        let (mut a, mut b) = (lower, upper);
        for _ in 0..10 {
            (a, b) = evolve_coupled(&a, &b, 0.5, clocks, &mut rng).unwrap();
            prop_assert!(a.positions.iter().zip(&b.positions).all(|(x, z)| x <= z));
        }
    }

    #[test]
    fn shift_commutes_with_particle_clocks(seed in any::<u64>(), shift in -5i64..5) {
        let base = init_particles(&InitialCondition::TwoPeriodic, 8).unwrap();
        let moved = ParticleConfig::new(base.positions.iter().map(|x| x + shift).collect()).unwrap();
        let (lo, hi) = if shift >= 0 { (base, moved) } else { (moved, base) };
        let mut rng = rng_stream(seed, 0, 2);
        let (a, b) = evolve_coupled(&lo, &hi, 6.0, Clocks::Particle, &mut rng).unwrap();
        let gap = shift.abs();
        prop_assert!(a.positions.iter().zip(&b.positions).all(|(x, z)| z - x == gap));
    }
}

#[test]
fn truncation_does_not_change_samples() {
    let indices = [3, 7, 10];
    let a = sample_positions(&config(10, 5.0, 11, false), &indices, 200, Execution::Sequential).unwrap();
    let b = sample_positions(&config(20, 5.0, 11, false), &indices, 200, Execution::Sequential).unwrap();
    assert_eq!(a, b);
}

#[test]
fn parallel_and_sequential_agree() {
    let c = config(16, 8.0, 3, false);
    let a = sample_positions(&c, &[1, 16], 300, Execution::Sequential).unwrap();
    let b = sample_positions(&c, &[1, 16], 300, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_particle_is_shifted_poisson() {
    let t = 9.0;
    let runs = 40_000;
    let xs = sample_positions(&config(1, t, 21, false), &[1], runs, Execution::Parallel).unwrap();
    let jumps: Vec<f64> = xs.iter().map(|r| (r[0] + 2) as f64).collect();
    let mean = jumps.iter().sum::<f64>() / runs as f64;
    let var = jumps.iter().map(|j| (j - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    // Standard error of the mean is 0.015.
    assert!((mean - t).abs() < 0.075, "mean {mean}");
    assert!((var - t).abs() < 0.5, "variance {var}");
}

/// Empirical law of `(x_1, x_2)` at `t`.
fn joint_law(t: f64, runs: u32, coupling: bool) -> HashMap<(i64, i64), f64> {
    let xs = sample_positions(&config(2, t, 5, coupling), &[1, 2], runs, Execution::Parallel).unwrap();
    let mut law = HashMap::new();
    for r in &xs {
        *law.entry((r[0], r[1])).or_insert(0.0) += 1.0 / runs as f64;
    }
    law
}

#[test]
fn two_particles_follow_the_master_equation() {
    let t = 2.0;
    let runs = 100_000;
    let exact = MasterLaw::two_periodic(2, t, 1e-3).unwrap();
    for coupling in [false, true] {
        let law = joint_law(t, runs, coupling);
        let mut worst = 0.0f64;
        for (state, &p) in exact.states.iter().zip(&exact.prob) {
            let q = law.get(&(state[0], state[1])).copied().unwrap_or(0.0);
            worst = worst.max((p - q).abs());
        }
        // Largest single-state standard deviation is below 1.6e-3.
        assert!(worst < 6e-3, "coupling = {coupling}: {worst}");
    }
}

#[test]
fn kinetic_and_shared_clock_laws_agree() {
    let t = 1.0;
    let runs = 100_000;
    let xs = |coupling| -> Vec<i64> {
        sample_positions(&config(2, t, 8, coupling), &[2], runs, Execution::Parallel)
            .unwrap()
            .into_iter()
            .map(|r| r[0])
            .collect()
    };
    let (a, b) = (xs(false), xs(true));
    let cdf = |v: &[i64], x: i64| v.iter().filter(|&&y| y <= x).count() as f64 / v.len() as f64;
    let ks = (-4..=4).map(|x| (cdf(&a, x) - cdf(&b, x)).abs()).fold(0.0, f64::max);
    assert!(ks <= 0.01, "{ks}");
}
