//! Continuous-time TASEP: kinetic Monte Carlo for one system and a shared-clock
//! construction for monotone couplings.
//!
//! Particle `k` only feels particles `1..k`, so a run keeps just the labels it
//! needs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::scaling::{index_for, rescale, RegimeSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `x_k(0) = -2k`.
    TwoPeriodic,
    /// `x_k(0) = -k`.
    Step,
    /// `x_k(0) = -2k + offsets[k-1]`, missing offsets read as zero.
    Perturbed { offsets: Vec<i64> },
}

impl InitialCondition {
    /// `max |x_k(0) + 2k|`.
    pub fn perturbation_bound(&self) -> Option<i64> {
        match self {
            InitialCondition::TwoPeriodic => Some(0),
            InitialCondition::Step => None,
            InitialCondition::Perturbed { offsets } => Some(offsets.iter().map(|o| o.abs()).max().unwrap_or(0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub ic: InitialCondition,
    pub n_particles: usize,
    pub horizon: f64,
    pub seed: u64,
    /// Run replicas with the shared-clock construction instead of KMC.
    pub coupling: bool,
}

/// Positions `x_1 > x_2 > ... > x_N` at `time`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticleConfig {
    pub positions: Vec<i64>,
    pub time: OrderedTime,
}

/// Wall of a `f64` time that keeps `Eq` usable on configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderedTime(pub f64);

impl Eq for OrderedTime {}

impl ParticleConfig {
    pub fn new(positions: Vec<i64>) -> Result<Self> {
        let c = ParticleConfig {
            positions,
            time: OrderedTime(0.0),
        };
        c.check_order()?;
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time.0
    }

    pub fn check_order(&self) -> Result<()> {
        if let Some(k) = self.positions.windows(2).position(|w| w[0] <= w[1]) {
            return Err(Error::Contract(format!(
                "positions must strictly decrease, particles {} and {} at {} and {}",
                k + 1,
                k + 2,
                self.positions[k],
                self.positions[k + 1]
            )));
        }
        Ok(())
    }

    fn can_jump(&self, k: usize) -> bool {
        k == 0 || self.positions[k] + 1 < self.positions[k - 1]
    }
}

/// Initial state with the first `n` particles.
pub fn init_particles(ic: &InitialCondition, n: usize) -> Result<ParticleConfig> {
    let positions = (1..=n as i64)
        .map(|k| match ic {
            InitialCondition::TwoPeriodic => -2 * k,
            InitialCondition::Step => -k,
            InitialCondition::Perturbed { offsets } => -2 * k + offsets.get(k as usize - 1).copied().unwrap_or(0),
        })
        .collect();
    ParticleConfig::new(positions)
}

pub fn init_state(cfg: &SimConfig) -> Result<ParticleConfig> {
    validate(cfg)?;
    init_particles(&cfg.ic, cfg.n_particles)
}

fn validate(cfg: &SimConfig) -> Result<()> {
    if cfg.n_particles == 0 {
        return Err(Error::Contract("need at least one particle".into()));
    }
    if !(cfg.horizon >= 0.0 && cfg.horizon.is_finite()) {
        return Err(Error::Contract(format!(
            "horizon must be finite and nonnegative, got {}",
            cfg.horizon
        )));
    }
    Ok(())
}

/// ChaCha20 keyed by `seed`, on stream `(replica << 32) | id`.
pub fn rng_stream(seed: u64, replica: u32, id: u32) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(((replica as u64) << 32) | id as u64);
    rng
}

fn exp_time(rng: &mut impl Rng, rate: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Indexed set of particles whose right neighbour site is empty.
struct Eligible {
    members: Vec<usize>,
    slot: Vec<usize>,
}

impl Eligible {
    const ABSENT: usize = usize::MAX;

    fn new(c: &ParticleConfig) -> Self {
        let mut e = Eligible {
            members: Vec::with_capacity(c.len()),
            slot: vec![Self::ABSENT; c.len()],
        };
        for k in 0..c.len() {
            e.set(k, c.can_jump(k));
        }
        e
    }

    fn set(&mut self, k: usize, on: bool) {
        let present = self.slot[k] != Self::ABSENT;
        if on && !present {
            self.slot[k] = self.members.len();
            self.members.push(k);
        } else if !on && present {
            let i = self.slot[k];
            self.members.swap_remove(i);
            if i < self.members.len() {
                self.slot[self.members[i]] = i;
            }
            self.slot[k] = Self::ABSENT;
        }
    }
}

/// Runs the dynamics for `duration` by kinetic Monte Carlo.
pub fn evolve_in_place(state: &mut ParticleConfig, duration: f64, rng: &mut impl Rng) {
    let end = state.time() + duration;
    if state.is_empty() || duration <= 0.0 {
        state.time = OrderedTime(end.max(state.time()));
        return;
    }
    let mut eligible = Eligible::new(state);
    let mut now = state.time();
    loop {
        now += exp_time(rng, eligible.members.len() as f64);
        if now > end {
            break;
        }
        let k = eligible.members[rng.random_range(0..eligible.members.len())];
        state.positions[k] += 1;
        eligible.set(k, state.can_jump(k));
        if k + 1 < state.len() {
            eligible.set(k + 1, true);
        }
        debug_assert!(state.check_order().is_ok());
    }
    state.time = OrderedTime(end);
}

pub fn evolve(state: &ParticleConfig, duration: f64, rng: &mut impl Rng) -> ParticleConfig {
    let mut s = state.clone();
    evolve_in_place(&mut s, duration, rng);
    s
}

/// Clock attachment for the shared-clock construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clocks {
    /// One rate-1 clock per particle label. Shifting a configuration by `M`
    /// shifts its trajectory by exactly `M`.
    #[default]
    Particle,
    /// One rate-1 clock per site, read by whichever particle sits there.
    Site,
}

fn try_jump(c: &mut ParticleConfig, k: usize) {
    if c.can_jump(k) {
        c.positions[k] += 1;
    }
}

fn try_jump_from(c: &mut ParticleConfig, site: i64) {
    // Positions are strictly decreasing.
    if let Ok(k) = c.positions.binary_search_by(|p| site.cmp(p)) {
        try_jump(c, k);
    }
}

/// Drives every system in `states` with the same clocks.
pub fn evolve_shared(
    states: &mut [&mut ParticleConfig],
    duration: f64,
    clocks: Clocks,
    rng: &mut impl Rng,
) -> Result<()> {
    let Some(first) = states.first() else {
        return Ok(());
    };
    let (n, start) = (first.len(), first.time());
    if states.iter().any(|s| s.len() != n) {
        return Err(Error::Contract("coupled systems need the same particle count".into()));
    }
    let end = start + duration.max(0.0);
    let mut now = start;
    let mut sites: Vec<i64> = Vec::new();
    while n > 0 && now <= end {
        let rate = match clocks {
            Clocks::Particle => n,
            Clocks::Site => {
                // Clocks at empty sites move nothing in any system.
                sites.clear();
                sites.extend(states.iter().flat_map(|s| s.positions.iter().copied()));
                sites.sort_unstable();
                sites.dedup();
                sites.len()
            }
        };
        now += exp_time(rng, rate as f64);
        if now > end {
            break;
        }
        let pick = rng.random_range(0..rate);
        for s in states.iter_mut() {
            match clocks {
                Clocks::Particle => try_jump(s, pick),
                Clocks::Site => try_jump_from(s, sites[pick]),
            }
            debug_assert!(s.check_order().is_ok());
        }
    }
    for s in states.iter_mut() {
        s.time = OrderedTime(end);
    }
    Ok(())
}

/// Evolves `lower <= upper` (componentwise) with shared clocks. The order is
/// preserved along every trajectory.
pub fn evolve_coupled(
    lower: &ParticleConfig,
    upper: &ParticleConfig,
    duration: f64,
    clocks: Clocks,
    rng: &mut impl Rng,
) -> Result<(ParticleConfig, ParticleConfig)> {
    if lower.len() != upper.len() || lower.positions.iter().zip(&upper.positions).any(|(x, z)| x > z) {
        return Err(Error::Contract("coupling needs lower <= upper componentwise".into()));
    }
    let (mut a, mut b) = (lower.clone(), upper.clone());
    evolve_shared(&mut [&mut a, &mut b], duration, clocks, rng)?;
    Ok((a, b))
}

/// Positions of particles `indices` at the horizon for each replica; replica
/// `r` draws from [`rng_stream`]`(seed, r, 0)`.
pub fn sample_positions(cfg: &SimConfig, indices: &[u64], replicas: u32, exec: Execution) -> Result<Vec<Vec<i64>>> {
    validate(cfg)?;
    let max = indices.iter().copied().max().unwrap_or(0);
    if indices.contains(&0) || max as usize > cfg.n_particles {
        return Err(Error::IndexOutOfRange(format!(
            "requested particles {indices:?} but labels run over 1..={}",
            cfg.n_particles
        )));
    }
    let start = init_particles(&cfg.ic, max as usize)?;
    exec.try_map_range(replicas as usize, |r| {
        let mut rng = rng_stream(cfg.seed, r as u32, 0);
        let mut state = start.clone();
        if cfg.coupling {
            evolve_shared(&mut [&mut state], cfg.horizon, Clocks::Particle, &mut rng)?;
        } else {
            evolve_in_place(&mut state, cfg.horizon, &mut rng);
        }
        state.check_order()?;
        Ok(indices.iter().map(|&n| state.positions[n as usize - 1]).collect())
    })
}

/// What a replica reports: the regime's rescaled value at each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub regime: RegimeSpec,
    /// `tau` values, or labels `n` for the GUE-minors regime.
    pub points: Vec<f64>,
}

impl Observable {
    pub fn indices(&self, t: f64) -> Result<Vec<u64>> {
        self.points.iter().map(|&p| index_for(self.regime, p, t)).collect()
    }
}

/// One row per replica of rescaled observables.
pub fn sample_ensemble(cfg: &SimConfig, obs: &Observable, replicas: u32, exec: Execution) -> Result<Vec<Vec<f64>>> {
    let indices = obs.indices(cfg.horizon)?;
    let raw = sample_positions(cfg, &indices, replicas, exec)?;
    raw.into_iter()
        .map(|row| {
            row.iter()
                .zip(&obs.points)
                .map(|(&x, &p)| rescale(obs.regime, x, p, cfg.horizon))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    fn cfg(ic: InitialCondition, n: usize) -> SimConfig {
        SimConfig {
            ic,
            n_particles: n,
            horizon: 1.0,
            seed: 7,
            coupling: false,
        }
    }

    #[test]
    fn chacha_known_answer() {
        // Zero key, zero nonce: the keystream starts 76 b8 e0 ad.
        let mut rng = rng_stream(0, 0, 0);
        assert_eq!(rng.next_u32(), 0xade0b876);
    }

    #[test]
    fn initial_conditions() {
        assert_eq!(
            init_state(&cfg(InitialCondition::TwoPeriodic, 3)).unwrap().positions,
            vec![-2, -4, -6]
        );
        assert_eq!(
            init_state(&cfg(InitialCondition::Step, 3)).unwrap().positions,
            vec![-1, -2, -3]
        );
        let zero = InitialCondition::Perturbed { offsets: vec![0, 0, 0] };
        assert_eq!(init_state(&cfg(zero, 3)).unwrap().positions, vec![-2, -4, -6]);
        let bad = InitialCondition::Perturbed { offsets: vec![0, 2] };
        assert!(init_state(&cfg(bad, 3)).is_err());
    }

    #[test]
    fn zero_duration_is_identity() {
        let s = init_particles(&InitialCondition::TwoPeriodic, 5).unwrap();
        let mut rng = rng_stream(1, 0, 0);
        assert_eq!(evolve(&s, 0.0, &mut rng).positions, s.positions);
    }

    #[test]
    fn eligibility_tracks_blocking() {
        let mut s = init_particles(&InitialCondition::Step, 4).unwrap();
        let mut rng = rng_stream(3, 0, 0);
        for _ in 0..200 {
            evolve_in_place(&mut s, 0.05, &mut rng);
            s.check_order().unwrap();
            let e = Eligible::new(&s);
            let mut m = e.members.clone();
            m.sort();
            let expect: Vec<usize> = (0..4).filter(|&k| s.can_jump(k)).collect();
            assert_eq!(m, expect);
        }
    }

    #[test]
    fn equal_states_stay_equal_under_coupling() {
        let s = init_particles(&InitialCondition::TwoPeriodic, 6).unwrap();
        for clocks in [Clocks::Particle, Clocks::Site] {
            let mut rng = rng_stream(5, 0, 1);
            let (a, b) = evolve_coupled(&s, &s, 7.0, clocks, &mut rng).unwrap();
            assert_eq!(a.positions, b.positions);
        }
    }

    #[test]
    fn coupling_rejects_misordered_input() {
        let lo = init_particles(&InitialCondition::TwoPeriodic, 3).unwrap();
        let hi = init_particles(
            &InitialCondition::Perturbed {
                offsets: vec![-1, 0, 0],
            },
            3,
        )
        .unwrap();
        let mut rng = rng_stream(0, 0, 0);
        assert!(evolve_coupled(&lo, &hi, 1.0, Clocks::Particle, &mut rng).is_err());
    }

    #[test]
    fn sampling_checks_indices() {
        let c = cfg(InitialCondition::TwoPeriodic, 3);
        assert!(sample_positions(&c, &[4], 1, Execution::Sequential).is_err());
        assert!(sample_positions(&c, &[0], 1, Execution::Sequential).is_err());
    }
}
