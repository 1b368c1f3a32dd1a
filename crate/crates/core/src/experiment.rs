//! Monte Carlo simulation of the recycling protocol.
//!
//! Every round draws a context uniformly, measures the current system and
//! keeps the post-measurement state for the next round. Two engines produce
//! identically distributed trajectories: [`Mode::Chain`] samples the
//! transition matrix directly, [`Mode::Quantum`] keeps an explicit density
//! matrix and applies the Born rule.
//!
//! Randomness comes from ChaCha8 seeded with `seed`, with `stream` selecting
//! an independent substream so batches of trajectories are reproducible
//! regardless of how they are scheduled.

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{ChainError, TransitionMatrix, NOISY_STATES};
use crate::quantum::{
    self, born_probability, flat_index, slot_of, slot_outcomes, ComplexMatrix, ContextId,
    QuantumError, SquareOperators, TripleState, TRIPLE_STATES,
};

/// ⌈(3/2)·ln(24/10⁻³)⌉.
pub const DEFAULT_BURN_IN: usize = 16;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Chain,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    /// Start in the triple state with this flat index.
    Index(usize),
    /// Start in a triple state drawn uniformly at random.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub rounds: usize,
    pub burn_in: usize,
    pub alignment_p: f64,
    pub seed: u64,
    /// RNG substream; batch runs assign one per trajectory.
    pub stream: u64,
    pub initial_state: InitialState,
    pub mode: Mode,
}

impl ExperimentConfig {
    pub fn new(rounds: usize) -> Self {
        Self {
            rounds,
            burn_in: DEFAULT_BURN_IN,
            alignment_p: 1.0,
            seed: 0,
            stream: 0,
            initial_state: InitialState::Index(0),
            mode: Mode::Chain,
        }
    }

    pub fn with_alignment(mut self, p: f64) -> Self {
        self.alignment_p = p;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_initial_state(mut self, initial: InitialState) -> Self {
        self.initial_state = initial;
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.rounds == 0 {
            return Err(ExperimentError::Config("rounds must be positive".into()));
        }
        if self.burn_in >= self.rounds {
            return Err(ExperimentError::Config(format!(
                "burn-in {} must be smaller than rounds {}",
                self.burn_in, self.rounds
            )));
        }
        if !(0.0..=1.0).contains(&self.alignment_p) {
            return Err(ExperimentError::Config(format!(
                "alignment probability {} outside [0, 1]",
                self.alignment_p
            )));
        }
        if let InitialState::Index(i) = self.initial_state {
            if i >= TRIPLE_STATES {
                return Err(ExperimentError::Config(format!("initial state {i} outside 0..24")));
            }
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub round: usize,
    pub context: ContextId,
    pub outcomes: [i8; 3],
    /// 0..24 for triple states, 24..48 for error states.
    pub chain_state: usize,
    pub is_error: bool,
}

impl MeasurementRecord {
    /// Record for landing in chain state `chain_state` at `round`.
    pub fn from_chain_state(round: usize, chain_state: usize) -> Self {
        assert!(chain_state < NOISY_STATES, "chain state {chain_state} out of range");
        let is_error = chain_state >= TRIPLE_STATES;
        let local = chain_state % TRIPLE_STATES;
        let context = ContextId::from_offset(local / 4);
        let sign = if is_error { -context.sign() } else { context.sign() };
        Self {
            round,
            context,
            outcomes: slot_outcomes(local % 4 + 1, sign),
            chain_state,
            is_error,
        }
    }

    /// Product s₁s₂s₃.
    pub fn parity(&self) -> i8 {
        self.outcomes.iter().product()
    }
}

/// Chain index of the error outcome of `ctx` whose first two outcomes are (s1, s2).
pub fn error_state_index(ctx: ContextId, s1: i8, s2: i8) -> usize {
    TRIPLE_STATES + flat_index(ctx, slot_of(s1, s2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config: ExperimentConfig,
    pub records: Vec<MeasurementRecord>,
}

impl Trajectory {
    /// Records from round `burn_in` on.
    pub fn post_burn_in(&self) -> &[MeasurementRecord] {
        let start = self.records.partition_point(|r| r.round < self.config.burn_in);
        &self.records[start..]
    }

    /// Empirical post-burn-in occupancy over `n` chain states.
    pub fn occupancy(&self, n: usize) -> Vec<f64> {
        let recs = self.post_burn_in();
        let mut counts = vec![0usize; n];
        for r in recs {
            counts[r.chain_state] += 1;
        }
        counts.iter().map(|&c| c as f64 / recs.len() as f64).collect()
    }

    /// `counts[from][to]` over consecutive records.
    pub fn transition_counts(&self, n: usize) -> Vec<Vec<u64>> {
        let mut counts = vec![vec![0u64; n]; n];
        for w in self.records.windows(2) {
            counts[w[0].chain_state][w[1].chain_state] += 1;
        }
        counts
    }
}

enum Engine<'a> {
    Chain {
        matrix: &'a TransitionMatrix,
        current: usize,
    },
    Quantum {
        alignment_p: f64,
        rho: ComplexMatrix,
    },
}

/// Endless stream of measurement records for one configuration.
pub struct Recycler<'a> {
    states: &'a [TripleState],
    rng: ChaCha8Rng,
    engine: Engine<'a>,
    round: usize,
}

impl<'a> Recycler<'a> {
    fn next_record(&mut self) -> Result<MeasurementRecord, ExperimentError> {
        let ctx = ContextId::from_offset(self.rng.random_range(0..6));
        let u: f64 = self.rng.random();
        let chain_state = match &mut self.engine {
            Engine::Chain { matrix, current } => {
                let mut rows: Vec<usize> = (1..=4).map(|slot| flat_index(ctx, slot)).collect();
                if matrix.n() == NOISY_STATES {
                    rows.extend((1..=4).map(|slot| TRIPLE_STATES + flat_index(ctx, slot)));
                }
                // Restricted to one context each column holds 1/6 of its mass.
                let next = pick(rows.iter().map(|&r| 6.0 * matrix.get(r, *current)), u);
                *current = rows[next];
                *current
            }
            Engine::Quantum { alignment_p, rho } => {
                if u < *alignment_p {
                    let basis = &self.states[4 * ctx.offset()..4 * ctx.offset() + 4];
                    let probs = basis
                        .iter()
                        .map(|b| born_probability(rho, b))
                        .collect::<Result<Vec<_>, _>>()?;
                    let v: f64 = self.rng.random();
                    let slot = pick(probs.into_iter(), v);
                    *rho = basis[slot].projector.clone();
                    basis[slot].flat_index
                } else {
                    *rho = quantum::maximally_mixed();
                    TRIPLE_STATES + flat_index(ctx, self.rng.random_range(1..=4))
                }
            }
        };
        let record = MeasurementRecord::from_chain_state(self.round, chain_state);
        self.round += 1;
        Ok(record)
    }
}

impl Iterator for Recycler<'_> {
    type Item = Result<MeasurementRecord, ExperimentError>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_record())
    }
}

/// Inverse-CDF draw over weights that sum to one.
fn pick(weights: impl Iterator<Item = f64>, u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Prepared simulator for one operator square and transition matrix.
pub struct Simulator<'a> {
    chain: &'a TransitionMatrix,
    states: Vec<TripleState>,
}

impl<'a> Simulator<'a> {
    pub fn new(square: &SquareOperators, chain: &'a TransitionMatrix) -> Result<Self, ExperimentError> {
        Ok(Self {
            chain,
            states: quantum::all_triple_states(square)?,
        })
    }

    pub fn states(&self) -> &[TripleState] {
        &self.states
    }

    fn check_chain(&self, config: &ExperimentConfig) -> Result<(), ExperimentError> {
        let p = config.alignment_p;
        match self.chain.n() {
            TRIPLE_STATES if p == 1.0 => Ok(()),
            TRIPLE_STATES => Err(ExperimentError::Config(format!(
                "alignment probability {p} needs the 48-state error chain"
            ))),
            NOISY_STATES => {
                let to_error = self.chain.get(TRIPLE_STATES, 0) * 24.0;
                let from_error = self.chain.get(0, TRIPLE_STATES) * 24.0;
                if (to_error - (1.0 - p)).abs() > 1e-12 || (from_error - p).abs() > 1e-12 {
                    Err(ExperimentError::Config(format!(
                        "error chain was built for p = {from_error}, config asks for {p}"
                    )))
                } else {
                    Ok(())
                }
            }
            n => Err(ExperimentError::Config(format!("unsupported chain size {n}"))),
        }
    }

    /// Record stream for `config`, starting at round 0.
    pub fn recycler(&self, config: &ExperimentConfig) -> Result<Recycler<'_>, ExperimentError> {
        config.validate()?;
        if config.mode == Mode::Chain {
            self.check_chain(config)?;
        }
        let mut rng = config.rng();
        let start = match config.initial_state {
            InitialState::Index(i) => i,
            InitialState::Uniform => rng.random_range(0..TRIPLE_STATES),
        };
        let engine = match config.mode {
            Mode::Chain => Engine::Chain {
                matrix: self.chain,
                current: start,
            },
            Mode::Quantum => Engine::Quantum {
                alignment_p: config.alignment_p,
                rho: self.states[start].density_matrix(),
            },
        };
        Ok(Recycler {
            states: &self.states,
            rng,
            engine,
            round: 0,
        })
    }

    pub fn run(&self, config: &ExperimentConfig) -> Result<Trajectory, ExperimentError> {
        let records = self
            .recycler(config)?
            .take(config.rounds)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Trajectory {
            config: config.clone(),
            records,
        })
    }

    /// `trials` independent trajectories on substreams 0..trials, reduced by
    /// `f` in parallel.
    pub fn run_batch<T, F>(&self, config: &ExperimentConfig, trials: usize, f: F) -> Result<Vec<T>, ExperimentError>
    where
        T: Send,
        F: Fn(Trajectory) -> T + Sync,
    {
        (0..trials)
            .into_par_iter()
            .map(|i| self.run(&config.clone().with_stream(i as u64)).map(&f))
            .collect()
    }

    /// Runs the burn-in and then until every triple state has been observed,
    /// giving up after `config.rounds` rounds in total. The returned
    /// trajectory's `rounds` is the number of records actually produced.
    pub fn run_until_covered(&self, config: &ExperimentConfig) -> Result<Trajectory, ExperimentError> {
        let mut seen = HashSet::with_capacity(TRIPLE_STATES);
        let mut records = Vec::new();
        for rec in self.recycler(config)?.take(config.rounds) {
            let rec = rec?;
            records.push(rec);
            if rec.round >= config.burn_in && rec.chain_state < TRIPLE_STATES {
                seen.insert(rec.chain_state);
                if seen.len() == TRIPLE_STATES {
                    break;
                }
            }
        }
        let mut config = config.clone();
        config.rounds = records.len();
        Ok(Trajectory { config, records })
    }
}

/// Convenience wrapper: prepare a simulator and run one trajectory.
pub fn run(
    config: &ExperimentConfig,
    square: &SquareOperators,
    chain: &TransitionMatrix,
) -> Result<Trajectory, ExperimentError> {
    Simulator::new(square, chain)?.run(config)
}

/// Gaps between successive visits to chain state `state`.
pub fn recurrence_times(traj: &Trajectory, state: usize) -> Vec<usize> {
    let visits: Vec<usize> = traj
        .records
        .iter()
        .filter(|r| r.chain_state == state)
        .map(|r| r.round)
        .collect();
    visits.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Number of post-burn-in rounds until all 24 triple states have been
/// observed, or `None` if the trajectory ends first.
pub fn coupon_time(traj: &Trajectory) -> Option<usize> {
    let mut seen = [false; TRIPLE_STATES];
    let mut distinct = 0;
    for (k, r) in traj.post_burn_in().iter().enumerate() {
        if r.chain_state < TRIPLE_STATES && !seen[r.chain_state] {
            seen[r.chain_state] = true;
            distinct += 1;
            if distinct == TRIPLE_STATES {
                return Some(k + 1);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(p: f64) -> (SquareOperators, TransitionMatrix) {
        let sq = SquareOperators::peres_mermin().unwrap();
        let t = TransitionMatrix::perfect(&sq).unwrap();
        let t = if p == 1.0 { t } else { t.with_errors(p).unwrap() };
        (sq, t)
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::new(0).validate().is_err());
        assert!(ExperimentConfig::new(16).validate().is_err());
        assert!(ExperimentConfig::new(17).validate().is_ok());
        assert!(ExperimentConfig::new(100).with_alignment(1.2).validate().is_err());
        assert!(ExperimentConfig::new(100)
            .with_initial_state(InitialState::Index(24))
            .validate()
            .is_err());
    }

    #[test]
    fn chain_must_match_alignment() {
        let (sq, t) = setup(1.0);
        let cfg = ExperimentConfig::new(100).with_alignment(0.9);
        assert!(matches!(run(&cfg, &sq, &t), Err(ExperimentError::Config(_))));
        let noisy = t.with_errors(0.8).unwrap();
        assert!(matches!(run(&cfg, &sq, &noisy), Err(ExperimentError::Config(_))));
        // Quantum mode does not consult the matrix.
        assert!(run(&cfg.clone().with_mode(Mode::Quantum), &sq, &t).is_ok());
    }

    #[test]
    fn record_invariants_hold() {
        for mode in [Mode::Chain, Mode::Quantum] {
            let (sq, t) = setup(0.7);
            let cfg = ExperimentConfig::new(5_000).with_alignment(0.7).with_mode(mode).with_seed(3);
            let traj = run(&cfg, &sq, &t).unwrap();
            assert_eq!(traj.records.len(), 5_000);
            let states = quantum::all_triple_states(&sq).unwrap();
            for (k, r) in traj.records.iter().enumerate() {
                assert_eq!(r.round, k);
                assert_eq!(r.is_error, r.parity() != r.context.sign());
                assert_eq!(r.is_error, r.chain_state >= 24);
                if !r.is_error {
                    let s = &states[r.chain_state];
                    assert_eq!((s.context, s.outcomes), (r.context, r.outcomes));
                } else {
                    assert_eq!(r.chain_state, error_state_index(r.context, r.outcomes[0], r.outcomes[1]));
                }
            }
        }
    }

    #[test]
    fn perfect_alignment_never_errs() {
        let (sq, t) = setup(1.0);
        for mode in [Mode::Chain, Mode::Quantum] {
            let traj = run(&ExperimentConfig::new(20_000).with_mode(mode), &sq, &t).unwrap();
            assert!(traj.records.iter().all(|r| !r.is_error));
        }
    }

    #[test]
    fn same_seed_same_records() {
        let (sq, t) = setup(0.9);
        let cfg = ExperimentConfig::new(2_000).with_alignment(0.9).with_seed(42);
        assert_eq!(run(&cfg, &sq, &t).unwrap(), run(&cfg, &sq, &t).unwrap());
        let other = run(&cfg.clone().with_stream(1), &sq, &t).unwrap();
        assert_ne!(run(&cfg, &sq, &t).unwrap().records, other.records);
    }

    #[test]
    fn first_measurement_respects_start_state() {
        // From b_{1_1}, a context-1 measurement must return b_{1_1}.
        let (sq, t) = setup(1.0);
        for mode in [Mode::Chain, Mode::Quantum] {
            for seed in 0..200 {
                let traj = run(&ExperimentConfig::new(17).with_seed(seed).with_mode(mode), &sq, &t).unwrap();
                let first = traj.records[0];
                if first.context.get() == 1 {
                    assert_eq!(first.chain_state, 0);
                }
            }
        }
    }

    #[test]
    fn recurrence_examples() {
        let (sq, t) = setup(1.0);
        let traj = run(&ExperimentConfig::new(1_000), &sq, &t).unwrap();
        let mut trimmed = traj.clone();
        trimmed.records.retain(|r| r.chain_state != 5);
        assert!(recurrence_times(&trimmed, 5).is_empty());
    }

    #[test]
    fn coupon_time_minimal_completion() {
        let records = (0..24).map(|i| MeasurementRecord::from_chain_state(i, i)).collect();
        let traj = Trajectory {
            config: ExperimentConfig::new(24).with_burn_in(0),
            records,
        };
        assert_eq!(coupon_time(&traj), Some(24));
        let mut short = traj.clone();
        short.records.pop();
        assert_eq!(coupon_time(&short), None);
    }

    #[test]
    fn run_until_covered_stops_at_completion() {
        let (sq, t) = setup(0.9);
        let sim = Simulator::new(&sq, &t).unwrap();
        let cfg = ExperimentConfig::new(10_000).with_alignment(0.9).with_seed(9);
        let traj = sim.run_until_covered(&cfg).unwrap();
        let k = coupon_time(&traj).unwrap();
        assert_eq!(traj.records.len(), cfg.burn_in + k);
    }
}
