//! Estimators and closed-form reference values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{ChainError, TransitionMatrix};
use crate::experiment::{coupon_time, ExperimentConfig, ExperimentError, Simulator, Trajectory};
use crate::quantum::{ContextId, SquareOperators, CANONICAL_CONTEXTS, CONTEXT_SIGNS, TRIPLE_STATES};

/// Largest value of the inequality under noncontextual ±1 assignments.
pub const CLASSICAL_BOUND: f64 = 4.0;

/// Quantum value with perfect measurements.
pub const QUANTUM_VALUE: f64 = 6.0;

/// Standard errors required above the bound before a violation is declared.
pub const VIOLATION_MARGIN: f64 = 2.0;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no post-burn-in records for context(s) {0:?}")]
    InsufficientData(Vec<usize>),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Sample mean of s₁s₂s₃ for one context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlator {
    pub estimate: f64,
    pub count: usize,
    pub std_error: f64,
}

impl Correlator {
    pub fn new(estimate: f64, count: usize) -> Self {
        let var = (1.0 - estimate * estimate).max(0.0);
        Self {
            estimate,
            count,
            std_error: (var / count as f64).sqrt(),
        }
    }
}

/// Correlators for contexts 1..=6 in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    pub correlators: [Correlator; 6],
}

impl CorrelatorSet {
    pub fn get(&self, ctx: ContextId) -> &Correlator {
        &self.correlators[ctx.offset()]
    }
}

/// Per-context correlators, `None` where the context was never measured.
pub fn tally_correlators(traj: &Trajectory) -> [Option<Correlator>; 6] {
    let mut sums = [0i64; 6];
    let mut counts = [0usize; 6];
    for r in traj.post_burn_in() {
        sums[r.context.offset()] += r.parity() as i64;
        counts[r.context.offset()] += 1;
    }
    std::array::from_fn(|j| (counts[j] > 0).then(|| Correlator::new(sums[j] as f64 / counts[j] as f64, counts[j])))
}

pub fn estimate_correlators(traj: &Trajectory) -> Result<CorrelatorSet, AnalysisError> {
    let tally = tally_correlators(traj);
    let missing: Vec<usize> = tally
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_none())
        .map(|(j, _)| j + 1)
        .collect();
    if !missing.is_empty() {
        return Err(AnalysisError::InsufficientData(missing));
    }
    Ok(CorrelatorSet {
        correlators: tally.map(|c| c.expect("checked above")),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub correlators: [f64; 6],
    pub value: f64,
    pub std_error: f64,
    #[serde(rename = "bound")]
    pub classical_bound: f64,
    #[serde(rename = "quantum")]
    pub quantum_value: f64,
    pub violated: bool,
}

/// Σ_j sign_j·⟨context j⟩; the last row (context 5) enters with a minus sign.
pub fn evaluate_inequality(c: &CorrelatorSet) -> InequalityReport {
    let value: f64 = c
        .correlators
        .iter()
        .zip(CONTEXT_SIGNS)
        .map(|(k, s)| s as f64 * k.estimate)
        .sum();
    let std_error = c.correlators.iter().map(|k| k.std_error.powi(2)).sum::<f64>().sqrt();
    InequalityReport {
        correlators: c.correlators.map(|k| k.estimate),
        value,
        std_error,
        classical_bound: CLASSICAL_BOUND,
        quantum_value: QUANTUM_VALUE,
        violated: value - VIOLATION_MARGIN * std_error > CLASSICAL_BOUND,
    }
}

pub fn analyze(traj: &Trajectory) -> Result<InequalityReport, AnalysisError> {
    Ok(evaluate_inequality(&estimate_correlators(traj)?))
}

/// Closed-form stationary inequality value 12p − 6.
pub fn noisy_inequality_value(p: f64) -> Result<f64, AnalysisError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AnalysisError::Domain(format!("alignment probability {p} outside [0, 1]")));
    }
    Ok(12.0 * p - 6.0)
}

/// Expected draws to collect `n` equiprobable coupons when each draw is a
/// blank with probability `p0`: n/(1−p0)·H_n.
pub fn coupon_expectation(n: usize, p0: f64) -> Result<f64, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::Domain("coupon count must be positive".into()));
    }
    if !(0.0..1.0).contains(&p0) {
        return Err(AnalysisError::Domain(format!("blank probability {p0} outside [0, 1)")));
    }
    let harmonic: f64 = (1..=n).map(|i| 1.0 / i as f64).sum();
    Ok(n as f64 / (1.0 - p0) * harmonic)
}

/// Maximum of the inequality's left-hand side over all 2⁹ noncontextual
/// value assignments.
pub fn noncontextual_maximum() -> f64 {
    (0u32..512)
        .map(|bits| {
            let a = |k: usize| if bits >> k & 1 == 1 { -1i32 } else { 1 };
            CANONICAL_CONTEXTS
                .iter()
                .zip(CONTEXT_SIGNS)
                .map(|(ctx, s)| s as i32 * ctx.iter().map(|&k| a(k)).product::<i32>())
                .sum::<i32>()
        })
        .max()
        .expect("nonempty") as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub p: f64,
    pub report: InequalityReport,
    pub analytic: f64,
}

/// One simulated trajectory per grid point on its own RNG substream.
pub fn sweep_noise(
    square: &SquareOperators,
    grid: &[f64],
    rounds_per_point: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>, AnalysisError> {
    let perfect = TransitionMatrix::perfect(square)?;
    grid.par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let analytic = noisy_inequality_value(p)?;
            let chain = perfect.with_errors(p)?;
            let cfg = ExperimentConfig::new(rounds_per_point)
                .with_alignment(p)
                .with_seed(seed)
                .with_stream(i as u64);
            let traj = Simulator::new(square, &chain)?.run(&cfg)?;
            Ok(SweepPoint {
                p,
                report: analyze(&traj)?,
                analytic,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouponSummary {
    pub trials: usize,
    pub completed: usize,
    pub alignment_p: f64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// Closed-form value for independent uniform draws.
    pub analytic: f64,
    pub samples: Vec<usize>,
}

/// Upper limit on simulated rounds per coverage trial.
pub const COUPON_ROUND_CAP: usize = 100_000;

/// Coverage times of `trials` recycled trajectories, each on its own substream.
pub fn coupon_statistics(
    square: &SquareOperators,
    alignment_p: f64,
    trials: usize,
    seed: u64,
    burn_in: usize,
) -> Result<CouponSummary, AnalysisError> {
    if trials == 0 {
        return Err(AnalysisError::Domain("at least one trial is required".into()));
    }
    let chain = TransitionMatrix::perfect(square)?.with_errors(alignment_p)?;
    let sim = Simulator::new(square, &chain)?;
    let base = ExperimentConfig::new(burn_in + COUPON_ROUND_CAP)
        .with_burn_in(burn_in)
        .with_alignment(alignment_p)
        .with_seed(seed);
    let times: Vec<Option<usize>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            sim.run_until_covered(&base.clone().with_stream(i as u64))
                .map(|t| coupon_time(&t))
        })
        .collect::<Result<_, _>>()?;
    let samples: Vec<usize> = times.into_iter().flatten().collect();
    let k = samples.len() as f64;
    let mean = samples.iter().sum::<usize>() as f64 / k;
    let variance = if samples.len() > 1 {
        samples.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(CouponSummary {
        trials,
        completed: samples.len(),
        alignment_p,
        mean,
        variance,
        std_error: (variance / k).sqrt(),
        analytic: coupon_expectation(TRIPLE_STATES, 1.0 - alignment_p)?,
        samples,
    })
}
