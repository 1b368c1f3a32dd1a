//! Markov chains over post-measurement states.
//!
//! Matrices are column-stochastic: `get(to, from)` is the probability of
//! moving from state `from` to state `to`, so a distribution evolves as
//! `p(t+1) = T p(t)`. States 0..24 are the triple states in flat-index order;
//! the noisy chain appends 24 error states (24 + 4(j−1) + e).

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use thiserror::Error;

use crate::quantum::{self, ComplexMatrix, QuantumError, SquareOperators, TripleState, TRIPLE_STATES};

/// Normalization tolerance for probability vectors and column sums.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Eigenvalues closer than this are reported as one group.
pub const EIGEN_GROUP_TOL: f64 = 1e-9;

/// Imaginary parts above this are reported on non-symmetric spectra.
pub const IMAGINARY_WARN_TOL: f64 = 1e-10;

const STATIONARY_TV_TOL: f64 = 1e-14;
const STATIONARY_MAX_ITER: usize = 100_000;
const SCHUR_MAX_ITER: usize = 10_000;

/// State count of the noisy chain.
pub const NOISY_STATES: usize = 2 * TRIPLE_STATES;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("iteration did not converge in {0} steps")]
    NoConvergence(usize),
    #[error("matrix is not stochastic: {0}")]
    NotStochastic(String),
    #[error("not a probability vector: {0}")]
    NotNormalized(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Nonnegative vector summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ChainError> {
        if values.is_empty() {
            return Err(ChainError::NotNormalized("empty vector".into()));
        }
        if let Some(v) = values.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(ChainError::NotNormalized(format!("negative or NaN entry {v}")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(ChainError::NotNormalized(format!("sum is {sum}")));
        }
        Ok(Self(values))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, index: usize) -> Self {
        assert!(index < n, "point mass index {index} out of range for {n} states");
        let mut v = vec![0.0; n];
        v[index] = 1.0;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Result of one evolution step.
#[derive(Debug, Clone, PartialEq)]
pub struct Stepped {
    pub distribution: ProbabilityVector,
    /// Set when the raw product drifted from unit mass by more than the
    /// tolerance and was renormalized.
    pub drift: Option<f64>,
}

/// Column-stochastic transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Row-major entries; validated for range and column sums.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self, ChainError> {
        if entries.len() != n * n {
            return Err(ChainError::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        let m = Self { n, entries };
        m.check_stochastic()?;
        Ok(m)
    }

    /// Perfect 24-state chain: entry (b', b) = Tr(M_b M_b') / 6.
    pub fn perfect(square: &SquareOperators) -> Result<Self, ChainError> {
        let states = quantum::all_triple_states(square)?;
        Ok(Self::from_triple_states(&states))
    }

    pub fn from_triple_states(states: &[TripleState]) -> Self {
        let n = states.len();
        let mut entries = vec![0.0; n * n];
        for (r, to) in states.iter().enumerate() {
            for (c, from) in states.iter().enumerate() {
                entries[r * n + c] = (&from.projector * &to.projector).trace().re / 6.0;
            }
        }
        Self { n, entries }
    }

    /// Noisy 48-state chain with alignment probability `p`:
    /// `[[p T, p/24 J], [(1−p)/24 J, (1−p)/24 J]]` with J the all-ones block.
    pub fn with_errors(&self, p: f64) -> Result<Self, ChainError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ChainError::Domain(format!("alignment probability {p} outside [0, 1]")));
        }
        if self.n != TRIPLE_STATES {
            return Err(ChainError::DimensionMismatch {
                expected: TRIPLE_STATES,
                found: self.n,
            });
        }
        let n = NOISY_STATES;
        let h = TRIPLE_STATES;
        let mut entries = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                entries[r * n + c] = match (r < h, c < h) {
                    (true, true) => p * self.get(r, c),
                    (true, false) => p / 24.0,
                    (false, _) => (1.0 - p) / 24.0,
                };
            }
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Probability of moving from `from` to `to`.
    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.entries[to * self.n + from]
    }

    pub fn row_major(&self) -> &[f64] {
        &self.entries
    }

    pub fn column(&self, from: usize) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, from)).collect()
    }

    /// Largest |column sum − 1|.
    pub fn column_sum_error(&self) -> f64 {
        (0..self.n)
            .map(|c| ((0..self.n).map(|r| self.get(r, c)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn row_sum_error(&self) -> f64 {
        (0..self.n)
            .map(|r| (self.entries[r * self.n..(r + 1) * self.n].iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.n {
            for c in r + 1..self.n {
                worst = worst.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    fn check_stochastic(&self) -> Result<(), ChainError> {
        if let Some(v) = self.entries.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(ChainError::NotStochastic(format!("entry {v} outside [0, 1]")));
        }
        let err = self.column_sum_error();
        if err > STOCHASTIC_TOL {
            return Err(ChainError::NotStochastic(format!("column sums off by {err:e}")));
        }
        Ok(())
    }

    fn apply(&self, p: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                self.entries[r * self.n..(r + 1) * self.n]
                    .iter()
                    .zip(p)
                    .map(|(t, x)| t * x)
                    .sum()
            })
            .collect()
    }

    /// `p(t+1) = T p(t)`, renormalized only if the mass drifts.
    pub fn step(&self, p: &ProbabilityVector) -> Result<Stepped, ChainError> {
        if p.len() != self.n {
            return Err(ChainError::DimensionMismatch {
                expected: self.n,
                found: p.len(),
            });
        }
        let mut next = self.apply(p.as_slice());
        let sum: f64 = next.iter().sum();
        let drift = if (sum - 1.0).abs() > STOCHASTIC_TOL {
            next.iter_mut().for_each(|x| *x /= sum);
            Some(sum - 1.0)
        } else {
            None
        };
        Ok(Stepped {
            distribution: ProbabilityVector(next),
            drift,
        })
    }

    /// `T^t p`.
    pub fn evolve(&self, p: &ProbabilityVector, t: usize) -> Result<ProbabilityVector, ChainError> {
        let mut cur = p.clone();
        for _ in 0..t {
            cur = self.step(&cur)?.distribution;
        }
        Ok(cur)
    }

    /// Stationary distribution by power iteration from the uniform vector.
    pub fn stationary(&self) -> Result<ProbabilityVector, ChainError> {
        let mut cur = ProbabilityVector::uniform(self.n);
        for _ in 0..STATIONARY_MAX_ITER {
            let next = self.step(&cur)?.distribution;
            let moved = tv_distance(&cur, &next)?;
            cur = next;
            if moved < STATIONARY_TV_TOL {
                let residual = self
                    .apply(cur.as_slice())
                    .iter()
                    .zip(cur.as_slice())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if residual > STOCHASTIC_TOL {
                    return Err(ChainError::NotStochastic(format!(
                        "fixed point residual {residual:e}"
                    )));
                }
                return Ok(cur);
            }
        }
        Err(ChainError::NoConvergence(STATIONARY_MAX_ITER))
    }

    pub fn spectrum(&self) -> Result<SpectralSummary, ChainError> {
        let m = DMatrix::from_row_slice(self.n, self.n, &self.entries);
        if self.is_symmetric(STOCHASTIC_TOL) {
            let values = m.symmetric_eigenvalues().iter().copied().collect();
            return Ok(SpectralSummary::from_values(values, 0.0));
        }
        if let Some(sym) = self.symmetrized()? {
            let values = sym.symmetric_eigenvalues().iter().copied().collect();
            return Ok(SpectralSummary::from_values(values, 0.0));
        }
        let schur = Schur::try_new(m, f64::EPSILON, SCHUR_MAX_ITER).ok_or(ChainError::NoConvergence(SCHUR_MAX_ITER))?;
        let eig = schur.complex_eigenvalues();
        let max_im = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        Ok(SpectralSummary::from_values(eig.iter().map(|z| z.re).collect(), max_im))
    }

    /// D^{-1/2} T D^{1/2} with D = diag(π), if π > 0 and T is reversible.
    fn symmetrized(&self) -> Result<Option<DMatrix<f64>>, ChainError> {
        let pi = self.stationary()?;
        let pi = pi.as_slice();
        if pi.iter().any(|&x| x <= 0.0) {
            return Ok(None);
        }
        for i in 0..self.n {
            for j in 0..i {
                if (pi[j] * self.get(i, j) - pi[i] * self.get(j, i)).abs() > STOCHASTIC_TOL {
                    return Ok(None);
                }
            }
        }
        Ok(Some(DMatrix::from_fn(self.n, self.n, |i, j| {
            self.get(i, j) * (pi[j] / pi[i]).sqrt()
        })))
    }

    /// d(t): worst case over point-mass starts of TV(T^t δ_s, π).
    pub fn worst_case_distance(&self, t: usize) -> Result<f64, ChainError> {
        Ok(*self.distance_profile(t)?.last().expect("nonempty profile"))
    }

    /// d(0), d(1), …, d(t_max).
    pub fn distance_profile(&self, t_max: usize) -> Result<Vec<f64>, ChainError> {
        let pi = self.stationary()?;
        let mut dists: Vec<ProbabilityVector> =
            (0..self.n).map(|s| ProbabilityVector::point_mass(self.n, s)).collect();
        let mut profile = Vec::with_capacity(t_max + 1);
        for t in 0..=t_max {
            if t > 0 {
                for d in dists.iter_mut() {
                    *d = self.step(d)?.distribution;
                }
            }
            let worst = dists
                .iter()
                .map(|d| tv_distance(d, &pi))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            profile.push(worst);
        }
        Ok(profile)
    }

    /// First t ≤ t_max with d(t) ≤ ε.
    pub fn mixing_time(&self, epsilon: f64, t_max: usize) -> Result<Option<usize>, ChainError> {
        Ok(self.distance_profile(t_max)?.iter().position(|&d| d <= epsilon))
    }
}

/// Eigenvalues sorted descending with near-equal values grouped.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    /// Largest eigenvalue after removing one copy of the leading one.
    pub second_largest: f64,
    /// (representative value, multiplicity), descending.
    pub groups: Vec<(f64, usize)>,
    /// Largest imaginary part discarded; nonzero only for non-symmetric input.
    pub max_imaginary: f64,
}

impl SpectralSummary {
    fn from_values(mut values: Vec<f64>, max_imaginary: f64) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        let mut groups: Vec<(f64, usize)> = Vec::new();
        for &v in &values {
            match groups.last_mut() {
                Some((rep, count)) if (*rep - v).abs() <= EIGEN_GROUP_TOL => *count += 1,
                _ => groups.push((v, 1)),
            }
        }
        let second_largest = values.get(1).copied().unwrap_or(f64::NAN);
        Self {
            eigenvalues: values,
            second_largest,
            groups,
            max_imaginary,
        }
    }

    /// Number of eigenvalues within the grouping tolerance of `value`.
    pub fn multiplicity(&self, value: f64) -> usize {
        self.eigenvalues
            .iter()
            .filter(|v| (*v - value).abs() <= EIGEN_GROUP_TOL)
            .count()
    }

    pub fn has_complex_warning(&self) -> bool {
        self.max_imaginary > IMAGINARY_WARN_TOL
    }
}

/// Total variation distance, ½ Σ |μ_q − ν_q|.
pub fn tv_distance(mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<f64, ChainError> {
    if mu.len() != nu.len() {
        return Err(ChainError::DimensionMismatch {
            expected: mu.len(),
            found: nu.len(),
        });
    }
    Ok(0.5
        * mu.as_slice()
            .iter()
            .zip(nu.as_slice())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Upper bound on the mixing time of the perfect chain,
/// (3/2)·ln(24/ε), natural log.
pub fn mixing_time_bound(epsilon: f64) -> Result<f64, ChainError> {
    mixing_time_bound_general(1.0 / 24.0, 1.0 / 3.0, epsilon)
}

/// ln(1/(ε π_min)) / (1 − λ_*).
pub fn mixing_time_bound_general(pi_min: f64, lambda_star: f64, epsilon: f64) -> Result<f64, ChainError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ChainError::Domain(format!("epsilon {epsilon} outside (0, 1)")));
    }
    if !(pi_min > 0.0 && pi_min <= 1.0) {
        return Err(ChainError::Domain(format!("minimum stationary mass {pi_min} outside (0, 1]")));
    }
    if lambda_star.is_nan() || lambda_star >= 1.0 {
        return Err(ChainError::Domain(format!("second eigenvalue {lambda_star} is not below 1")));
    }
    Ok((1.0 / (epsilon * pi_min)).ln() / (1.0 - lambda_star))
}

/// Σ_q π_q |b_q⟩⟨b_q| over the 24 triple states.
pub fn effective_state(pi: &ProbabilityVector, states: &[TripleState]) -> Result<ComplexMatrix, ChainError> {
    if pi.len() != TRIPLE_STATES {
        return Err(ChainError::DimensionMismatch {
            expected: TRIPLE_STATES,
            found: pi.len(),
        });
    }
    if states.len() != TRIPLE_STATES {
        return Err(ChainError::DimensionMismatch {
            expected: TRIPLE_STATES,
            found: states.len(),
        });
    }
    Ok(states
        .iter()
        .zip(pi.as_slice())
        .fold(ComplexMatrix::zeros(quantum::DIM), |acc, (s, &w)| {
            &acc + &s.projector.scale(Complex64::new(w, 0.0))
        }))
}
