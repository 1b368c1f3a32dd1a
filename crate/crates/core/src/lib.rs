//! State-recycling contextuality test on the Peres-Mermin square.
//!
//! A single two-qubit system is measured over and over in randomly chosen
//! contexts of the square, each round acting on the previous round's
//! post-measurement state. The sequence of post-measurement states is a
//! Markov chain over the 24 joint eigenstates (48 states once alignment
//! errors are allowed), and the usual noncontextuality inequality can be
//! evaluated from the recorded outcomes.
//!
//! - [`quantum`]: observables, contexts, triple eigenstates, Born rule.
//! - [`chain`]: transition matrices, stationary vectors, spectra, mixing.
//! - [`experiment`]: seeded Monte Carlo of the recycling protocol.
//! - [`analysis`]: correlators, the inequality, noise sweeps, coupon statistics.
//! - [`verify`]: the invariant suite behind `contextuality verify`.
//! - [`io`] and [`cli`]: file formats, run manifests and the command line.

pub mod analysis;
pub mod chain;
pub mod cli;
pub mod experiment;
pub mod io;
pub mod quantum;
pub mod verify;

pub use analysis::{CorrelatorSet, InequalityReport};
pub use chain::{ProbabilityVector, SpectralSummary, TransitionMatrix};
pub use experiment::{ExperimentConfig, MeasurementRecord, Mode, Trajectory};
pub use quantum::{ComplexMatrix, ContextId, SquareOperators, TripleState};
