//! The state seen by a fresh measurement after the chain has mixed.

use contextuality::chain::effective_state;
use contextuality::quantum::{self, maximally_mixed};
use contextuality::{ProbabilityVector, SquareOperators, TransitionMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let square = SquareOperators::peres_mermin()?;
    let states = quantum::all_triple_states(&square)?;
    let t = TransitionMatrix::perfect(&square)?;
    let mut dist = ProbabilityVector::point_mass(24, 0);
    for step in 0..=6 {
        let rho = effective_state(&dist, &states)?;
        println!("t = {step}: max |rho - 1/4| = {:.3e}", rho.max_abs_diff(&maximally_mixed()));
        dist = t.step(&dist)?.distribution;
    }
    Ok(())
}
