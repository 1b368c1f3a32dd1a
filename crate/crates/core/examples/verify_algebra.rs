//! Runs the invariant suite on the canonical square, then on a square with
//! one observable's sign flipped.

use contextuality::quantum::CANONICAL_CONTEXTS;
use contextuality::verify::run_checks;
use contextuality::SquareOperators;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let square = SquareOperators::peres_mermin()?;
    let report = run_checks(&square);
    print!("{}", report.table());
    println!("all passed: {}\n", report.passed);

    let mut obs = square.observables().to_vec();
    obs[0] = obs[0].scale_real(-1.0);
    let broken = SquareOperators::from_parts_unchecked(obs, CANONICAL_CONTEXTS);
    print!("{}", run_checks(&broken).table());
    Ok(())
}
