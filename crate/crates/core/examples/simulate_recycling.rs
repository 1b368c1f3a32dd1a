//! One recycled trajectory in each mode, with the inequality evaluated on it.
//!
//! Usage: `cargo run --release --example simulate_recycling -- [rounds] [p]`

use contextuality::analysis::{analyze, noisy_inequality_value};
use contextuality::experiment::Simulator;
use contextuality::io::trajectory_csv;
use contextuality::{ExperimentConfig, Mode, SquareOperators, TransitionMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let rounds: usize = args.next().map_or(Ok(200_000), |s| s.parse())?;
    let p: f64 = args.next().map_or(Ok(0.9), |s| s.parse())?;

    let square = SquareOperators::peres_mermin()?;
    let chain = TransitionMatrix::perfect(&square)?.with_errors(p)?;
    let sim = Simulator::new(&square, &chain)?;
    for mode in [Mode::Chain, Mode::Quantum] {
        let cfg = ExperimentConfig::new(rounds).with_alignment(p).with_seed(7).with_mode(mode);
        let traj = sim.run(&cfg)?;
        let r = analyze(&traj)?;
        println!(
            "{mode:?}: value {:.4} +/- {:.4} (expected {:.4}), violated {}",
            r.value,
            r.std_error,
            noisy_inequality_value(p)?,
            r.violated
        );
        println!("  correlators {:?}", r.correlators.map(|c| (c * 1e4).round() / 1e4));
    }

    let head = sim.run(&ExperimentConfig::new(8).with_burn_in(0).with_alignment(p).with_seed(7))?;
    print!("\nfirst rounds:\n{}", trajectory_csv(&head));
    Ok(())
}
