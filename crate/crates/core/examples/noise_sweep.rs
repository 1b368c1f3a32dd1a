//! Inequality value across alignment probabilities, as plot-ready CSV.

use contextuality::analysis::sweep_noise;
use contextuality::io::sweep_csv;
use contextuality::SquareOperators;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid: Vec<f64> = (0..=10).map(|k| (50 + 5 * k) as f64 / 100.0).collect();
    let points = sweep_noise(&SquareOperators::peres_mermin()?, &grid, 200_000, 1)?;
    print!("{}", sweep_csv(&points));
    let threshold = points.iter().find(|pt| pt.report.violated).map(|pt| pt.p);
    println!("# first violating grid point: {threshold:?} (crossover at p = 5/6)");
    Ok(())
}
