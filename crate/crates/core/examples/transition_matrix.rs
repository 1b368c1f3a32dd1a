//! Builds the perfect and noisy transition matrices and prints their
//! spectra and stationary distributions.

use contextuality::io::matrix_csv;
use contextuality::{SquareOperators, TransitionMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let square = SquareOperators::peres_mermin()?;
    let t = TransitionMatrix::perfect(&square)?;
    println!("first column of the perfect chain (units of 1/24):");
    let col: Vec<String> = t.column(0).iter().map(|x| format!("{}", (x * 24.0).round())).collect();
    println!("  {}", col.join(" "));
    println!("symmetric: {}", t.is_symmetric(1e-12));

    for p in [1.0, 0.9, 0.5] {
        let chain = if p == 1.0 { t.clone() } else { t.with_errors(p)? };
        let s = chain.spectrum()?;
        let pi = chain.stationary()?;
        println!(
            "\np = {p}: {} states, spectrum {:?}\n  pi[0] = {:.5}, pi[last] = {:.5}",
            chain.n(),
            s.groups.iter().map(|(v, m)| format!("{v:.4} x{m}")).collect::<Vec<_>>(),
            pi.as_slice()[0],
            pi.as_slice()[chain.n() - 1]
        );
    }

    if std::env::args().any(|a| a == "--csv") {
        print!("{}", matrix_csv(&t));
    }
    Ok(())
}
