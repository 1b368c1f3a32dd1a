//! Worst-case distance to stationarity against the spectral bound.

use contextuality::chain::mixing_time_bound;
use contextuality::{SquareOperators, TransitionMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = TransitionMatrix::perfect(&SquareOperators::peres_mermin()?)?;
    let profile = t.distance_profile(12)?;
    for (step, d) in profile.iter().enumerate() {
        let ratio = if step > 1 { d / profile[step - 1] } else { f64::NAN };
        println!("t = {step:2}  d(t) = {d:.3e}  ratio {ratio:.4}");
    }
    println!();
    for eps in [1e-3, 1e-5, 1e-10] {
        let bound = mixing_time_bound(eps)?;
        let actual = t.mixing_time(eps, bound.ceil() as usize)?;
        println!("eps = {eps:e}: bound {bound:.2}, first t with d(t) <= eps: {actual:?}");
    }
    Ok(())
}
