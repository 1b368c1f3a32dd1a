//! Lists the 24 joint eigenstates, grouped by context, with their
//! entanglement and the Born probabilities of measuring context 5 on one of them.

use contextuality::quantum::{self, ContextId};
use contextuality::SquareOperators;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let square = SquareOperators::peres_mermin()?;
    let states = quantum::all_triple_states(&square)?;
    for s in &states {
        let kind = if quantum::is_product_state(&s.vector) {
            "product"
        } else {
            "entangled"
        };
        println!(
            "#{:2}  context {}  outcomes {:?}  purity {:.3}  {kind}",
            s.flat_index,
            s.context,
            s.outcomes,
            quantum::reduced_purity(&s.vector)
        );
    }

    let start = &states[0];
    let ctx = ContextId::new(5)?;
    println!("\nmeasuring context {ctx} on state #0:");
    for b in quantum::triple_eigenbasis(&square, ctx)? {
        let p = quantum::born_probability(&start.density_matrix(), &b)?;
        println!("  {:?}  p = {p:.4}", b.outcomes);
    }
    Ok(())
}
