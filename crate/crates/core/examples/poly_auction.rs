//! The polynomial procedure, one main-loop iteration at a time.

use cwe::instances::random_explicit;
use cwe::poly::PolyState;
use cwe::verifier::{brute_force_optimal, OracleCaps};
use cwe::is_cwe;

fn main() -> cwe::Result<()> {
    let (auction, _) = random_explicit(4, 4, 7, 16)?;
    let (y, opt) = brute_force_optimal(&auction, &OracleCaps::default())?;
    println!("optimal welfare {opt}, starting from {y:?}");

    let mut state = PolyState::new(&auction, &y)?;
    while state.serve_next(&auction)? {
        let held: Vec<_> = state.assignment.iter().map(|x| state.catalog.items_of(*x)).collect();
        println!("iteration {}: holdings {held:?}, pool {:?}", state.trace.iterations, state.pool);
        println!("  prices {:?}, leave order {:?}", state.prices, state.order);
    }
    let outcome = state.outcome();
    let summary = state.trace.replay().expect("trace replays");
    println!(
        "welfare {} ≥ {}: CWE {}, {} steals, deepest chain {}",
        outcome.social_welfare(&auction),
        opt.half(),
        is_cwe(&auction, &outcome)?.is_ok(),
        summary.steals,
        summary.max_steal_depth
    );
    Ok(())
}
