//! Uniform price shifts trade welfare for revenue.

use cwe::instances::logn_revenue;
use cwe::maximize_revenue;
use cwe::verifier::{brute_force_optimal, OracleCaps};

fn main() -> cwe::Result<()> {
    let (auction, _) = logn_revenue(4)?;
    let (y, opt) = brute_force_optimal(&auction, &OracleCaps::default())?;
    let run = maximize_revenue(&auction, &y)?;
    let ladder = &run.ladder;
    println!("optimum {opt}; base welfare {} held by {} agents, ℓ = {}", ladder.sw0, ladder.k, ladder.ell);
    for level in &ladder.levels {
        println!("t = {}  σ = {:<6} welfare {:<6} revenue {:<6} buyers {:?}", level.t, level.sigma, level.sw, level.rev, level.survivors);
    }
    println!("picked t* = {} with revenue {} (floor {})", run.t_star, run.revenue, ladder.guarantee());
    Ok(())
}
