//! Three items, three agents, and a welfare gap no CWE can close.

use cwe::instances::gap3;
use cwe::verifier::{brute_force_optimal, max_cwe_welfare, OracleCaps};
use cwe::Scalar;

fn main() -> cwe::Result<()> {
    let eps: Scalar = "1/10".parse().unwrap();
    let (auction, _) = gap3(&eps)?;
    let caps = OracleCaps::default();

    let (best, opt) = brute_force_optimal(&auction, &caps)?;
    println!("optimal welfare {opt} with allocation {best:?}");

    let (sw, witness) = max_cwe_welfare(&auction, &caps)?;
    println!("best CWE welfare {sw}, ratio {}", &sw / &opt);
    for (i, x) in witness.assignment.iter().enumerate() {
        if !x.is_empty() {
            println!("  agent {i} buys {:?} at {}", witness.catalog.items_of(*x), witness.prices.of(*x));
        }
    }
    Ok(())
}
