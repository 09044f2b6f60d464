//! Item prices alone (no bundling, no market clearing) on the two
//! lower-bound families: every stable outcome of the first sells one item.
//! The second prints the stable outcomes that sell more than one.

use cwe::instances::{item_pricing_um_sm, item_pricing_xos};
use cwe::verifier::{brute_force_optimal, enumerate_stable, OracleCaps};
use cwe::Catalog;

fn main() -> cwe::Result<()> {
    let caps = OracleCaps::default();
    for m in 2..=5 {
        let (auction, _) = item_pricing_um_sm(m, &"1/10".parse().unwrap())?;
        let (_, opt) = brute_force_optimal(&auction, &caps)?;
        let stable = enumerate_stable(&auction, &Catalog::singletons(m), &caps)?;
        let best = stable.iter().map(|s| s.welfare.clone()).max().expect("selling nothing is stable");
        println!("unit-demand vs single-minded, m = {m}: best stable {best}, optimum {opt}");
    }

    let (auction, _) = item_pricing_xos(3, &"1/8".parse().unwrap())?;
    let (_, opt) = brute_force_optimal(&auction, &caps)?;
    let stable = enumerate_stable(&auction, &Catalog::singletons(3), &caps)?;
    println!("unit-demand vs XOS, m = 3: optimum {opt}, {} stable outcomes", stable.len());
    for s in stable.iter().filter(|s| s.assignment.iter().map(|x| x.len()).sum::<usize>() > 1) {
        println!("  sells {:?} at {:?}, welfare {}", s.assignment, s.prices, s.welfare);
    }
    Ok(())
}
