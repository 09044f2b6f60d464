//! Walrasian item prices exist exactly when the configuration LP has an
//! integral optimum.

use cwe::instances::random_explicit;
use cwe::verifier::{brute_force_over_catalog, config_lp_fractional_opt, supporting_prices_exist, OracleCaps};
use cwe::Catalog;

fn main() -> cwe::Result<()> {
    let caps = OracleCaps::default();
    for seed in 0..12 {
        let (auction, _) = random_explicit(3, 3, seed, 8)?;
        let catalog = Catalog::singletons(3);
        let (x, integral) = brute_force_over_catalog(&auction, &catalog, &caps)?;
        let lp = config_lp_fractional_opt(&auction, &catalog, &caps)?;
        let prices = supporting_prices_exist(&auction, &catalog, &x, &caps)?;
        println!(
            "seed {seed:2}: integral {integral:<6} fractional {:<8} supported {}",
            lp.value,
            prices.map_or("no".to_string(), |p| format!("{p:?}"))
        );
    }
    Ok(())
}
