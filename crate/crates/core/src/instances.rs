//! Named instances and a seeded random family.
//!
//! Every generator returns the auction together with its canonical initial
//! allocation `Y`, indexed by agent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::market::Auction;
use crate::scalar::Scalar;
use crate::valuation::{ItemSet, Valuation, MAX_EXPLICIT_ITEMS};
use crate::verifier;

pub const DEFAULT_DENOMINATOR: u64 = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum InstanceSpec {
    Gap3 { epsilon: Scalar },
    ItemPricingUmSm { m: usize, epsilon: Scalar },
    ItemPricingXos { m: usize, delta: Scalar },
    LognRevenue { n: usize },
    RandomExplicit { n: usize, m: usize, seed: u64, denominator: u64 },
}

impl InstanceSpec {
    pub const NAMES: [&'static str; 5] = ["gap3", "item_pricing_um_sm", "item_pricing_xos", "logn_revenue", "random_explicit"];

    pub fn name(&self) -> &'static str {
        match self {
            InstanceSpec::Gap3 { .. } => "gap3",
            InstanceSpec::ItemPricingUmSm { .. } => "item_pricing_um_sm",
            InstanceSpec::ItemPricingXos { .. } => "item_pricing_xos",
            InstanceSpec::LognRevenue { .. } => "logn_revenue",
            InstanceSpec::RandomExplicit { .. } => "random_explicit",
        }
    }

    pub fn generate(&self) -> Result<(Auction, Vec<ItemSet>)> {
        match self {
            InstanceSpec::Gap3 { epsilon } => gap3(epsilon),
            InstanceSpec::ItemPricingUmSm { m, epsilon } => item_pricing_um_sm(*m, epsilon),
            InstanceSpec::ItemPricingXos { m, delta } => item_pricing_xos(*m, delta),
            InstanceSpec::LognRevenue { n } => logn_revenue(*n),
            InstanceSpec::RandomExplicit { n, m, seed, denominator } => random_explicit(*n, *m, *seed, *denominator),
        }
    }
}

/// Three items, three agents: agent `i` values item `i` at 1 and the other
/// two items together at `2 + ε`. Unlisted subsets get the monotone closure.
/// `Y` gives item `i` to agent `i`.
pub fn gap3(epsilon: &Scalar) -> Result<(Auction, Vec<ItemSet>)> {
    if !epsilon.is_positive() {
        return input(format!("gap3 needs ε > 0, got {epsilon}"));
    }
    let full = ItemSet::full(3);
    let pair = Scalar::from_int(2) + epsilon;
    let vals = (0..3)
        .map(|i| {
            let own = ItemSet::singleton(i);
            Valuation::explicit_from_partial(3, &[(own, Scalar::one()), (full.difference(own), pair.clone())])
        })
        .collect::<Result<Vec<_>>>()?;
    let auction = Auction::anonymous(3, vals)?;
    Ok((auction, (0..3).map(ItemSet::singleton).collect()))
}

/// Agent 1 is unit-demand with value `1 + ε` for any non-empty set; agent 2
/// wants all `m` items for `m`. `Y` gives everything to agent 2.
pub fn item_pricing_um_sm(m: usize, epsilon: &Scalar) -> Result<(Auction, Vec<ItemSet>)> {
    if m < 2 {
        return input(format!("item_pricing_um_sm needs m ≥ 2, got {m}"));
    }
    if !epsilon.is_positive() {
        return input(format!("item_pricing_um_sm needs ε > 0, got {epsilon}"));
    }
    let full = ItemSet::full(m);
    let unit = Valuation::unit_demand(vec![Scalar::one() + epsilon; m]);
    let single = Valuation::single_minded(m, full, Scalar::from_int(m as i64))?;
    let auction = Auction::anonymous(m, vec![unit, single])?;
    Ok((auction, vec![ItemSet::EMPTY, full]))
}

/// Agent 1 is unit-demand with value `1/2 − δ`; agent 2 values any `k` items
/// at `max(1, k/2)`, written as the clauses "1/2 on every item" and "1 on item
/// j" for each `j`. Requires `0 ≤ δ < 1/(2(m−1))`. `Y` gives everything to
/// agent 2.
pub fn item_pricing_xos(m: usize, delta: &Scalar) -> Result<(Auction, Vec<ItemSet>)> {
    if m < 2 {
        return input(format!("item_pricing_xos needs m ≥ 2, got {m}"));
    }
    let bound = Scalar::ratio(1, 2 * (m as i64 - 1));
    if delta.is_negative() || delta >= &bound {
        return input(format!("item_pricing_xos needs 0 ≤ δ < 1/(2(m−1)) = {bound}, got δ = {delta}"));
    }
    let half = Scalar::ratio(1, 2);
    let unit = Valuation::unit_demand(vec![&half - delta; m]);
    let mut clauses = vec![vec![half; m]];
    for j in 0..m {
        let mut c = vec![Scalar::zero(); m];
        c[j] = Scalar::one();
        clauses.push(c);
    }
    let xos = Valuation::xos(m, clauses)?;
    let auction = Auction::anonymous(m, vec![unit, xos])?;
    Ok((auction, vec![ItemSet::EMPTY, ItemSet::full(m)]))
}

/// `n` items and `n` unit-demand agents; agent `i` values each item at
/// `1/i`. `Y` gives item `i` to agent `i`.
pub fn logn_revenue(n: usize) -> Result<(Auction, Vec<ItemSet>)> {
    if n == 0 {
        return input("logn_revenue needs n ≥ 1");
    }
    let vals = (1..=n as i64).map(|i| Valuation::unit_demand(vec![Scalar::ratio(1, i); n])).collect();
    let auction = Auction::anonymous(n, vals)?;
    Ok((auction, (0..n).map(ItemSet::singleton).collect()))
}

/// `n` agents with explicit valuations over `m` items. Each subset draws a
/// value `k / denominator` with `k` uniform in `0..=2·denominator`; the table
/// is then closed upward under inclusion. `Y` is a welfare-optimal
/// allocation.
pub fn random_explicit(n: usize, m: usize, seed: u64, denominator: u64) -> Result<(Auction, Vec<ItemSet>)> {
    if n == 0 || m == 0 {
        return input(format!("random_explicit needs n ≥ 1 and m ≥ 1, got n = {n}, m = {m}"));
    }
    if m > MAX_EXPLICIT_ITEMS {
        return input(format!("random_explicit supports at most {MAX_EXPLICIT_ITEMS} items, got {m}"));
    }
    if denominator == 0 || denominator > i64::MAX as u64 / 2 {
        return input(format!("random_explicit denominator out of range: {denominator}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = denominator as i64;
    let vals = (0..n)
        .map(|_| {
            let mut table: Vec<i64> = (0..1usize << m).map(|_| rng.random_range(0..=2 * den)).collect();
            table[0] = 0;
            for bit in 0..m {
                for mask in 0..(1usize << m) {
                    if mask & (1 << bit) != 0 {
                        table[mask] = table[mask].max(table[mask ^ (1 << bit)]);
                    }
                }
            }
            Valuation::explicit(m, table.into_iter().map(|k| Scalar::ratio(k, den)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let auction = Auction::anonymous(m, vals)?;
    let (y, _) = verifier::optimal_allocation(&auction);
    Ok((auction, y))
}
