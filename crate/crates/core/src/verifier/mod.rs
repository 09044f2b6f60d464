//! Exhaustive oracles for small instances: optimal welfare, the
//! configuration LP, existence of supporting bundle prices, and the best
//! welfare or revenue over every CWE.

pub mod lp;
pub mod partition;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{resource, Error, Result};
use crate::market::{AgentId, Auction, BundleId, BundleSet, Catalog, Outcome, PriceMap};
use crate::scalar::Scalar;
use crate::valuation::ItemSet;
use lp::{Lp, LpResult, Relation};

/// Size limits for the exhaustive oracles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleCaps {
    pub brute_items: usize,
    pub brute_agents: usize,
    pub lp_bundles: usize,
    pub lp_agents: usize,
    pub support_bundles: usize,
    pub max_cwe_items: usize,
    pub max_cwe_agents: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            brute_items: 8,
            brute_agents: 6,
            lp_bundles: 6,
            lp_agents: 6,
            support_bundles: 6,
            max_cwe_items: 5,
            max_cwe_agents: 5,
        }
    }
}

fn cap(what: &str, got: usize, limit: usize) -> Result<()> {
    if got > limit {
        return resource(format!("{what}: {got} exceeds the oracle cap of {limit}"));
    }
    Ok(())
}

/// Best way to split `k` units among agents, where `tables[i][mask]` is agent
/// `i`'s value for the units in `mask`. Units may stay unallocated.
fn partition_dp(tables: &[Vec<Scalar>], k: usize) -> (Vec<u64>, Scalar) {
    let n = tables.len();
    let size = 1usize << k;
    // best[i][u]: welfare of agents i.. sharing units u.
    let mut best = vec![vec![Scalar::zero(); size]; n + 1];
    let mut choice = vec![vec![0u64; size]; n];
    for i in (0..n).rev() {
        for u in 0..size {
            let mut top = best[i + 1][u].clone();
            let mut pick = 0u64;
            let mut s = u;
            while s != 0 {
                let cand = &tables[i][s] + &best[i + 1][u ^ s];
                if cand > top {
                    top = cand;
                    pick = s as u64;
                }
                s = (s - 1) & u;
            }
            best[i][u] = top;
            choice[i][u] = pick;
        }
    }
    let mut u = size - 1;
    let mut out = Vec::with_capacity(n);
    for row in &choice {
        let s = row[u];
        out.push(s);
        u ^= s as usize;
    }
    (out, best[0][size - 1].clone())
}

/// Welfare-optimal allocation with no size check.
pub(crate) fn optimal_allocation(auction: &Auction) -> (Vec<ItemSet>, Scalar) {
    let m = auction.m();
    let tables: Vec<Vec<Scalar>> = (0..auction.n())
        .map(|i| (0..1u64 << m).map(|s| auction.valuation(i).eval(ItemSet(s))).collect())
        .collect();
    let (sets, value) = partition_dp(&tables, m);
    (sets.into_iter().map(ItemSet).collect(), value)
}

/// Exact welfare-optimal allocation of the raw items.
pub fn brute_force_optimal(auction: &Auction, caps: &OracleCaps) -> Result<(Vec<ItemSet>, Scalar)> {
    cap("items", auction.m(), caps.brute_items)?;
    cap("agents", auction.n(), caps.brute_agents)?;
    Ok(optimal_allocation(auction))
}

/// Live bundles in id order, with the bundle-set of local indices mapped back.
fn local_ids(catalog: &Catalog) -> (Vec<BundleId>, impl Fn(u64) -> BundleSet + '_) {
    let ids: Vec<BundleId> = catalog.ids().collect();
    let ids2 = ids.clone();
    let to_set = move |mask: u64| BundleSet::from_ids((0..ids2.len()).filter(|j| mask >> j & 1 == 1).map(|j| ids2[j]));
    (ids, to_set)
}

fn induced_tables(auction: &Auction, catalog: &Catalog, ids: &[BundleId]) -> Vec<Vec<Scalar>> {
    let k = ids.len();
    (0..auction.n())
        .map(|i| {
            (0..1u64 << k)
                .map(|mask| {
                    let items = (0..k)
                        .filter(|j| mask >> j & 1 == 1)
                        .fold(ItemSet::EMPTY, |acc, j| acc.union(catalog.bundle(ids[j])));
                    auction.valuation(i).eval(items)
                })
                .collect()
        })
        .collect()
}

/// Exact welfare-optimal integral allocation of the catalog's bundles.
pub fn brute_force_over_catalog(auction: &Auction, catalog: &Catalog, caps: &OracleCaps) -> Result<(Vec<BundleSet>, Scalar)> {
    cap("catalog bundles", catalog.len(), caps.brute_items)?;
    cap("agents", auction.n(), caps.brute_agents)?;
    let (ids, to_set) = local_ids(catalog);
    let tables = induced_tables(auction, catalog, &ids);
    let (sets, value) = partition_dp(&tables, ids.len());
    Ok((sets.into_iter().map(to_set).collect(), value))
}

/// Weights `y[i, S]` of a fractional allocation of catalog bundles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FractionalAllocation {
    /// Only positive weights are listed.
    pub weights: Vec<(AgentId, BundleSet, Scalar)>,
}

impl FractionalAllocation {
    /// Checks the unit-demand and unit-supply constraints.
    pub fn is_feasible(&self, n: usize, catalog: &Catalog) -> bool {
        let mut per_agent = vec![Scalar::zero(); n];
        let mut per_bundle = vec![Scalar::zero(); catalog.slot_count()];
        for (i, s, y) in &self.weights {
            if y.is_negative() || *i >= n || !s.is_subset(catalog.live()) {
                return false;
            }
            per_agent[*i] += y;
            for b in s.iter() {
                per_bundle[b.0] += y;
            }
        }
        let one = Scalar::one();
        per_agent.iter().chain(&per_bundle).all(|x| x <= &one)
    }

    pub fn value(&self, auction: &Auction, catalog: &Catalog) -> Scalar {
        self.weights
            .iter()
            .map(|(i, s, y)| auction.valuation(*i).eval(catalog.items_of(*s)) * y)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LpOptimum {
    pub value: Scalar,
    pub allocation: FractionalAllocation,
}

/// Exact optimum of the configuration LP of the reduced market:
/// maximize `Σ v_i(S) y[i,S]` with every agent and every bundle used at most
/// once in total.
pub fn config_lp_fractional_opt(auction: &Auction, catalog: &Catalog, caps: &OracleCaps) -> Result<LpOptimum> {
    cap("catalog bundles", catalog.len(), caps.lp_bundles)?;
    cap("agents", auction.n(), caps.lp_agents)?;
    let (ids, to_set) = local_ids(catalog);
    let k = ids.len();
    let n = auction.n();
    let tables = induced_tables(auction, catalog, &ids);
    // Zero-valued columns never help and are left out.
    let columns: Vec<(AgentId, u64)> = (0..n)
        .flat_map(|i| (1..1u64 << k).map(move |mask| (i, mask)))
        .filter(|&(i, mask)| tables[i][mask as usize].is_positive())
        .collect();
    let mut lp = Lp::new(columns.iter().map(|&(i, mask)| tables[i][mask as usize].clone()).collect());
    for agent in 0..n {
        let row = columns.iter().map(|&(i, _)| if i == agent { Scalar::one() } else { Scalar::zero() }).collect();
        lp.add(row, Relation::Le, Scalar::one());
    }
    for j in 0..k {
        let row = columns.iter().map(|&(_, mask)| if mask >> j & 1 == 1 { Scalar::one() } else { Scalar::zero() }).collect();
        lp.add(row, Relation::Le, Scalar::one());
    }
    match lp.solve() {
        LpResult::Optimal { value, x } => {
            let weights = columns
                .iter()
                .zip(x)
                .filter(|(_, y)| y.is_positive())
                .map(|(&(i, mask), y)| (i, to_set(mask), y))
                .collect();
            Ok(LpOptimum { value, allocation: FractionalAllocation { weights } })
        }
        other => Err(Error::Internal(format!("configuration LP is bounded and feasible, solver said {other:?}"))),
    }
}

/// Prices making `assignment` stable over `catalog`, chosen to maximize the
/// revenue from assigned bundles, together with that revenue. `None` if no
/// such prices exist.
pub fn supporting_prices(
    auction: &Auction,
    catalog: &Catalog,
    assignment: &[BundleSet],
    caps: &OracleCaps,
) -> Result<Option<(PriceMap, Scalar)>> {
    cap("catalog bundles", catalog.len(), caps.support_bundles)?;
    Outcome {
        catalog: catalog.clone(),
        prices: PriceMap::uniform(catalog.slot_count(), Scalar::zero()),
        assignment: assignment.to_vec(),
    }
    .check(auction.n())?;
    let (ids, _) = local_ids(catalog);
    let k = ids.len();
    let tables = induced_tables(auction, catalog, &ids);
    let local = |set: BundleSet| -> u64 {
        ids.iter().enumerate().filter(|(_, id)| set.contains(**id)).fold(0, |acc, (j, _)| acc | 1 << j)
    };
    // p(X_i) − p(S) ≤ v_i(X_i) − v_i(S) for every agent and every S. Rows
    // with the same left side keep the tightest bound.
    let mut rows: BTreeMap<Vec<i8>, Scalar> = BTreeMap::new();
    for (i, x) in assignment.iter().enumerate() {
        let xm = local(*x);
        let held = &tables[i][xm as usize];
        for s in 0..1u64 << k {
            let coeffs: Vec<i8> = (0..k).map(|j| (xm >> j & 1) as i8 - (s >> j & 1) as i8).collect();
            let rhs = held - &tables[i][s as usize];
            if coeffs.iter().all(|&c| c <= 0) && !rhs.is_negative() {
                continue;
            }
            rows.entry(coeffs).and_modify(|r| {
                if &rhs < r {
                    *r = rhs.clone();
                }
            }).or_insert(rhs);
        }
    }
    let sold = assignment.iter().fold(BundleSet::EMPTY, |acc, x| acc.union(*x));
    let objective = ids.iter().map(|id| if sold.contains(*id) { Scalar::one() } else { Scalar::zero() }).collect();
    let mut lp = Lp::new(objective);
    for (coeffs, rhs) in rows {
        lp.add(coeffs.into_iter().map(|c| Scalar::from_int(c as i64)).collect(), Relation::Le, rhs);
    }
    match lp.solve() {
        LpResult::Infeasible => Ok(None),
        LpResult::Optimal { value, x } => {
            let mut prices = PriceMap::uniform(catalog.slot_count(), Scalar::zero());
            for (id, p) in ids.iter().zip(x) {
                prices.set(*id, p);
            }
            Ok(Some((prices, value)))
        }
        LpResult::Unbounded => Err(Error::Internal("assigned prices are capped by values; LP cannot be unbounded".into())),
    }
}

/// Prices under which `assignment` is stable over `catalog`, if any exist.
pub fn supporting_prices_exist(
    auction: &Auction,
    catalog: &Catalog,
    assignment: &[BundleSet],
    caps: &OracleCaps,
) -> Result<Option<PriceMap>> {
    Ok(supporting_prices(auction, catalog, assignment, caps)?.map(|(p, _)| p))
}

/// A stable assignment over a fixed catalog with its supporting prices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableAssignment {
    pub assignment: Vec<BundleSet>,
    pub prices: PriceMap,
    pub welfare: Scalar,
}

/// Every assignment of the catalog's bundles to agents (each bundle to one
/// agent or to nobody) that admits supporting prices.
pub fn enumerate_stable(auction: &Auction, catalog: &Catalog, caps: &OracleCaps) -> Result<Vec<StableAssignment>> {
    cap("catalog bundles", catalog.len(), caps.support_bundles)?;
    let ids: Vec<BundleId> = catalog.ids().collect();
    let n = auction.n();
    let mut owner = vec![0; ids.len()];
    let mut out = Vec::new();
    loop {
        let mut assignment = vec![BundleSet::EMPTY; n];
        for (j, &o) in owner.iter().enumerate() {
            if o < n {
                assignment[o].insert(ids[j]);
            }
        }
        if let Some(prices) = supporting_prices_exist(auction, catalog, &assignment, caps)? {
            let welfare =
                assignment.iter().enumerate().map(|(i, x)| auction.valuation(i).eval(catalog.items_of(*x))).sum();
            out.push(StableAssignment { assignment, prices, welfare });
        }
        // Odometer over owner ∈ {0, …, n} per bundle; n means unsold.
        let mut j = 0;
        loop {
            if j == owner.len() {
                return Ok(out);
            }
            if owner[j] < n {
                owner[j] += 1;
                break;
            }
            owner[j] = 0;
            j += 1;
        }
    }
}

/// An outcome shape: a partition of the items into bundles, at most one of
/// them unsold, and each agent holding at most one bundle.
#[derive(Clone, Debug)]
struct Candidate {
    catalog: Catalog,
    assignment: Vec<BundleSet>,
    welfare: Scalar,
}

/// Every outcome shape, sorted by welfare (highest first, enumeration order
/// on ties). Any CWE can be coarsened into one of these without changing
/// welfare or revenue: an agent's bundles merge into one, and so do all
/// unsold bundles, which only removes options from everyone else.
fn candidates(auction: &Auction, caps: &OracleCaps) -> Result<Vec<Candidate>> {
    cap("items", auction.m(), caps.max_cwe_items)?;
    cap("agents", auction.n(), caps.max_cwe_agents)?;
    let n = auction.n();
    let mut out = Vec::new();
    for blocks in partition::set_partitions(auction.m()) {
        let catalog = Catalog::new(auction.m(), blocks.clone())?;
        let r = blocks.len();
        // unsold = r means every block is sold.
        for unsold in 0..=r {
            let sold: Vec<usize> = (0..r).filter(|&b| b != unsold).collect();
            if sold.len() > n {
                continue;
            }
            let mut holder = vec![usize::MAX; sold.len()];
            let mut used = vec![false; n];
            injective_maps(0, &sold, &mut holder, &mut used, &mut |holder| {
                let mut assignment = vec![BundleSet::EMPTY; n];
                let mut welfare = Scalar::zero();
                for (pos, &b) in sold.iter().enumerate() {
                    assignment[holder[pos]] = BundleSet::singleton(BundleId(b));
                    welfare += auction.valuation(holder[pos]).eval(blocks[b]);
                }
                out.push(Candidate { catalog: catalog.clone(), assignment, welfare });
            });
        }
    }
    // Stable sort keeps enumeration order among equal welfare.
    out.sort_by(|a, b| b.welfare.cmp(&a.welfare));
    Ok(out)
}

fn injective_maps(
    pos: usize,
    sold: &[usize],
    holder: &mut Vec<usize>,
    used: &mut Vec<bool>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if pos == sold.len() {
        emit(holder);
        return;
    }
    for agent in 0..used.len() {
        if !used[agent] {
            used[agent] = true;
            holder[pos] = agent;
            injective_maps(pos + 1, sold, holder, used, emit);
            used[agent] = false;
        }
    }
}

fn witness(auction: &Auction, c: &Candidate, prices: PriceMap) -> Outcome {
    // Unsold bundles are priced out of reach; supporting prices already
    // make them undemanded, this just makes that obvious in reports.
    let mut prices = prices;
    let sold = c.assignment.iter().fold(BundleSet::EMPTY, |acc, x| acc.union(*x));
    for id in c.catalog.ids() {
        if !sold.contains(id) {
            prices.set(id, auction.prohibitive_price());
        }
    }
    Outcome { catalog: c.catalog.clone(), prices, assignment: c.assignment.clone() }
}

/// Largest social welfare of any CWE, with a witness.
pub fn max_cwe_welfare(auction: &Auction, caps: &OracleCaps) -> Result<(Scalar, Outcome)> {
    for c in candidates(auction, caps)? {
        if let Some(p) = supporting_prices_exist(auction, &c.catalog, &c.assignment, caps)? {
            let w = witness(auction, &c, p);
            return Ok((c.welfare, w));
        }
    }
    Err(Error::Internal("the all-unsold outcome is always a CWE".into()))
}

/// Largest revenue of any CWE, with a witness.
pub fn max_cwe_revenue(auction: &Auction, caps: &OracleCaps) -> Result<(Scalar, Outcome)> {
    let mut best: Option<(Scalar, Outcome)> = None;
    for c in candidates(auction, caps)? {
        // Revenue never exceeds welfare, so nothing later can win.
        if best.as_ref().is_some_and(|(r, _)| &c.welfare <= r) {
            break;
        }
        if let Some((p, rev)) = supporting_prices(auction, &c.catalog, &c.assignment, caps)? {
            if best.as_ref().is_none_or(|(r, _)| &rev > r) {
                best = Some((rev, witness(auction, &c, p)));
            }
        }
    }
    best.ok_or_else(|| Error::Internal("the all-unsold outcome is always a CWE".into()))
}
