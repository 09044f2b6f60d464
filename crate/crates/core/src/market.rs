//! The auction model: catalogs of indivisible bundles, linear bundle prices,
//! quasi-linear utilities, demand correspondences and the CWE stability test.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{input, resource, Error, Result};
use crate::scalar::Scalar;
use crate::valuation::{ItemSet, Valuation, MAX_ITEMS};

/// Demand queries enumerate every subset of the available bundles; more than
/// this many bundles is refused with a resource error.
pub const DEMAND_ENUMERATION_CAP: usize = 20;
/// Bundle ids are slots in a 64-bit mask; merges append new slots.
pub const MAX_BUNDLE_SLOTS: usize = 64;

pub type AgentId = usize;

/// Stable identifier of a catalog bundle. Merging retires the parts and
/// appends the union under a fresh id; ids are never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BundleId(pub usize);

/// A set of catalog bundles.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BundleSet(pub u64);

impl BundleSet {
    pub const EMPTY: BundleSet = BundleSet(0);

    pub fn singleton(id: BundleId) -> BundleSet {
        BundleSet(1u64 << id.0)
    }

    pub fn from_ids<I: IntoIterator<Item = BundleId>>(ids: I) -> BundleSet {
        BundleSet(ids.into_iter().fold(0, |acc, b| acc | (1u64 << b.0)))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, id: BundleId) -> bool {
        id.0 < 64 && self.0 & (1u64 << id.0) != 0
    }

    pub fn insert(&mut self, id: BundleId) {
        self.0 |= 1u64 << id.0;
    }

    pub fn remove(&mut self, id: BundleId) {
        self.0 &= !(1u64 << id.0);
    }

    pub fn union(self, other: BundleSet) -> BundleSet {
        BundleSet(self.0 | other.0)
    }

    pub fn intersection(self, other: BundleSet) -> BundleSet {
        BundleSet(self.0 & other.0)
    }

    pub fn difference(self, other: BundleSet) -> BundleSet {
        BundleSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: BundleSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: BundleSet) -> bool {
        self.0 & other.0 == 0
    }

    /// The single member, if there is exactly one.
    pub fn only(self) -> Option<BundleId> {
        (self.len() == 1).then(|| BundleId(self.0.trailing_zeros() as usize))
    }

    pub fn iter(self) -> impl Iterator<Item = BundleId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(BundleId(i))
            }
        })
    }

    /// Lexicographic order of the ascending id sequences.
    pub fn lex_cmp(self, other: BundleSet) -> Ordering {
        self.iter().map(|b| b.0).cmp(other.iter().map(|b| b.0))
    }
}

impl fmt::Debug for BundleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|b| b.0)).finish()
    }
}

impl Serialize for BundleSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(|b| b.0))
    }
}

impl Serialize for ItemSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agent {
    pub name: String,
    pub valuation: Valuation,
}

/// Items plus buyers with their valuations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Auction {
    items: Vec<String>,
    agents: Vec<Agent>,
}

impl Auction {
    pub fn new(items: Vec<String>, agents: Vec<Agent>) -> Result<Auction> {
        if items.len() > MAX_ITEMS {
            return input(format!("at most {MAX_ITEMS} items are supported, got {}", items.len()));
        }
        let mut seen = HashSet::new();
        for it in &items {
            if !seen.insert(it.as_str()) {
                return input(format!("duplicate item identifier {it:?}"));
            }
        }
        let mut names = HashSet::new();
        for a in &agents {
            if !names.insert(a.name.as_str()) {
                return input(format!("duplicate agent name {:?}", a.name));
            }
            if a.valuation.items() != items.len() {
                return input(format!(
                    "agent {:?} has a valuation over {} items, auction has {}",
                    a.name,
                    a.valuation.items(),
                    items.len()
                ));
            }
            if let Err(v) = a.valuation.validate() {
                return input(format!("agent {:?}: {v}", a.name));
            }
        }
        Ok(Auction { items, agents })
    }

    /// Items named `0..m`, agents named `1..=n`.
    pub fn anonymous(m: usize, valuations: Vec<Valuation>) -> Result<Auction> {
        let items = (1..=m).map(|i| i.to_string()).collect();
        let agents = valuations
            .into_iter()
            .enumerate()
            .map(|(i, valuation)| Agent { name: format!("agent{}", i + 1), valuation })
            .collect();
        Auction::new(items, agents)
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn m(&self) -> usize {
        self.items.len()
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn valuation(&self, agent: AgentId) -> &Valuation {
        &self.agents[agent].valuation
    }

    pub fn universe(&self) -> ItemSet {
        ItemSet::full(self.m())
    }

    pub fn item_index(&self, name: &str) -> Result<usize> {
        self.items
            .iter()
            .position(|i| i == name)
            .ok_or_else(|| Error::Input(format!("unknown item identifier {name:?}")))
    }

    pub fn agent_index(&self, name: &str) -> Result<AgentId> {
        self.agents
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::Input(format!("unknown agent {name:?}")))
    }

    /// A price no agent would pay for anything: `1 + Σ_i v_i(M)`.
    pub fn prohibitive_price(&self) -> Scalar {
        Scalar::one() + self.agents.iter().map(|a| a.valuation.eval(self.universe())).sum::<Scalar>()
    }

    /// Welfare of an item-level allocation (one item set per agent).
    pub fn welfare_of(&self, allocation: &[ItemSet]) -> Scalar {
        allocation.iter().enumerate().map(|(i, s)| self.valuation(i).eval(*s)).sum()
    }

    /// Checks that an item-level allocation has one entry per agent, stays in
    /// the universe and is pairwise disjoint.
    pub fn check_allocation(&self, allocation: &[ItemSet]) -> Result<()> {
        if allocation.len() != self.n() {
            return input(format!("allocation has {} entries for {} agents", allocation.len(), self.n()));
        }
        let mut used = ItemSet::EMPTY;
        for (i, s) in allocation.iter().enumerate() {
            if !s.is_subset(self.universe()) {
                return input(format!("allocation for agent {i} mentions unknown items"));
            }
            if !used.is_disjoint(*s) {
                return input(format!("initial allocation overlaps: agent {i} shares items {:?}", used.intersection(*s)));
            }
            used = used.union(*s);
        }
        Ok(())
    }
}

/// The reduced market: disjoint bundles on sale plus the withheld items.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Catalog {
    items: usize,
    slots: Vec<ItemSet>,
    live: BundleSet,
    withheld: ItemSet,
}

impl Catalog {
    /// Bundles must be non-empty and pairwise disjoint; items in no bundle
    /// are withheld.
    pub fn new(m: usize, bundles: Vec<ItemSet>) -> Result<Catalog> {
        if bundles.len() > MAX_BUNDLE_SLOTS {
            return resource(format!("at most {MAX_BUNDLE_SLOTS} bundles, got {}", bundles.len()));
        }
        let full = ItemSet::full(m);
        let mut used = ItemSet::EMPTY;
        for b in &bundles {
            if b.is_empty() {
                return input("catalog bundles must be non-empty");
            }
            if !b.is_subset(full) {
                return input(format!("bundle {b:?} outside the {m}-item universe"));
            }
            if !b.is_disjoint(used) {
                return input(format!("bundles overlap on {:?}", b.intersection(used)));
            }
            used = used.union(*b);
        }
        let live = BundleSet(if bundles.len() == 64 { u64::MAX } else { (1u64 << bundles.len()) - 1 });
        Ok(Catalog { items: m, slots: bundles, live, withheld: full.difference(used) })
    }

    /// Every item as its own bundle, in item order.
    pub fn singletons(m: usize) -> Catalog {
        Catalog::new(m, (0..m).map(ItemSet::singleton).collect()).expect("singletons are a partition")
    }

    pub fn item_count(&self) -> usize {
        self.items
    }

    pub fn live(&self) -> BundleSet {
        self.live
    }

    /// Number of bundles currently on sale.
    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = BundleId> {
        self.live.iter()
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn withheld(&self) -> ItemSet {
        self.withheld
    }

    /// Items of a bundle (live or retired).
    pub fn bundle(&self, id: BundleId) -> ItemSet {
        self.slots[id.0]
    }

    pub fn is_live(&self, id: BundleId) -> bool {
        self.live.contains(id)
    }

    pub fn items_of(&self, set: BundleSet) -> ItemSet {
        set.iter().fold(ItemSet::EMPTY, |acc, b| acc.union(self.slots[b.0]))
    }

    pub fn check_members(&self, set: BundleSet) -> Result<()> {
        if !set.is_subset(self.live) {
            return input(format!("bundles {:?} are not in the catalog", set.difference(self.live)));
        }
        Ok(())
    }

    /// Replaces the bundles of `set` by their union, appended under a fresh id.
    pub fn merge_in_place(&mut self, set: BundleSet) -> Result<BundleId> {
        if set.len() < 2 {
            return Err(Error::Contract(format!("merging needs at least two bundles, got {set:?}")));
        }
        self.check_members(set)?;
        if self.slots.len() >= MAX_BUNDLE_SLOTS {
            return resource(format!("bundle id space exhausted ({MAX_BUNDLE_SLOTS} slots)"));
        }
        let union = self.items_of(set);
        let id = BundleId(self.slots.len());
        self.slots.push(union);
        self.live = self.live.difference(set);
        self.live.insert(id);
        Ok(id)
    }

    /// Drops retired slots and renumbers live bundles `0..k` in id order.
    /// Returns the old-id → new-id map alongside.
    pub fn compact(&self) -> (Catalog, Vec<Option<BundleId>>) {
        let mut map = vec![None; self.slots.len()];
        let mut bundles = Vec::with_capacity(self.len());
        for id in self.ids() {
            map[id.0] = Some(BundleId(bundles.len()));
            bundles.push(self.slots[id.0]);
        }
        let c = Catalog::new(self.items, bundles).expect("live bundles form a valid catalog");
        (c, map)
    }
}

/// `Γ` with the bundles of `set` replaced by their union.
pub fn merge_bundles(catalog: &Catalog, set: BundleSet) -> Result<Catalog> {
    let mut c = catalog.clone();
    c.merge_in_place(set)?;
    Ok(c)
}

/// One price per bundle slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PriceMap(Vec<Scalar>);

impl PriceMap {
    pub fn new(prices: Vec<Scalar>) -> Result<PriceMap> {
        if let Some(p) = prices.iter().find(|p| p.is_negative()) {
            return input(format!("negative price {p}"));
        }
        Ok(PriceMap(prices))
    }

    pub fn uniform(slots: usize, price: Scalar) -> PriceMap {
        PriceMap(vec![price; slots])
    }

    pub fn get(&self, id: BundleId) -> &Scalar {
        &self.0[id.0]
    }

    pub fn set(&mut self, id: BundleId, price: Scalar) {
        if id.0 >= self.0.len() {
            self.0.resize(id.0 + 1, Scalar::zero());
        }
        self.0[id.0] = price;
    }

    pub fn of(&self, set: BundleSet) -> Scalar {
        set.iter().map(|b| &self.0[b.0]).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.0
    }
}

/// A candidate equilibrium: catalog, prices and each agent's bundles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub catalog: Catalog,
    pub prices: PriceMap,
    pub assignment: Vec<BundleSet>,
}

impl Outcome {
    /// Structural checks: prices for every live bundle, assignments reference
    /// live bundles only, and no bundle goes to two agents.
    pub fn check(&self, n: usize) -> Result<()> {
        if self.assignment.len() != n {
            return Err(Error::Contract(format!("assignment covers {} agents, expected {n}", self.assignment.len())));
        }
        if self.prices.len() < self.catalog.slot_count() {
            return Err(Error::Contract("some catalog bundle has no price".into()));
        }
        let mut used = BundleSet::EMPTY;
        for (i, x) in self.assignment.iter().enumerate() {
            if !x.is_subset(self.catalog.live()) {
                return Err(Error::Contract(format!("agent {i} holds bundles outside the catalog: {x:?}")));
            }
            if !x.is_disjoint(used) {
                return Err(Error::Contract(format!("bundles {:?} assigned twice", x.intersection(used))));
            }
            used = used.union(*x);
        }
        Ok(())
    }

    pub fn owner_of(&self, id: BundleId) -> Option<AgentId> {
        self.assignment.iter().position(|x| x.contains(id))
    }

    pub fn social_welfare(&self, auction: &Auction) -> Scalar {
        self.assignment
            .iter()
            .enumerate()
            .map(|(i, x)| auction.valuation(i).eval(self.catalog.items_of(*x)))
            .sum()
    }

    /// Item-level view of the assignment.
    pub fn allocation(&self) -> Vec<ItemSet> {
        self.assignment.iter().map(|x| self.catalog.items_of(*x)).collect()
    }

    /// Renumbers live bundles `0..k`.
    pub fn compact(&self) -> Outcome {
        let (catalog, map) = self.catalog.compact();
        let prices = PriceMap(self.catalog.ids().map(|id| self.prices.get(id).clone()).collect());
        let assignment = self
            .assignment
            .iter()
            .map(|x| BundleSet::from_ids(x.iter().map(|b| map[b.0].expect("assigned bundles are live"))))
            .collect();
        Outcome { catalog, prices, assignment }
    }
}

/// Starting point shared by both solvers: one bundle per non-empty `Y_i`
/// (in agent order) priced at `v_i(Y_i) / 2`, nothing assigned.
pub fn initial_outcome(auction: &Auction, initial: &[ItemSet]) -> Result<Outcome> {
    auction.check_allocation(initial)?;
    let owners: Vec<AgentId> = (0..auction.n()).filter(|&i| !initial[i].is_empty()).collect();
    let catalog = Catalog::new(auction.m(), owners.iter().map(|&i| initial[i]).collect())?;
    let prices = PriceMap(owners.iter().map(|&i| auction.valuation(i).eval(initial[i]).half()).collect());
    Ok(Outcome { catalog, prices, assignment: vec![BundleSet::EMPTY; auction.n()] })
}

/// `v(∪S)` for a set of catalog bundles.
pub fn induced_value(valuation: &Valuation, catalog: &Catalog, set: BundleSet) -> Result<Scalar> {
    catalog.check_members(set)?;
    valuation.value(catalog.items_of(set))
}

/// Quasi-linear utility of `set` for `agent`.
pub fn utility(auction: &Auction, agent: AgentId, set: BundleSet, catalog: &Catalog, prices: &PriceMap) -> Result<Scalar> {
    Ok(induced_value(auction.valuation(agent), catalog, set)? - prices.of(set))
}

/// All utility-maximizing bundle sets together with the maximum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Demand {
    pub max_utility: Scalar,
    /// Sorted by bitmask value.
    pub members: Vec<BundleSet>,
}

impl Demand {
    pub fn contains(&self, set: BundleSet) -> bool {
        self.members.contains(&set)
    }
}

/// Exact demand correspondence over `catalog \ excluded`, by enumerating
/// every subset in Gray-code order (bundles are disjoint, so the running
/// union is a running xor).
pub fn demand_correspondence(
    auction: &Auction,
    agent: AgentId,
    catalog: &Catalog,
    prices: &PriceMap,
    excluded: BundleSet,
) -> Result<Demand> {
    let available: Vec<BundleId> = catalog.live().difference(excluded).iter().collect();
    let k = available.len();
    if k > DEMAND_ENUMERATION_CAP {
        return resource(format!(
            "demand query over {k} bundles exceeds the enumeration cap of {DEMAND_ENUMERATION_CAP}"
        ));
    }
    let valuation = auction.valuation(agent);
    let mut best = Scalar::zero();
    let mut members = vec![BundleSet::EMPTY];
    let mut items = ItemSet::EMPTY;
    let mut price = Scalar::zero();
    let mut set = BundleSet::EMPTY;
    for step in 1u64..(1u64 << k) {
        let bit = step.trailing_zeros() as usize;
        let id = available[bit];
        items = ItemSet(items.0 ^ catalog.bundle(id).0);
        if set.contains(id) {
            set.remove(id);
            price -= prices.get(id);
        } else {
            set.insert(id);
            price += prices.get(id);
        }
        let u = valuation.eval(items) - &price;
        match u.cmp(&best) {
            Ordering::Greater => {
                best = u;
                members.clear();
                members.push(set);
            }
            Ordering::Equal => members.push(set),
            Ordering::Less => {}
        }
    }
    members.sort_by_key(|s| s.0);
    Ok(Demand { max_utility: best, members })
}

/// Deterministic pick among maximizers: fewest bundles from `avoid`, then
/// fewest bundles held by other agents, then smallest cardinality, then the
/// lexicographically smallest id sequence.
pub fn pick_member(members: &[BundleSet], others: BundleSet, avoid: BundleSet) -> BundleSet {
    *members
        .iter()
        .min_by(|a, b| {
            let key = |s: &BundleSet| (s.intersection(avoid).len(), s.intersection(others).len(), s.len());
            key(a).cmp(&key(b)).then_with(|| a.lex_cmp(**b))
        })
        .expect("a demand correspondence is never empty")
}

/// Bundles held by agents other than `agent`.
pub fn held_by_others(assignment: &[BundleSet], agent: AgentId) -> BundleSet {
    assignment
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != agent)
        .fold(BundleSet::EMPTY, |acc, (_, x)| acc.union(*x))
}

/// A member of the demand correspondence chosen by the overlap-minimizing
/// tie-break (see [`pick_member`]).
pub fn chosen_demand(
    auction: &Auction,
    agent: AgentId,
    catalog: &Catalog,
    prices: &PriceMap,
    excluded: BundleSet,
    assignment: &[BundleSet],
) -> Result<BundleSet> {
    let d = demand_correspondence(auction, agent, catalog, prices, excluded)?;
    Ok(pick_member(&d.members, held_by_others(assignment, agent), BundleSet::EMPTY))
}

/// Result of the stability test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CweCheck {
    Ok,
    Violation { agent: AgentId, better: BundleSet, gap: Scalar },
}

impl CweCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, CweCheck::Ok)
    }
}

/// Every agent's assigned bundles must be in its demand correspondence over
/// the whole catalog. Withheld items are never for sale.
pub fn is_cwe(auction: &Auction, outcome: &Outcome) -> Result<CweCheck> {
    outcome.check(auction.n())?;
    for (agent, x) in outcome.assignment.iter().enumerate() {
        let d = demand_correspondence(auction, agent, &outcome.catalog, &outcome.prices, BundleSet::EMPTY)?;
        let held = utility(auction, agent, *x, &outcome.catalog, &outcome.prices)?;
        if held < d.max_utility {
            let better = pick_member(&d.members, BundleSet::EMPTY, BundleSet::EMPTY);
            return Ok(CweCheck::Violation { agent, better, gap: &d.max_utility - &held });
        }
    }
    Ok(CweCheck::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use proptest::prelude::*;

    fn q(s: &str) -> Scalar {
        s.parse().unwrap()
    }

    fn bs(ids: &[usize]) -> BundleSet {
        BundleSet::from_ids(ids.iter().map(|&i| BundleId(i)))
    }

    fn gap3() -> Auction {
        instances::gap3(&q("1/10")).unwrap().0
    }

    /// Γ = {{1},{2,3}} as slots 0 and 1.
    fn gap_catalog() -> Catalog {
        Catalog::new(3, vec![ItemSet::from_items([0]), ItemSet::from_items([1, 2])]).unwrap()
    }

    #[test]
    fn induced_values_on_the_gap_instance() {
        let a = gap3();
        let c = gap_catalog();
        assert_eq!(induced_value(a.valuation(0), &c, bs(&[1])).unwrap(), q("21/10"));
        assert_eq!(induced_value(a.valuation(1), &c, bs(&[1])).unwrap(), q("1"));
        assert_eq!(induced_value(a.valuation(2), &c, BundleSet::EMPTY).unwrap(), q("0"));
        assert!(matches!(induced_value(a.valuation(0), &c, bs(&[5])), Err(Error::Input(_))));
    }

    #[test]
    fn utility_examples() {
        let a = gap3();
        let c = gap_catalog();
        let p = PriceMap::new(vec![q("1/2"), q("1")]).unwrap();
        assert_eq!(utility(&a, 0, bs(&[1]), &c, &p).unwrap(), q("11/10"));
        assert_eq!(utility(&a, 0, BundleSet::EMPTY, &c, &p).unwrap(), q("0"));

        let ud = Auction::anonymous(3, vec![Valuation::unit_demand(vec![q("11/10"); 3])]).unwrap();
        let singles = Catalog::singletons(3);
        let ones = PriceMap::uniform(3, q("1"));
        assert_eq!(utility(&ud, 0, bs(&[2]), &singles, &ones).unwrap(), q("1/10"));
    }

    #[test]
    fn zero_prices_make_the_grand_set_demanded() {
        let a = gap3();
        let c = Catalog::singletons(3);
        let p = PriceMap::uniform(3, Scalar::zero());
        for agent in 0..3 {
            let d = demand_correspondence(&a, agent, &c, &p, BundleSet::EMPTY).unwrap();
            assert!(d.contains(c.live()));
        }
    }

    #[test]
    fn unit_demand_at_unit_prices_demands_every_singleton() {
        let ud = Auction::anonymous(4, vec![Valuation::unit_demand(vec![q("11/10"); 4])]).unwrap();
        let c = Catalog::singletons(4);
        let d = demand_correspondence(&ud, 0, &c, &PriceMap::uniform(4, q("1")), BundleSet::EMPTY).unwrap();
        assert_eq!(d.max_utility, q("1/10"));
        assert_eq!(d.members, (0..4).map(|i| bs(&[i])).collect::<Vec<_>>());
        assert!(!d.contains(BundleSet::EMPTY));
    }

    #[test]
    fn two_item_explicit_demand() {
        // v({1}) = 1, v({2}) = 2, v({1,2}) = 2 at prices (1/2, 3/2).
        let v = Valuation::explicit(2, vec![q("0"), q("1"), q("2"), q("2")]).unwrap();
        let a = Auction::anonymous(2, vec![v]).unwrap();
        let c = Catalog::singletons(2);
        let p = PriceMap::new(vec![q("1/2"), q("3/2")]).unwrap();
        let d = demand_correspondence(&a, 0, &c, &p, BundleSet::EMPTY).unwrap();
        assert_eq!(d.max_utility, q("1/2"));
        assert_eq!(d.members, vec![bs(&[0]), bs(&[1])]);
    }

    #[test]
    fn enumeration_cap_is_a_resource_error() {
        let m = DEMAND_ENUMERATION_CAP + 1;
        let a = Auction::anonymous(m, vec![Valuation::additive(vec![q("1"); m])]).unwrap();
        let c = Catalog::singletons(m);
        let p = PriceMap::uniform(m, q("0"));
        assert!(matches!(demand_correspondence(&a, 0, &c, &p, BundleSet::EMPTY), Err(Error::Resource(_))));
        // Excluding bundles brings it back under the cap.
        assert!(demand_correspondence(&a, 0, &c, &p, bs(&[0])).is_ok());
    }

    #[test]
    fn chosen_demand_tie_breaks() {
        let ud = Auction::anonymous(2, vec![Valuation::unit_demand(vec![q("1"); 2]); 2]).unwrap();
        let c = Catalog::singletons(2);
        let p = PriceMap::uniform(2, q("1/2"));
        // Both singletons tie; agent 1 holds bundle 0, so agent 0 takes bundle 1.
        let assignment = vec![BundleSet::EMPTY, bs(&[0])];
        assert_eq!(chosen_demand(&ud, 0, &c, &p, BundleSet::EMPTY, &assignment).unwrap(), bs(&[1]));
        // Nobody holds anything: lexicographic.
        let none = vec![BundleSet::EMPTY; 2];
        assert_eq!(chosen_demand(&ud, 0, &c, &p, BundleSet::EMPTY, &none).unwrap(), bs(&[0]));
        // Zero maximum utility: the empty set wins on cardinality.
        let p1 = PriceMap::uniform(2, q("1"));
        assert_eq!(chosen_demand(&ud, 0, &c, &p1, BundleSet::EMPTY, &none).unwrap(), BundleSet::EMPTY);
    }

    #[test]
    fn merge_examples() {
        let c = Catalog::singletons(3);
        let merged = merge_bundles(&c, bs(&[1, 2])).unwrap();
        let bundles: Vec<_> = merged.ids().map(|b| merged.bundle(b)).collect();
        assert_eq!(bundles, vec![ItemSet::from_items([0]), ItemSet::from_items([1, 2])]);

        let grand = merge_bundles(&merged, merged.live()).unwrap();
        assert_eq!(grand.len(), 1);
        assert_eq!(grand.items_of(grand.live()), ItemSet::full(3));
        assert!(matches!(merge_bundles(&c, bs(&[0])), Err(Error::Contract(_))));
    }

    #[test]
    fn is_cwe_examples() {
        let a = gap3();
        let mut c = Catalog::singletons(3);
        let p = PriceMap::uniform(3, a.prohibitive_price());
        let empty = Outcome { catalog: c.clone(), prices: p, assignment: vec![BundleSet::EMPTY; 3] };
        assert_eq!(is_cwe(&a, &empty).unwrap(), CweCheck::Ok);

        // Γ = {{1},{2,3}} at (1/2, 8/5), agent 1 holds {2,3}.
        let id = c.merge_in_place(bs(&[1, 2])).unwrap();
        let mut p = PriceMap::uniform(c.slot_count(), Scalar::zero());
        p.set(BundleId(0), q("1/2"));
        p.set(id, q("8/5"));
        let o = Outcome { catalog: c, prices: p, assignment: vec![BundleSet::singleton(id), BundleSet::EMPTY, BundleSet::EMPTY] };
        assert_eq!(is_cwe(&a, &o).unwrap(), CweCheck::Ok);

        let single = Auction::anonymous(1, vec![Valuation::additive(vec![q("1")])]).unwrap();
        let o = Outcome {
            catalog: Catalog::singletons(1),
            prices: PriceMap::uniform(1, q("1/2")),
            assignment: vec![BundleSet::EMPTY],
        };
        assert_eq!(is_cwe(&single, &o).unwrap(), CweCheck::Violation { agent: 0, better: bs(&[0]), gap: q("1/2") });
    }

    #[test]
    fn double_assignment_is_a_contract_error() {
        let a = gap3();
        let o = Outcome {
            catalog: Catalog::singletons(3),
            prices: PriceMap::uniform(3, q("1")),
            assignment: vec![bs(&[0]), bs(&[0]), BundleSet::EMPTY],
        };
        assert!(matches!(is_cwe(&a, &o), Err(Error::Contract(_))));
    }

    fn brute_force_demand(a: &Auction, agent: AgentId, c: &Catalog, p: &PriceMap) -> (Scalar, Vec<BundleSet>) {
        let ids: Vec<_> = c.ids().collect();
        let all: Vec<BundleSet> = (0..(1u64 << ids.len()))
            .map(|mask| BundleSet::from_ids(ids.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, b)| *b)))
            .collect();
        let us: Vec<Scalar> = all.iter().map(|s| utility(a, agent, *s, c, p).unwrap()).collect();
        let best = us.iter().max().unwrap().clone();
        let mut members: Vec<_> = all.iter().zip(&us).filter(|(_, u)| **u == best).map(|(s, _)| *s).collect();
        members.sort_by_key(|s| s.0);
        (best, members)
    }

    proptest! {
        #[test]
        fn gray_code_demand_matches_direct_enumeration(seed in 0u64..400, price_num in proptest::collection::vec(0i64..40, 5)) {
            let (a, _) = instances::random_explicit(2, 5, seed, 8).unwrap();
            let c = Catalog::singletons(5);
            let p = PriceMap::new(price_num.iter().map(|&x| Scalar::ratio(x, 8)).collect()).unwrap();
            for agent in 0..2 {
                let d = demand_correspondence(&a, agent, &c, &p, BundleSet::EMPTY).unwrap();
                let (best, members) = brute_force_demand(&a, agent, &c, &p);
                prop_assert_eq!(&d.max_utility, &best);
                prop_assert_eq!(&d.members, &members);
                prop_assert!(d.max_utility >= Scalar::zero());
                let pick = chosen_demand(&a, agent, &c, &p, BundleSet::EMPTY, &[BundleSet::EMPTY, bs(&[0, 1])]).unwrap();
                prop_assert!(d.contains(pick));
            }
        }

        #[test]
        fn induced_value_is_value_of_union(seed in 0u64..200, mask in 0u64..64) {
            let (a, _) = instances::random_explicit(1, 6, seed, 8).unwrap();
            let c = Catalog::new(6, vec![ItemSet::from_items([0, 1]), ItemSet::from_items([2]), ItemSet::from_items([3, 4]), ItemSet::from_items([5])]).unwrap();
            let set = BundleSet(mask & c.live().0);
            prop_assert_eq!(induced_value(a.valuation(0), &c, set).unwrap(), a.valuation(0).eval(c.items_of(set)));
        }

        #[test]
        fn merging_preserves_the_partition(picks in proptest::collection::vec(0usize..6, 2..6)) {
            let mut c = Catalog::singletons(6);
            let set = BundleSet::from_ids(picks.iter().map(|&i| BundleId(i)));
            prop_assume!(set.len() >= 2);
            c.merge_in_place(set).unwrap();
            let mut seen = ItemSet::EMPTY;
            for id in c.ids() {
                prop_assert!(seen.is_disjoint(c.bundle(id)));
                seen = seen.union(c.bundle(id));
            }
            prop_assert_eq!(seen.union(c.withheld()), ItemSet::full(6));
        }
    }
}
