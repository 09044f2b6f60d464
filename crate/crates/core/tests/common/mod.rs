#![allow(dead_code)]

use std::cmp::Ordering;

use cwe::market::{AgentId, Auction, BundleId, BundleSet, Catalog, PriceMap};
use cwe::valuation::ItemSet;
use cwe::Scalar;

pub fn q(s: &str) -> Scalar {
    s.parse().unwrap()
}

/// Sizes used by the random suites: `n, m ∈ 2..=5`.
pub fn suite_shape(seed: u64) -> (usize, usize) {
    (2 + (seed % 4) as usize, 2 + (seed / 4 % 4) as usize)
}

pub fn live_ids(catalog: &Catalog) -> Vec<BundleId> {
    catalog.ids().collect()
}

/// Every subset of `ids`, as bundle sets.
pub fn subsets(ids: &[BundleId]) -> Vec<BundleSet> {
    (0..1u64 << ids.len())
        .map(|mask| BundleSet::from_ids((0..ids.len()).filter(|j| mask >> j & 1 == 1).map(|j| ids[j])))
        .collect()
}

fn items(catalog: &Catalog, set: BundleSet) -> ItemSet {
    set.iter().fold(ItemSet::EMPTY, |acc, b| acc.union(catalog.bundle(b)))
}

fn price(prices: &PriceMap, set: BundleSet) -> Scalar {
    set.iter().fold(Scalar::zero(), |acc, b| &acc + prices.get(b))
}

/// Best utility of `agent` over sets sharing no bundle with `avoid`,
/// by plain enumeration. Never below zero since the empty set counts.
pub fn best_avoiding(auction: &Auction, agent: AgentId, catalog: &Catalog, prices: &PriceMap, avoid: BundleSet) -> Scalar {
    let ids: Vec<BundleId> = live_ids(catalog).into_iter().filter(|b| !avoid.contains(*b)).collect();
    subsets(&ids)
        .into_iter()
        .map(|s| auction.valuation(agent).eval(items(catalog, s)) - price(prices, s))
        .max()
        .expect("the empty set is always there")
}

pub fn held_utility(auction: &Auction, agent: AgentId, catalog: &Catalog, prices: &PriceMap, x: BundleSet) -> Scalar {
    auction.valuation(agent).eval(items(catalog, x)) - price(prices, x)
}

/// `u(s) = at_zero − slope · s`.
#[derive(Clone, Debug)]
struct Line {
    set: BundleSet,
    at_zero: Scalar,
    slope: i64,
}

impl Line {
    fn at(&self, s: &Scalar) -> Scalar {
        &self.at_zero - &(&Scalar::from_int(self.slope) * s)
    }
}

fn lines(auction: &Auction, agent: AgentId, catalog: &Catalog, prices: &PriceMap, raising: BundleSet) -> Vec<Line> {
    subsets(&live_ids(catalog))
        .into_iter()
        .map(|set| Line {
            set,
            at_zero: held_utility(auction, agent, catalog, prices, set),
            slope: set.intersection(raising).len() as i64,
        })
        .collect()
}

fn in_argmax(ls: &[Line], x: BundleSet, s: &Scalar) -> bool {
    let top = ls.iter().map(|l| l.at(s)).max().expect("non-empty");
    ls.iter().any(|l| l.set == x && l.at(s) == top)
}

/// First time at which `x` stops being a maximizer, found by sweeping the
/// crossing points of its line with every other line and probing between
/// consecutive crossings.
fn exit_time(ls: &[Line], x: BundleSet) -> Scalar {
    let lx = ls.iter().find(|l| l.set == x).expect("held set is a line");
    let mut cuts = vec![Scalar::zero()];
    for l in ls {
        if l.slope != lx.slope {
            let t = &(&lx.at_zero - &l.at_zero) / &Scalar::from_int(lx.slope - l.slope);
            if t.is_positive() {
                cuts.push(t);
            }
        }
    }
    cuts.sort();
    cuts.dedup();
    for (j, c) in cuts.iter().enumerate() {
        let probe = match cuts.get(j + 1) {
            Some(next) => (c + next).half(),
            None => c + &Scalar::one(),
        };
        if !in_argmax(ls, x, &probe) {
            return c.clone();
        }
    }
    unreachable!("the empty set eventually beats any priced holding")
}

fn lex(a: BundleSet, b: BundleSet) -> Ordering {
    let ia: Vec<BundleId> = a.iter().collect();
    let ib: Vec<BundleId> = b.iter().collect();
    ia.cmp(&ib)
}

/// Maximizers just after `s`: top value at `s`, flattest slope among those.
/// Ties go to least overlap with `others`, then fewest bundles, then the
/// lexicographically smallest id list.
fn argmax_after(ls: &[Line], s: &Scalar, others: BundleSet) -> BundleSet {
    let key = |l: &Line| (l.at(s), -l.slope);
    let top = ls.iter().map(key).max().expect("non-empty");
    ls.iter()
        .filter(|l| key(l) == top)
        .map(|l| l.set)
        .min_by(|a, b| {
            (a.intersection(others).len(), a.len())
                .cmp(&(b.intersection(others).len(), b.len()))
                .then_with(|| lex(*a, *b))
        })
        .expect("non-empty")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RaiseResult {
    pub prices: PriceMap,
    pub fallback: Vec<Option<BundleSet>>,
    pub order: Vec<Option<usize>>,
}

/// Continuous price raise: every bundle held by a still-raising agent goes up
/// at unit rate; an agent leaves when its holding stops being a maximizer
/// and records what it would switch to. Simultaneous exits leave in index
/// order, after which the remaining lines are rebuilt.
pub fn continuous_raise(auction: &Auction, catalog: &Catalog, prices: &PriceMap, assignment: &[BundleSet]) -> RaiseResult {
    let n = assignment.len();
    let mut prices = prices.clone();
    let mut raising: Vec<AgentId> = (0..n).filter(|&i| !assignment[i].is_empty()).collect();
    let mut fallback = vec![None; n];
    let mut order = vec![None; n];
    let mut rank = 0;
    while !raising.is_empty() {
        let gamma = raising.iter().fold(BundleSet::EMPTY, |acc, &i| acc.union(assignment[i]));
        let mut first: Option<(Scalar, AgentId, Vec<Line>)> = None;
        for &i in &raising {
            let ls = lines(auction, i, catalog, &prices, gamma);
            let t = exit_time(&ls, assignment[i]);
            if first.as_ref().is_none_or(|(best, _, _)| &t < best) {
                first = Some((t, i, ls));
            }
        }
        let (t, a, ls) = first.expect("raising set is non-empty");
        let others = (0..n).filter(|&j| j != a).fold(BundleSet::EMPTY, |acc, j| acc.union(assignment[j]));
        fallback[a] = Some(argmax_after(&ls, &t, others));
        order[a] = Some(rank);
        rank += 1;
        for b in gamma.iter() {
            let p = prices.get(b) + &t;
            prices.set(b, p);
        }
        raising.retain(|&i| i != a);
    }
    RaiseResult { prices, fallback, order }
}
