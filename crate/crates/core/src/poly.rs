//! The polynomial-time procedure. Each main iteration serves one agent from
//! the pool, then raises the prices of all allocated bundles to the exact
//! breakpoint where some holder becomes indifferent to an alternative.
//! A single contested bundle is handed over at once and the loser falls back
//! to the set recorded for it during the last price raise.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::market::{
    demand_correspondence, held_by_others, initial_outcome, pick_member, utility, AgentId, Auction, BundleSet, Catalog, Demand, Outcome, PriceMap,
};
use crate::scalar::Scalar;
use crate::trace::{Algorithm, Event, Trace};
use crate::valuation::ItemSet;

#[derive(Clone, Debug)]
pub struct PolyState {
    pub catalog: Catalog,
    pub prices: PriceMap,
    pub assignment: Vec<BundleSet>,
    pub pool: BTreeSet<AgentId>,
    pub reject: BTreeSet<AgentId>,
    /// Set recorded for each agent when it left the raising set.
    pub fallback: Vec<Option<BundleSet>>,
    /// Position at which each agent left the raising set in the last pass.
    pub order: Vec<Option<usize>>,
    pub trace: Trace,
}

impl PolyState {
    pub fn new(auction: &Auction, initial: &[ItemSet]) -> Result<PolyState> {
        let start = initial_outcome(auction, initial)?;
        let n = auction.n();
        Ok(PolyState {
            catalog: start.catalog.clone(),
            prices: start.prices.clone(),
            assignment: start.assignment.clone(),
            pool: (0..n).collect(),
            reject: BTreeSet::new(),
            fallback: vec![None; n],
            order: vec![None; n],
            trace: Trace::new(Algorithm::Poly, start),
        })
    }

    pub fn outcome(&self) -> Outcome {
        Outcome { catalog: self.catalog.clone(), prices: self.prices.clone(), assignment: self.assignment.clone() }
    }

    fn demand(&mut self, auction: &Auction, agent: AgentId, excluded: BundleSet) -> Result<Demand> {
        self.trace.demand_queries += 1;
        demand_correspondence(auction, agent, &self.catalog, &self.prices, excluded)
    }

    fn assign(&mut self, agent: AgentId, bundles: BundleSet) {
        self.assignment[agent] = bundles;
        self.trace.push(Event::Assign { agent, bundles });
    }

    fn unassign(&mut self, agent: AgentId) {
        self.assignment[agent] = BundleSet::EMPTY;
        self.trace.push(Event::Unassign { agent });
    }

    fn reject(&mut self, agent: AgentId) {
        self.reject.insert(agent);
        self.trace.push(Event::Reject { agent });
    }

    /// One main-loop iteration: serve the lowest-index pooled agent, then
    /// raise prices. Returns `false` if the pool was already empty.
    pub fn serve_next(&mut self, auction: &Auction) -> Result<bool> {
        if !self.allocate_next(auction)? {
            return Ok(false);
        }
        self.end_iteration(auction)?;
        Ok(true)
    }

    /// First half of an iteration: pops the lowest-index pooled agent and
    /// allocates its demand, or rejects it.
    pub fn allocate_next(&mut self, auction: &Auction) -> Result<bool> {
        let Some(a) = self.pool.pop_first() else { return Ok(false) };
        self.trace.push(Event::PoolRemove { agent: a });
        self.trace.iterations += 1;
        let d = self.demand(auction, a, BundleSet::EMPTY)?;
        if d.max_utility.is_positive() {
            let others = held_by_others(&self.assignment, a);
            let chosen = pick_member(&d.members, others, BundleSet::EMPTY);
            self.allocate_demand(auction, a, chosen)?;
        } else {
            self.reject(a);
        }
        Ok(true)
    }

    /// Second half of an iteration.
    pub fn end_iteration(&mut self, auction: &Auction) -> Result<()> {
        self.raise_prices(auction)?;
        self.trace.push(Event::IterationEnd);
        Ok(())
    }

    /// Gives `set` to `agent`. Several bundles are merged first, evicting
    /// their holders to the pool. A single bundle held by someone else is
    /// taken, and the previous holder is handed its recorded fallback, which
    /// may cascade. An empty set rejects the agent.
    pub fn allocate_demand(&mut self, auction: &Auction, agent: AgentId, set: BundleSet) -> Result<()> {
        let n = auction.n();
        let (mut a, mut s) = (agent, set);
        for depth in 0..=n {
            self.catalog.check_members(s)?;
            if s.is_empty() {
                self.reject(a);
                return Ok(());
            }
            if s.len() > 1 {
                if !self.assignment[a].is_empty() {
                    self.unassign(a);
                }
                for i in 0..n {
                    if i != a && !self.assignment[i].is_disjoint(s) {
                        self.unassign(i);
                        if self.pool.insert(i) {
                            self.trace.push(Event::PoolAdd { agent: i });
                        }
                    }
                }
                let price = self.prices.of(s);
                let id = self.catalog.merge_in_place(s)?;
                self.prices.set(id, price.clone());
                self.trace.push(Event::Merge { parts: s, into: id, price });
                self.assign(a, BundleSet::singleton(id));
                return Ok(());
            }
            let bundle = s.only().expect("one bundle");
            let owner = (0..n).find(|&i| i != a && self.assignment[i].contains(bundle));
            let Some(b) = owner else {
                self.assign(a, s);
                return Ok(());
            };
            let (thief_rank, victim_rank) = (self.order[a], self.order[b]);
            let earlier = match (victim_rank, thief_rank) {
                (Some(v), Some(t)) => v < t,
                (Some(_), None) => true,
                (None, _) => false,
            };
            if !earlier {
                return Err(Error::Internal(format!(
                    "agent {a} (rank {thief_rank:?}) took a bundle from agent {b} (rank {victim_rank:?})"
                )));
            }
            self.trace.push(Event::Steal { thief: a, victim: b, bundle, depth: depth + 1, thief_rank, victim_rank });
            self.unassign(b);
            self.assign(a, s);
            let next = self.fallback[b]
                .ok_or_else(|| Error::Internal(format!("agent {b} holds a bundle but has no fallback")))?;
            a = b;
            s = next;
        }
        Err(Error::Internal(format!("allocation chain longer than {n} agents")))
    }

    /// Raises the prices of held bundles uniformly; at each breakpoint the
    /// first agent to become indifferent (lowest index on ties) leaves the
    /// raising set and records its alternative as fallback.
    pub fn raise_prices(&mut self, auction: &Auction) -> Result<()> {
        let n = auction.n();
        let mut raising: Vec<AgentId> = (0..n).filter(|&i| !self.assignment[i].is_empty()).collect();
        self.fallback = vec![None; n];
        self.order = vec![None; n];
        let mut rank = 0;
        while !raising.is_empty() {
            let excluded = raising.iter().fold(BundleSet::EMPTY, |acc, &i| acc.union(self.assignment[i]));
            let mut best: Option<(Scalar, AgentId, BundleSet)> = None;
            for &i in &raising {
                let d = self.demand(auction, i, excluded)?;
                let alt = pick_member(&d.members, held_by_others(&self.assignment, i), BundleSet::EMPTY);
                let gap = utility(auction, i, self.assignment[i], &self.catalog, &self.prices)? - &d.max_utility;
                if gap.is_negative() {
                    return Err(Error::Internal(format!("agent {i} holds a bundle it does not demand")));
                }
                if best.as_ref().is_none_or(|(g, _, _)| &gap < g) {
                    best = Some((gap, i, alt));
                }
            }
            let (gap, a, alt) = best.expect("raising set is non-empty");
            if gap.is_positive() {
                for bundle in excluded.iter() {
                    let old = self.prices.get(bundle).clone();
                    let new = &old + &gap;
                    self.prices.set(bundle, new.clone());
                    self.trace.push(Event::PriceRaise { bundle, old, new });
                }
            }
            self.fallback[a] = Some(alt);
            self.order[a] = Some(rank);
            self.trace.push(Event::Fallback { agent: a, set: alt, rank });
            rank += 1;
            raising.retain(|&i| i != a);
        }
        Ok(())
    }

    pub fn run(mut self, auction: &Auction) -> Result<(Outcome, Trace)> {
        let n = auction.n() as u64;
        let cap = 4 * n * n + 4;
        while self.serve_next(auction)? {
            if self.trace.iterations > cap {
                return Err(Error::Internal(format!("main loop exceeded {cap} iterations")));
            }
        }
        let outcome = self.outcome();
        Ok((outcome, self.trace))
    }
}

/// Runs the polynomial-time procedure from initial allocation `initial`.
pub fn run_poly(auction: &Auction, initial: &[ItemSet]) -> Result<(Outcome, Trace)> {
    PolyState::new(auction, initial)?.run(auction)
}

/// Prices of a single held bundle are maximal: any increase would let the
/// holder strictly prefer something else. Returns the first agent for which
/// this fails.
pub fn first_non_maximal(auction: &Auction, outcome: &Outcome) -> Result<Option<AgentId>> {
    for (i, x) in outcome.assignment.iter().enumerate() {
        if x.is_empty() {
            continue;
        }
        let held = utility(auction, i, *x, &outcome.catalog, &outcome.prices)?;
        let alt = demand_correspondence(auction, i, &outcome.catalog, &outcome.prices, *x)?;
        if held != alt.max_utility {
            return Ok(Some(i));
        }
    }
    Ok(None)
}
