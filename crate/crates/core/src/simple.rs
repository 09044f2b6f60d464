//! The simple ascending procedure: agents are served from a pool, demanded
//! multi-bundle sets are merged on the spot, and a contested single bundle
//! goes through conflict resolution in fixed price steps.
//!
//! Prices start at half the initial owner's value of each bundle, only ever
//! rise, and bundles only ever merge.

use std::collections::BTreeSet;

use crate::error::{input, Error, Result};
use crate::market::{
    demand_correspondence, held_by_others, initial_outcome, pick_member, AgentId, Auction, BundleId, BundleSet,
    Catalog, Demand, Outcome, PriceMap,
};
use crate::scalar::Scalar;
use crate::trace::{Algorithm, Event, Trace};
use crate::valuation::ItemSet;

/// Hard stop for the main loop; reaching it means a bug, not a hard instance.
const MAX_STEPS: u64 = 5_000_000;

/// Greatest common rational divisor of every number the valuations are
/// built from. Zero when all of them are zero.
pub fn granularity(auction: &Auction) -> Scalar {
    auction
        .agents()
        .iter()
        .flat_map(|a| a.valuation.parameters())
        .fold(Scalar::zero(), |g, x| g.gcd(&x))
}

/// The step must be positive and divide `g / 2`, so that every price and
/// utility stays on the `ε` grid and membership flips exactly at a step.
pub fn check_step(auction: &Auction, epsilon: &Scalar) -> Result<()> {
    if !epsilon.is_positive() {
        return input(format!("price step must be positive, got {epsilon}"));
    }
    let g = granularity(auction);
    if g.is_zero() {
        return Ok(());
    }
    let ratio = g.half() / epsilon;
    if !ratio.is_integer() {
        return input(format!(
            "price step {epsilon} must divide half the granularity ({}); termination is not guaranteed otherwise",
            g.half()
        ));
    }
    Ok(())
}

/// Mutable state of one run.
#[derive(Clone, Debug)]
pub struct SimpleState {
    pub catalog: Catalog,
    pub prices: PriceMap,
    pub assignment: Vec<BundleSet>,
    pub pool: BTreeSet<AgentId>,
    pub epsilon: Scalar,
    /// Bundles each agent yielded at an exact tie, with the price at the time.
    pub conceded: Vec<Vec<(BundleId, Scalar)>>,
    pub trace: Trace,
}

impl SimpleState {
    pub fn new(auction: &Auction, initial: &[ItemSet], epsilon: Scalar) -> Result<SimpleState> {
        check_step(auction, &epsilon)?;
        let start = initial_outcome(auction, initial)?;
        Ok(SimpleState {
            catalog: start.catalog.clone(),
            prices: start.prices.clone(),
            assignment: start.assignment.clone(),
            pool: (0..auction.n()).collect(),
            epsilon,
            conceded: vec![Vec::new(); auction.n()],
            trace: Trace::new(Algorithm::Simple, start),
        })
    }

    pub fn outcome(&self) -> Outcome {
        Outcome { catalog: self.catalog.clone(), prices: self.prices.clone(), assignment: self.assignment.clone() }
    }

    fn demand(&mut self, auction: &Auction, agent: AgentId) -> Result<Demand> {
        self.trace.demand_queries += 1;
        demand_correspondence(auction, agent, &self.catalog, &self.prices, BundleSet::EMPTY)
    }

    /// Is `{bundle}` in the agent's demand correspondence at `price`?
    fn demands_at(&mut self, auction: &Auction, agent: AgentId, bundle: BundleId, price: &Scalar) -> Result<bool> {
        let saved = self.prices.get(bundle).clone();
        self.prices.set(bundle, price.clone());
        let d = self.demand(auction, agent);
        self.prices.set(bundle, saved);
        Ok(d?.contains(BundleSet::singleton(bundle)))
    }

    fn owner_of(&self, bundle: BundleId) -> Option<AgentId> {
        self.assignment.iter().position(|x| x.contains(bundle))
    }

    fn assign(&mut self, agent: AgentId, bundles: BundleSet) {
        self.assignment[agent] = bundles;
        self.trace.push(Event::Assign { agent, bundles });
    }

    fn unassign(&mut self, agent: AgentId) {
        self.assignment[agent] = BundleSet::EMPTY;
        self.trace.push(Event::Unassign { agent });
    }

    fn repool(&mut self, agent: AgentId) {
        if self.pool.insert(agent) {
            self.trace.push(Event::PoolAdd { agent });
        }
    }

    fn raise(&mut self, bundle: BundleId, new: Scalar) {
        let old = self.prices.get(bundle).clone();
        self.prices.set(bundle, new.clone());
        self.trace.push(Event::PriceRaise { bundle, old, new });
    }

    /// Concessions still meaningful: the bundle is live at the same price.
    fn live_concessions(&self, agent: AgentId) -> BundleSet {
        BundleSet::from_ids(
            self.conceded[agent]
                .iter()
                .filter(|(b, p)| self.catalog.is_live(*b) && self.prices.get(*b) == p)
                .map(|(b, _)| *b),
        )
    }

    /// Serves the lowest-index agent in the pool. Returns `false` once the
    /// pool is empty.
    pub fn step(&mut self, auction: &Auction) -> Result<bool> {
        let Some(a) = self.pool.pop_first() else { return Ok(false) };
        self.trace.push(Event::PoolRemove { agent: a });
        self.trace.iterations += 1;
        let d = self.demand(auction, a)?;

        // An agent re-pooled while still holding a bundle keeps it if it is
        // still demanded; otherwise it lets go and is served like the rest.
        let held = self.assignment[a];
        if !held.is_empty() {
            if d.contains(held) {
                self.trace.push(Event::IterationEnd);
                return Ok(true);
            }
            self.unassign(a);
        }

        if !d.max_utility.is_positive() {
            self.trace.push(Event::Reject { agent: a });
            self.trace.push(Event::IterationEnd);
            return Ok(true);
        }

        let avoid = self.live_concessions(a);
        let others = held_by_others(&self.assignment, a);
        let chosen = pick_member(&d.members, others, avoid);
        let stalled = !chosen.is_disjoint(avoid);

        if chosen.len() > 1 {
            for i in 0..self.assignment.len() {
                if i != a && !self.assignment[i].is_disjoint(chosen) {
                    self.unassign(i);
                    self.repool(i);
                }
            }
            let price = self.prices.of(chosen);
            let id = self.catalog.merge_in_place(chosen)?;
            self.prices.set(id, price.clone());
            self.trace.push(Event::Merge { parts: chosen, into: id, price });
            self.assign(a, BundleSet::singleton(id));
        } else {
            let bundle = chosen.only().expect("positive utility needs a non-empty set");
            match self.owner_of(bundle) {
                None => self.assign(a, chosen),
                Some(b) => self.resolve_conflict(auction, bundle, a, b, stalled)?,
            }
        }
        self.trace.push(Event::IterationEnd);
        Ok(true)
    }

    /// `a` demands the single bundle held by `b`. The price climbs in steps of
    /// `ε` while both demand it; the first to stop demanding it goes back to
    /// the pool. When one step would knock out both at once, the step is not
    /// taken: `b` keeps the bundle (still weakly demanded) and `a` concedes it.
    /// If `a` had already conceded it at this very price, the roles swap and
    /// `b` concedes it to `a`. Only when both have conceded is the step taken,
    /// with both re-pooled for a fresh look.
    pub fn resolve_conflict(
        &mut self,
        auction: &Auction,
        bundle: BundleId,
        a: AgentId,
        b: AgentId,
        stalled: bool,
    ) -> Result<()> {
        loop {
            let price = self.prices.get(bundle).clone();
            let in_a = self.demands_at(auction, a, bundle, &price)?;
            let in_b = self.demands_at(auction, b, bundle, &price)?;
            if !(in_a && in_b) {
                if in_a {
                    self.unassign(b);
                    self.repool(b);
                    self.assign(a, BundleSet::singleton(bundle));
                } else {
                    self.repool(a);
                }
                return Ok(());
            }
            let next = &price + &self.epsilon;
            let keeps_a = self.demands_at(auction, a, bundle, &next)?;
            let keeps_b = self.demands_at(auction, b, bundle, &next)?;
            if !keeps_a && !keeps_b {
                if stalled && !self.live_concessions(b).contains(bundle) {
                    self.conceded[b].push((bundle, price));
                    self.trace.push(Event::Concede { agent: b, bundle });
                    self.unassign(b);
                    self.repool(b);
                    self.assign(a, BundleSet::singleton(bundle));
                } else if stalled {
                    self.raise(bundle, next);
                    self.repool(a);
                    self.repool(b);
                } else {
                    self.conceded[a].push((bundle, price));
                    self.trace.push(Event::Concede { agent: a, bundle });
                    self.repool(a);
                }
                return Ok(());
            }
            self.raise(bundle, next);
        }
    }

    pub fn run(mut self, auction: &Auction) -> Result<(Outcome, Trace)> {
        while self.step(auction)? {
            if self.trace.iterations > MAX_STEPS {
                return Err(Error::Internal(format!("simple procedure exceeded {MAX_STEPS} iterations")));
            }
        }
        let outcome = self.outcome();
        Ok((outcome, self.trace))
    }
}

/// Runs the simple procedure from initial allocation `initial` with price
/// step `epsilon`.
pub fn run_simple(auction: &Auction, initial: &[ItemSet], epsilon: &Scalar) -> Result<(Outcome, Trace)> {
    SimpleState::new(auction, initial, epsilon.clone())?.run(auction)
}
