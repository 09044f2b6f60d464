//! Event log of a solver run and its replay checker.
//!
//! Replaying rebuilds the outcome from the initial state and, along the way,
//! checks the monotonicity properties every run must satisfy: prices never
//! fall, bundles only merge, and once an item is allocated it stays
//! allocated at every iteration boundary.

use serde::Serialize;

use crate::market::{AgentId, BundleId, BundleSet, Outcome};
use crate::scalar::Scalar;
use crate::valuation::ItemSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Simple,
    Poly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Merge { parts: BundleSet, into: BundleId, price: Scalar },
    PriceRaise { bundle: BundleId, old: Scalar, new: Scalar },
    PoolAdd { agent: AgentId },
    PoolRemove { agent: AgentId },
    Reject { agent: AgentId },
    Assign { agent: AgentId, bundles: BundleSet },
    Unassign { agent: AgentId },
    /// `thief` takes `bundle` from `victim`; ranks are removal positions from
    /// the previous price-raising pass (`None` = never removed).
    Steal {
        thief: AgentId,
        victim: AgentId,
        bundle: BundleId,
        depth: usize,
        thief_rank: Option<usize>,
        victim_rank: Option<usize>,
    },
    /// Recorded when an agent leaves the raising set.
    Fallback { agent: AgentId, set: BundleSet, rank: usize },
    /// `agent` yielded `bundle` to its holder at an exact tie.
    Concede { agent: AgentId, bundle: BundleId },
    IterationEnd,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub algorithm: Algorithm,
    pub initial: Outcome,
    pub events: Vec<Event>,
    pub iterations: u64,
    pub demand_queries: u64,
}

/// First invariant broken during replay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayError {
    pub event_index: usize,
    pub message: String,
}

impl std::fmt::Display for ReplayError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "event {}: {}", self.event_index, self.message)
    }
}

impl std::error::Error for ReplayError {}

/// Aggregates gathered while replaying.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplaySummary {
    pub outcome: Outcome,
    pub merges: usize,
    pub price_raises: usize,
    pub steals: usize,
    pub max_steal_depth: usize,
    pub iterations: u64,
}

impl Trace {
    pub fn new(algorithm: Algorithm, initial: Outcome) -> Trace {
        Trace { algorithm, initial, events: Vec::new(), iterations: 0, demand_queries: 0 }
    }

    pub fn push(&mut self, e: Event) {
        self.events.push(e);
    }

    /// Replays the log, checking the structural invariants. `n` is the number
    /// of agents.
    pub fn replay(&self) -> Result<ReplaySummary, ReplayError> {
        let mut o = self.initial.clone();
        let n = o.assignment.len();
        let mut pool: Vec<bool> = vec![true; n];
        let mut ever_allocated = ItemSet::EMPTY;
        let mut summary = ReplaySummary {
            outcome: o.clone(),
            merges: 0,
            price_raises: 0,
            steals: 0,
            max_steal_depth: 0,
            iterations: 0,
        };
        for (idx, e) in self.events.iter().enumerate() {
            let fail = |message: String| Err(ReplayError { event_index: idx, message });
            match e {
                Event::Merge { parts, into, price } => {
                    if parts.len() < 2 || !parts.is_subset(o.catalog.live()) {
                        return fail(format!("merge of {parts:?} is not a coarsening of the live catalog"));
                    }
                    let sum = o.prices.of(*parts);
                    if &sum != price {
                        return fail(format!("merged price {price} differs from the sum of parts {sum}"));
                    }
                    let id = o.catalog.merge_in_place(*parts).map_err(|err| ReplayError {
                        event_index: idx,
                        message: err.to_string(),
                    })?;
                    if id != *into {
                        return fail(format!("merge produced {id:?}, log says {into:?}"));
                    }
                    o.prices.set(id, price.clone());
                    summary.merges += 1;
                }
                Event::PriceRaise { bundle, old, new } => {
                    if !o.catalog.is_live(*bundle) {
                        return fail(format!("price raise on retired bundle {bundle:?}"));
                    }
                    if o.prices.get(*bundle) != old {
                        return fail(format!("raise starts from {old}, current price is {}", o.prices.get(*bundle)));
                    }
                    if new <= old {
                        return fail(format!("price of {bundle:?} moved from {old} to {new}"));
                    }
                    o.prices.set(*bundle, new.clone());
                    summary.price_raises += 1;
                }
                Event::PoolAdd { agent } => pool[*agent] = true,
                Event::PoolRemove { agent } => {
                    if !pool[*agent] {
                        return fail(format!("agent {agent} removed from pool but not in it"));
                    }
                    pool[*agent] = false;
                }
                Event::Reject { agent } => {
                    if !o.assignment[*agent].is_empty() {
                        return fail(format!("rejected agent {agent} still holds bundles"));
                    }
                }
                Event::Assign { agent, bundles } => {
                    if !bundles.is_subset(o.catalog.live()) {
                        return fail(format!("assigning retired bundles {bundles:?}"));
                    }
                    o.assignment[*agent] = *bundles;
                }
                Event::Unassign { agent } => o.assignment[*agent] = BundleSet::EMPTY,
                Event::Steal { depth, thief_rank, victim_rank, .. } => {
                    let strictly_earlier = match (victim_rank, thief_rank) {
                        (Some(v), Some(t)) => v < t,
                        (Some(_), None) => true,
                        (None, _) => false,
                    };
                    if !strictly_earlier {
                        return fail(format!("steal chain order not decreasing: victim {victim_rank:?}, thief {thief_rank:?}"));
                    }
                    if *depth > n {
                        return fail(format!("steal recursion depth {depth} exceeds {n} agents"));
                    }
                    summary.steals += 1;
                    summary.max_steal_depth = summary.max_steal_depth.max(*depth);
                }
                Event::Fallback { .. } | Event::Concede { .. } => {}
                Event::IterationEnd => {
                    summary.iterations += 1;
                    if let Err(err) = o.check(n) {
                        return fail(err.to_string());
                    }
                    let allocated = o.allocation().into_iter().fold(ItemSet::EMPTY, ItemSet::union);
                    if !ever_allocated.is_subset(allocated) {
                        return fail(format!(
                            "items {:?} were allocated earlier and are now unallocated",
                            ever_allocated.difference(allocated)
                        ));
                    }
                    ever_allocated = allocated;
                    if self.algorithm == Algorithm::Poly && summary.iterations > (n * n).max(1) as u64 {
                        return fail(format!("{} main-loop iterations exceed n² = {}", summary.iterations, n * n));
                    }
                }
            }
        }
        if let Some(a) = pool.iter().position(|&p| p) {
            return Err(ReplayError { event_index: self.events.len(), message: format!("agent {a} still in pool at the end") });
        }
        summary.outcome = o;
        Ok(summary)
    }
}
