//! JSON instance files and run reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::market::{Agent, Auction, BundleId, BundleSet, Catalog, Outcome, PriceMap};
use crate::scalar::Scalar;
use crate::valuation::{ItemSet, Valuation, ValuationKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub items: Vec<String>,
    pub agents: Vec<AgentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_allocation: Option<Vec<InitialEntry>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub name: String,
    pub valuation: ValuationEntry,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialEntry {
    pub agent: String,
    pub bundle: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetValue {
    pub set: Vec<String>,
    pub value: Scalar,
}

/// Weights are keyed by item name; missing items weigh 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValuationEntry {
    /// Unlisted subsets take the largest listed value among their subsets.
    Explicit { values: Vec<SetValue> },
    Additive { weights: BTreeMap<String, Scalar> },
    UnitDemand { weights: BTreeMap<String, Scalar> },
    SingleMinded { set: Vec<String>, value: Scalar },
    Xos { clauses: Vec<BTreeMap<String, Scalar>> },
}

fn item_set(auction_items: &[String], names: &[String]) -> Result<ItemSet> {
    let mut s = ItemSet::EMPTY;
    for name in names {
        let Some(j) = auction_items.iter().position(|x| x == name) else {
            return input(format!("unknown item {name:?}"));
        };
        if s.contains(j) {
            return input(format!("item {name:?} listed twice in one set"));
        }
        s = s.union(ItemSet::singleton(j));
    }
    Ok(s)
}

fn weight_vector(items: &[String], weights: &BTreeMap<String, Scalar>) -> Result<Vec<Scalar>> {
    let mut w = vec![Scalar::zero(); items.len()];
    for (name, x) in weights {
        let Some(j) = items.iter().position(|i| i == name) else {
            return input(format!("unknown item {name:?} in weights"));
        };
        w[j] = x.clone();
    }
    Ok(w)
}

fn names(items: &[String], set: ItemSet) -> Vec<String> {
    set.iter().map(|j| items[j].clone()).collect()
}

fn weight_map(items: &[String], w: &[Scalar]) -> BTreeMap<String, Scalar> {
    items.iter().cloned().zip(w.iter().cloned()).filter(|(_, x)| !x.is_zero()).collect()
}

impl ValuationEntry {
    fn build(&self, items: &[String]) -> Result<Valuation> {
        let m = items.len();
        match self {
            ValuationEntry::Explicit { values } => {
                let entries = values
                    .iter()
                    .map(|sv| Ok((item_set(items, &sv.set)?, sv.value.clone())))
                    .collect::<Result<Vec<_>>>()?;
                Valuation::explicit_from_partial(m, &entries)
            }
            ValuationEntry::Additive { weights } => Ok(Valuation::additive(weight_vector(items, weights)?)),
            ValuationEntry::UnitDemand { weights } => Ok(Valuation::unit_demand(weight_vector(items, weights)?)),
            ValuationEntry::SingleMinded { set, value } => Valuation::single_minded(m, item_set(items, set)?, value.clone()),
            ValuationEntry::Xos { clauses } => {
                Valuation::xos(m, clauses.iter().map(|c| weight_vector(items, c)).collect::<Result<Vec<_>>>()?)
            }
        }
    }

    fn describe(items: &[String], v: &Valuation) -> ValuationEntry {
        match v.kind() {
            ValuationKind::Explicit(table) => ValuationEntry::Explicit {
                values: (1..table.len())
                    .map(|mask| SetValue { set: names(items, ItemSet(mask as u64)), value: table[mask].clone() })
                    .collect(),
            },
            ValuationKind::Additive(w) => ValuationEntry::Additive { weights: weight_map(items, w) },
            ValuationKind::UnitDemand(w) => ValuationEntry::UnitDemand { weights: weight_map(items, w) },
            ValuationKind::SingleMinded { desired, value } => {
                ValuationEntry::SingleMinded { set: names(items, *desired), value: value.clone() }
            }
            ValuationKind::Xos(c) => ValuationEntry::Xos { clauses: c.iter().map(|w| weight_map(items, w)).collect() },
        }
    }
}

impl InstanceFile {
    /// Builds the auction and, if present, the initial allocation indexed by
    /// agent (agents not mentioned start empty).
    pub fn build(&self) -> Result<(Auction, Option<Vec<ItemSet>>)> {
        let agents = self
            .agents
            .iter()
            .map(|a| {
                let valuation = a.valuation.build(&self.items).map_err(|e| match e {
                    Error::Input(msg) => Error::Input(format!("agent {:?}: {msg}", a.name)),
                    other => other,
                })?;
                Ok(Agent { name: a.name.clone(), valuation })
            })
            .collect::<Result<Vec<_>>>()?;
        let auction = Auction::new(self.items.clone(), agents)?;
        let initial = match &self.initial_allocation {
            None => None,
            Some(entries) => {
                let mut y = vec![ItemSet::EMPTY; auction.n()];
                for e in entries {
                    let i = auction.agent_index(&e.agent)?;
                    if !y[i].is_empty() {
                        return input(format!("agent {:?} appears twice in initial_allocation", e.agent));
                    }
                    y[i] = item_set(auction.items(), &e.bundle)?;
                }
                auction.check_allocation(&y)?;
                Some(y)
            }
        };
        Ok((auction, initial))
    }

    pub fn describe(auction: &Auction, initial: Option<&[ItemSet]>) -> InstanceFile {
        let items = auction.items().to_vec();
        let agents = auction
            .agents()
            .iter()
            .map(|a| AgentEntry { name: a.name.clone(), valuation: ValuationEntry::describe(&items, &a.valuation) })
            .collect();
        let initial_allocation = initial.map(|y| {
            y.iter()
                .enumerate()
                .filter(|(_, s)| !s.is_empty())
                .map(|(i, s)| InitialEntry { agent: auction.agents()[i].name.clone(), bundle: names(&items, *s) })
                .collect()
        });
        InstanceFile { items, agents, initial_allocation }
    }
}

pub fn parse_instance(text: &str) -> Result<(Auction, Option<Vec<ItemSet>>)> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("instance file is not valid: {e}")))?;
    file.build()
}

pub fn load_instance(path: &Path) -> Result<(Auction, Option<Vec<ItemSet>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_instance(&text)
}

pub fn instance_json(auction: &Auction, initial: Option<&[ItemSet]>) -> String {
    serde_json::to_string_pretty(&InstanceFile::describe(auction, initial)).expect("instance serializes")
}

/// An outcome in item names, with bundles renumbered `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeView {
    pub catalog: Vec<Vec<String>>,
    pub prices: Vec<Scalar>,
    pub assignment: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub withheld: Vec<String>,
    /// Price at which withheld items are nominally offered: more than anyone
    /// values the whole market.
    #[serde(default)]
    pub withheld_price: Option<Scalar>,
}

impl OutcomeView {
    pub fn new(auction: &Auction, outcome: &Outcome) -> OutcomeView {
        let o = outcome.compact();
        let items = auction.items();
        OutcomeView {
            catalog: o.catalog.ids().map(|id| names(items, o.catalog.bundle(id))).collect(),
            prices: o.catalog.ids().map(|id| o.prices.get(id).clone()).collect(),
            assignment: auction
                .agents()
                .iter()
                .zip(&o.assignment)
                .map(|(a, x)| (a.name.clone(), x.iter().map(|b| b.0).collect()))
                .collect(),
            withheld: names(items, o.catalog.withheld()),
            withheld_price: Some(auction.prohibitive_price()),
        }
    }

    /// Rebuilds the outcome. Items in no bundle are withheld; agents not
    /// listed hold nothing.
    pub fn to_outcome(&self, auction: &Auction) -> Result<Outcome> {
        let bundles = self.catalog.iter().map(|b| item_set(auction.items(), b)).collect::<Result<Vec<_>>>()?;
        let catalog = Catalog::new(auction.m(), bundles)?;
        if self.prices.len() != catalog.len() {
            return input(format!("{} prices for {} bundles", self.prices.len(), catalog.len()));
        }
        let prices = PriceMap::new(self.prices.clone())?;
        let mut assignment = vec![BundleSet::EMPTY; auction.n()];
        for (name, ids) in &self.assignment {
            let i = auction.agent_index(name)?;
            for &b in ids {
                if b >= catalog.len() {
                    return input(format!("agent {name:?} holds bundle {b}, catalog has {}", catalog.len()));
                }
                assignment[i].insert(BundleId(b));
            }
        }
        let o = Outcome { catalog, prices, assignment };
        o.check(auction.n()).map_err(|e| Error::Input(e.to_string()))?;
        Ok(o)
    }
}

pub fn parse_solution(text: &str) -> Result<OutcomeView> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("solution file is not valid: {e}")))
}
