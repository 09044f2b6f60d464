//! Item sets and the valuation classes buyers can hold.

use std::fmt;

use crate::error::{input, Error, Result};
use crate::scalar::Scalar;

/// Largest item universe an explicit (tabulated) valuation may cover.
pub const MAX_EXPLICIT_ITEMS: usize = 12;
/// Largest item universe any valuation may cover (bitmask width).
pub const MAX_ITEMS: usize = 64;

/// A set of items, as a bitmask over item indices `0..m`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ItemSet(pub u64);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    /// All items `0..m`.
    pub fn full(m: usize) -> ItemSet {
        assert!(m <= MAX_ITEMS);
        if m == 64 {
            ItemSet(u64::MAX)
        } else {
            ItemSet((1u64 << m) - 1)
        }
    }

    pub fn singleton(item: usize) -> ItemSet {
        ItemSet(1u64 << item)
    }

    pub fn from_items<I: IntoIterator<Item = usize>>(items: I) -> ItemSet {
        ItemSet(items.into_iter().fold(0u64, |acc, i| acc | (1u64 << i)))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, item: usize) -> bool {
        item < 64 && self.0 & (1u64 << item) != 0
    }

    pub fn is_subset(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & other.0)
    }

    pub fn difference(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: ItemSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Per-class parameters of a valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValuationKind {
    /// Full table indexed by the subset bitmask (`2^m` entries).
    Explicit(Vec<Scalar>),
    /// `v(S) = Σ_{j∈S} w_j`.
    Additive(Vec<Scalar>),
    /// `v(S) = max_{j∈S} w_j`.
    UnitDemand(Vec<Scalar>),
    /// `v(S) = value` iff `S ⊇ desired`.
    SingleMinded { desired: ItemSet, value: Scalar },
    /// Max over additive clauses.
    Xos(Vec<Vec<Scalar>>),
}

/// A monotone, normalized set function over `m` items.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Valuation {
    items: usize,
    kind: ValuationKind,
}

/// First witness found by [`Valuation::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NonZeroEmpty(Scalar),
    NegativeWeight { item: usize, weight: Scalar },
    NotMonotone { smaller: ItemSet, larger: ItemSet, smaller_value: Scalar, larger_value: Scalar },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonZeroEmpty(v) => write!(f, "v(∅) = {v}, expected 0"),
            Violation::NegativeWeight { item, weight } => write!(f, "item {item} has negative weight {weight}"),
            Violation::NotMonotone { smaller, larger, smaller_value, larger_value } => write!(
                f,
                "not monotone: v({smaller:?}) = {smaller_value} > v({larger:?}) = {larger_value}"
            ),
        }
    }
}

impl Valuation {
    /// Wraps a total table. The table must have `2^m` entries.
    pub fn explicit(m: usize, table: Vec<Scalar>) -> Result<Valuation> {
        if m > MAX_EXPLICIT_ITEMS {
            return input(format!("explicit valuations support at most {MAX_EXPLICIT_ITEMS} items, got {m}"));
        }
        if table.len() != 1 << m {
            return input(format!("explicit table over {m} items needs {} entries, got {}", 1 << m, table.len()));
        }
        Ok(Valuation { items: m, kind: ValuationKind::Explicit(table) })
    }

    /// Builds an explicit valuation from a partial table. Specified subsets keep
    /// their value; every other subset gets the largest value specified on one
    /// of its subsets (0 if none). This is the minimal monotone completion when
    /// the specified entries are themselves consistent.
    pub fn explicit_from_partial(m: usize, entries: &[(ItemSet, Scalar)]) -> Result<Valuation> {
        if m > MAX_EXPLICIT_ITEMS {
            return input(format!("explicit valuations support at most {MAX_EXPLICIT_ITEMS} items, got {m}"));
        }
        let full = ItemSet::full(m);
        let mut given: Vec<Option<Scalar>> = vec![None; 1 << m];
        for (set, value) in entries {
            if !set.is_subset(full) {
                return input(format!("subset {set:?} mentions an item outside 0..{m}"));
            }
            if let Some(prev) = &given[set.0 as usize] {
                if prev != value {
                    return input(format!("subset {set:?} specified twice with different values"));
                }
            }
            given[set.0 as usize] = Some(value.clone());
        }
        // closure[S] = max over specified T ⊆ S, computed by the usual
        // subset-max sweep over each bit.
        let mut closure: Vec<Scalar> =
            given.iter().map(|g| g.clone().unwrap_or_else(Scalar::zero)).collect();
        for bit in 0..m {
            for mask in 0..(1usize << m) {
                if mask & (1 << bit) != 0 {
                    let lower = closure[mask ^ (1 << bit)].clone();
                    if lower > closure[mask] {
                        closure[mask] = lower;
                    }
                }
            }
        }
        let table = (0..(1usize << m))
            .map(|mask| given[mask].clone().unwrap_or_else(|| closure[mask].clone()))
            .collect();
        Valuation::explicit(m, table)
    }

    pub fn additive(weights: Vec<Scalar>) -> Valuation {
        Valuation { items: weights.len(), kind: ValuationKind::Additive(weights) }
    }

    pub fn unit_demand(weights: Vec<Scalar>) -> Valuation {
        Valuation { items: weights.len(), kind: ValuationKind::UnitDemand(weights) }
    }

    pub fn single_minded(m: usize, desired: ItemSet, value: Scalar) -> Result<Valuation> {
        if !desired.is_subset(ItemSet::full(m)) {
            return input(format!("desired set {desired:?} exceeds the {m}-item universe"));
        }
        Ok(Valuation { items: m, kind: ValuationKind::SingleMinded { desired, value } })
    }

    pub fn xos(m: usize, clauses: Vec<Vec<Scalar>>) -> Result<Valuation> {
        if let Some(c) = clauses.iter().find(|c| c.len() != m) {
            return input(format!("xos clause has {} weights, expected {m}", c.len()));
        }
        Ok(Valuation { items: m, kind: ValuationKind::Xos(clauses) })
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn kind(&self) -> &ValuationKind {
        &self.kind
    }

    /// `v(S)`, rejecting items outside the universe.
    pub fn value(&self, set: ItemSet) -> Result<Scalar> {
        if !set.is_subset(ItemSet::full(self.items)) {
            let bad = set.difference(ItemSet::full(self.items));
            return Err(Error::Input(format!("unknown item(s) {bad:?} for a {}-item valuation", self.items)));
        }
        Ok(self.eval(set))
    }

    /// `v(S)` without the universe check; items outside the universe are
    /// ignored by parametric classes and are a logic error for explicit ones.
    pub fn eval(&self, set: ItemSet) -> Scalar {
        match &self.kind {
            ValuationKind::Explicit(table) => table[set.0 as usize].clone(),
            ValuationKind::Additive(w) => set.iter().filter_map(|j| w.get(j)).sum(),
            ValuationKind::UnitDemand(w) => set
                .iter()
                .filter_map(|j| w.get(j))
                .max()
                .cloned()
                .unwrap_or_else(Scalar::zero),
            ValuationKind::SingleMinded { desired, value } => {
                if desired.is_subset(set) {
                    value.clone()
                } else {
                    Scalar::zero()
                }
            }
            ValuationKind::Xos(clauses) => clauses
                .iter()
                .map(|c| set.iter().map(|j| &c[j]).sum::<Scalar>())
                .max()
                .unwrap_or_else(Scalar::zero),
        }
    }

    /// Checks normalization, non-negativity and (for explicit tables)
    /// monotonicity over every pair of subsets differing in one item.
    #[allow(clippy::result_large_err)]
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let negative = |w: &[Scalar]| {
            w.iter()
                .enumerate()
                .find(|(_, x)| x.is_negative())
                .map(|(item, weight)| Violation::NegativeWeight { item, weight: weight.clone() })
        };
        match &self.kind {
            ValuationKind::Explicit(table) => {
                if !table[0].is_zero() {
                    return Err(Violation::NonZeroEmpty(table[0].clone()));
                }
                for mask in 0..table.len() {
                    for bit in 0..self.items {
                        if mask & (1 << bit) == 0 {
                            let larger = mask | (1 << bit);
                            if table[mask] > table[larger] {
                                return Err(Violation::NotMonotone {
                                    smaller: ItemSet(mask as u64),
                                    larger: ItemSet(larger as u64),
                                    smaller_value: table[mask].clone(),
                                    larger_value: table[larger].clone(),
                                });
                            }
                        }
                    }
                }
                Ok(())
            }
            ValuationKind::Additive(w) | ValuationKind::UnitDemand(w) => negative(w).map_or(Ok(()), Err),
            ValuationKind::SingleMinded { desired, value } => {
                if value.is_negative() {
                    return Err(Violation::NegativeWeight {
                        item: desired.iter().next().unwrap_or(0),
                        weight: value.clone(),
                    });
                }
                // v(∅) = value when the desired set is empty.
                if desired.is_empty() && !value.is_zero() {
                    return Err(Violation::NonZeroEmpty(value.clone()));
                }
                Ok(())
            }
            ValuationKind::Xos(clauses) => clauses.iter().find_map(|c| negative(c)).map_or(Ok(()), Err),
        }
    }

    /// Every number the valuation is built from; the greatest common divisor
    /// of these divides every value the function can take.
    pub fn parameters(&self) -> Vec<Scalar> {
        match &self.kind {
            ValuationKind::Explicit(t) => t.clone(),
            ValuationKind::Additive(w) | ValuationKind::UnitDemand(w) => w.clone(),
            ValuationKind::SingleMinded { value, .. } => vec![value.clone()],
            ValuationKind::Xos(c) => c.iter().flatten().cloned().collect(),
        }
    }
}
