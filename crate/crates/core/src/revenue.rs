//! Revenue from a CWE by shifting every bundle price up by the same amount.
//! Holders who can still afford their bundle keep it; the rest walk away.
//! A geometric ladder of shifts is tried and the best level is kept.

use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::market::{is_cwe, AgentId, Auction, BundleSet, CweCheck, Outcome};
use crate::poly::run_poly;
use crate::scalar::Scalar;
use crate::trace::Trace;
use crate::valuation::ItemSet;

/// Sum of the prices paid by agents that hold something.
pub fn revenue_of(outcome: &Outcome) -> Scalar {
    outcome.assignment.iter().map(|x| outcome.prices.of(*x)).sum()
}

/// Adds `sigma` to every live bundle price. An agent keeps its set iff its
/// value is at least the new price of the set.
pub fn shift_prices(auction: &Auction, outcome: &Outcome, sigma: &Scalar) -> Result<Outcome> {
    if sigma.is_negative() {
        return input(format!("price shift must be non-negative, got {sigma}"));
    }
    if let CweCheck::Violation { agent, gap, .. } = is_cwe(auction, outcome)? {
        return Err(Error::Contract(format!(
            "price shift needs a CWE; agent {agent} can gain {gap} by deviating"
        )));
    }
    Ok(shift_unchecked(auction, outcome, sigma))
}

fn shift_unchecked(auction: &Auction, outcome: &Outcome, sigma: &Scalar) -> Outcome {
    let mut shifted = outcome.clone();
    for id in outcome.catalog.ids() {
        shifted.prices.set(id, outcome.prices.get(id) + sigma);
    }
    for (i, x) in shifted.assignment.iter_mut().enumerate() {
        if x.is_empty() {
            continue;
        }
        let value = auction.valuation(i).eval(outcome.catalog.items_of(*x));
        if value < shifted.prices.of(*x) {
            *x = BundleSet::EMPTY;
        }
    }
    shifted
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Level {
    pub t: usize,
    pub sigma: Scalar,
    pub sw: Scalar,
    pub rev: Scalar,
    pub survivors: Vec<AgentId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShiftLadder {
    /// Number of agents holding something in the base outcome.
    pub k: usize,
    pub sw0: Scalar,
    /// `⌈log₂(2k)⌉`, or 0 when `k = 0`.
    pub ell: usize,
    /// Level 0 is the unshifted base; levels `1..=ell+1` use
    /// `σ_t = 2^(t−1) · sw0 / (2k)`.
    pub levels: Vec<Level>,
}

/// Smallest `ℓ` with `2^ℓ ≥ 2k`.
pub fn ceil_log2_2k(k: usize) -> usize {
    if k == 0 {
        return 0;
    }
    (2 * k).next_power_of_two().trailing_zeros() as usize
}

impl ShiftLadder {
    pub fn build(auction: &Auction, base: &Outcome) -> Result<ShiftLadder> {
        if let CweCheck::Violation { agent, .. } = is_cwe(auction, base)? {
            return Err(Error::Contract(format!("ladder base is not a CWE (agent {agent} deviates)")));
        }
        let k = base.assignment.iter().filter(|x| !x.is_empty()).count();
        let sw0 = base.social_welfare(auction);
        let ell = ceil_log2_2k(k);
        let level = |t: usize, sigma: Scalar| {
            let o = shift_unchecked(auction, base, &sigma);
            Level {
                t,
                sw: o.social_welfare(auction),
                rev: revenue_of(&o),
                survivors: (0..o.assignment.len()).filter(|&i| !o.assignment[i].is_empty()).collect(),
                sigma,
            }
        };
        let mut levels = vec![level(0, Scalar::zero())];
        if k > 0 {
            let step = &sw0 / &Scalar::from_int(2 * k as i64);
            for t in 1..=ell + 1 {
                levels.push(level(t, step.mul_pow2(t as u32 - 1)));
            }
        }
        Ok(ShiftLadder { k, sw0, ell, levels })
    }

    /// Level with the largest revenue, smallest `t` on ties.
    pub fn best(&self) -> &Level {
        let mut best = &self.levels[0];
        for l in &self.levels[1..] {
            if l.rev > best.rev {
                best = l;
            }
        }
        best
    }

    /// `sw0 / (8ℓ)`, zero when nothing is held.
    pub fn guarantee(&self) -> Scalar {
        if self.ell == 0 {
            return Scalar::zero();
        }
        &self.sw0 / &Scalar::from_int(8 * self.ell as i64)
    }
}

#[derive(Clone, Debug)]
pub struct RevenueRun {
    pub base: Outcome,
    pub trace: Trace,
    pub ladder: ShiftLadder,
    pub t_star: usize,
    pub outcome: Outcome,
    pub revenue: Scalar,
}

/// Runs the polynomial procedure from `initial` and returns the best level of
/// the shift ladder built on its output.
pub fn maximize_revenue(auction: &Auction, initial: &[ItemSet]) -> Result<RevenueRun> {
    let (base, trace) = run_poly(auction, initial)?;
    let ladder = ShiftLadder::build(auction, &base)?;
    let best = ladder.best();
    let t_star = best.t;
    let outcome = shift_unchecked(auction, &base, &best.sigma);
    let revenue = best.rev.clone();
    Ok(RevenueRun { base, trace, ladder, t_star, outcome, revenue })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::market::{BundleId, Catalog, PriceMap};
    use crate::valuation::Valuation;

    fn q(s: &str) -> Scalar {
        s.parse().unwrap()
    }

    #[test]
    fn log_bound() {
        assert_eq!(ceil_log2_2k(0), 0);
        assert_eq!(ceil_log2_2k(1), 1);
        assert_eq!(ceil_log2_2k(2), 2);
        assert_eq!(ceil_log2_2k(3), 3);
        assert_eq!(ceil_log2_2k(4), 3);
        assert_eq!(ceil_log2_2k(5), 4);
    }

    #[test]
    fn zero_shift_is_identity() {
        let (a, y) = instances::gap3(&q("1/10")).unwrap();
        let (o, _) = run_poly(&a, &y).unwrap();
        assert_eq!(shift_prices(&a, &o, &q("0")).unwrap(), o);
    }

    #[test]
    fn gap_shift_to_the_holders_value() {
        let (a, y) = instances::gap3(&q("1/10")).unwrap();
        let (o, _) = run_poly(&a, &y).unwrap();
        assert_eq!(revenue_of(&o), q("8/5"));
        let s = shift_prices(&a, &o, &q("1/2")).unwrap();
        assert_eq!(s.assignment[0], o.assignment[0]);
        assert_eq!(revenue_of(&s), q("21/10"));
        assert!(is_cwe(&a, &s).unwrap().is_ok());
    }

    #[test]
    fn prohibitive_shift_clears_everything() {
        let (a, y) = instances::gap3(&q("1/10")).unwrap();
        let (o, _) = run_poly(&a, &y).unwrap();
        let s = shift_prices(&a, &o, &a.prohibitive_price()).unwrap();
        assert!(s.assignment.iter().all(|x| x.is_empty()));
        assert_eq!(revenue_of(&s), q("0"));
        assert!(is_cwe(&a, &s).unwrap().is_ok());
    }

    #[test]
    fn non_cwe_input_is_a_contract_error() {
        let a = Auction::anonymous(1, vec![Valuation::additive(vec![q("1")])]).unwrap();
        let o = Outcome {
            catalog: Catalog::singletons(1),
            prices: PriceMap::uniform(1, q("1/2")),
            assignment: vec![BundleSet::EMPTY],
        };
        assert!(matches!(shift_prices(&a, &o, &q("0")), Err(Error::Contract(_))));
        assert!(matches!(shift_prices(&a, &o, &q("-1")), Err(Error::Input(_))));
    }

    #[test]
    fn empty_assignment_has_zero_revenue() {
        let o = Outcome { catalog: Catalog::singletons(2), prices: PriceMap::uniform(2, q("3")), assignment: vec![] };
        assert_eq!(revenue_of(&o), q("0"));
        let sold = Outcome { assignment: vec![BundleSet::singleton(BundleId(1))], ..o };
        assert_eq!(revenue_of(&sold), q("3"));
    }

    #[test]
    fn single_agent_ladder() {
        let a = Auction::anonymous(1, vec![Valuation::additive(vec![q("1")])]).unwrap();
        let run = maximize_revenue(&a, &[ItemSet::singleton(0)]).unwrap();
        assert_eq!(run.ladder.k, 1);
        assert_eq!(run.ladder.ell, 1);
        assert_eq!(run.revenue, q("1"));
        assert_eq!(run.t_star, 0);
        assert_eq!(run.ladder.levels.len(), 3);
        assert!(run.ladder.levels[2].survivors.is_empty());
    }

    #[test]
    fn logn_revenue_stays_below_one() {
        let (a, y) = instances::logn_revenue(4).unwrap();
        let run = maximize_revenue(&a, &y).unwrap();
        assert!(run.revenue <= q("1"));
        assert!(run.revenue >= run.ladder.guarantee());
        assert_eq!(a.welfare_of(&y), q("25/12"));
    }

    #[test]
    fn nothing_held_gives_a_degenerate_ladder() {
        let a = Auction::anonymous(1, vec![Valuation::additive(vec![q("1")])]).unwrap();
        let run = maximize_revenue(&a, &[ItemSet::EMPTY]).unwrap();
        assert_eq!(run.ladder.k, 0);
        assert_eq!(run.ladder.levels.len(), 1);
        assert_eq!(run.revenue, q("0"));
    }
}
