//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so every line is printed; exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{best_avoiding, continuous_raise, held_utility, q, suite_shape};
use cwe::instances;
use cwe::market::{is_cwe, Auction, Catalog, Outcome};
use cwe::poly::PolyState;
use cwe::revenue::{ceil_log2_2k, maximize_revenue, shift_prices};
use cwe::simple::{granularity, run_simple};
use cwe::trace::Trace;
use cwe::valuation::ItemSet;
use cwe::verifier::{
    brute_force_optimal, brute_force_over_catalog, config_lp_fractional_opt, enumerate_stable, max_cwe_revenue,
    max_cwe_welfare, supporting_prices_exist, OracleCaps,
};
use cwe::{run_poly, Scalar};

const POLY_SUITE: u64 = 200;
const SIMPLE_SUITE: u64 = 50;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn suite_instance(seed: u64) -> (Auction, Vec<ItemSet>, Scalar) {
    let (n, m) = suite_shape(seed);
    let (a, _) = instances::random_explicit(n, m, seed, 64).unwrap();
    let (y, sw_y) = brute_force_optimal(&a, &OracleCaps::default()).unwrap();
    (a, y, sw_y)
}

/// Poly run driven one half-iteration at a time so each price raise can be
/// checked against its pre-raise state.
struct SteppedRun {
    outcome: Outcome,
    trace: Trace,
    raises: usize,
    non_maximal: Vec<String>,
    sweep_mismatches: Vec<String>,
}

fn stepped_poly(a: &Auction, y: &[ItemSet], compare_sweep: bool) -> SteppedRun {
    let mut st = PolyState::new(a, y).unwrap();
    let mut raises = 0;
    let mut non_maximal = Vec::new();
    let mut sweep_mismatches = Vec::new();
    while st.allocate_next(a).unwrap() {
        let before = st.clone();
        st.end_iteration(a).unwrap();
        raises += 1;
        for (i, x) in st.assignment.iter().enumerate() {
            if x.is_empty() {
                continue;
            }
            let held = held_utility(a, i, &st.catalog, &st.prices, *x);
            let alt = best_avoiding(a, i, &st.catalog, &st.prices, *x);
            if held != alt {
                non_maximal.push(format!("raise {raises}, agent {i}: holds {held}, best avoiding {alt}"));
            }
        }
        if compare_sweep {
            let r = continuous_raise(a, &before.catalog, &before.prices, &before.assignment);
            if r.prices != st.prices || r.fallback != st.fallback {
                sweep_mismatches.push(format!(
                    "raise {raises}: discrete {:?} / {:?}, sweep {:?} / {:?}",
                    st.prices, st.fallback, r.prices, r.fallback
                ));
            }
        }
        assert!(st.trace.iterations <= 4 * (a.n() * a.n()) as u64 + 4, "runaway main loop");
    }
    SteppedRun { outcome: st.outcome(), trace: st.trace, raises, non_maximal, sweep_mismatches }
}

#[derive(Default)]
struct Traces {
    all: Vec<(String, Trace)>,
}

impl Traces {
    fn add(&mut self, label: String, t: Trace) {
        self.all.push((label, t));
    }
}

fn half_welfare(traces: &mut Traces) -> Verdict {
    let mut bad = Vec::new();
    for seed in 0..POLY_SUITE {
        let (a, y, sw_y) = suite_instance(seed);
        let (o, t) = run_poly(&a, &y).unwrap();
        if !is_cwe(&a, &o).unwrap().is_ok() || o.social_welfare(&a) < sw_y.half() {
            bad.push(format!("poly seed {seed}"));
        }
        traces.add(format!("poly seed {seed}"), t);
    }
    for seed in 0..SIMPLE_SUITE {
        let (a, y, sw_y) = suite_instance(seed);
        let g = granularity(&a);
        let eps = if g.is_zero() { Scalar::one() } else { g.half() };
        let (o, t) = run_simple(&a, &y, &eps).unwrap();
        if !is_cwe(&a, &o).unwrap().is_ok() || o.social_welfare(&a) < sw_y.half() {
            bad.push(format!("simple seed {seed}"));
        }
        traces.add(format!("simple seed {seed}"), t);
    }
    verdict(
        bad.is_empty(),
        format!("{POLY_SUITE} poly + {SIMPLE_SUITE} simple runs, CWE with SW ≥ SW(Y)/2; failures: {bad:?}"),
    )
}

fn gap_instance(traces: &mut Traces) -> Verdict {
    let eps = q("1/10");
    let (a, y) = instances::gap3(&eps).unwrap();
    let caps = OracleCaps::default();
    let (_, opt) = brute_force_optimal(&a, &caps).unwrap();
    let (best, _) = max_cwe_welfare(&a, &caps).unwrap();
    let ratio = &best / &opt;
    let (_, t) = run_poly(&a, &y).unwrap();
    traces.add("gap3 poly".into(), t);
    let (_, t) = run_simple(&a, &y, &q("1/20")).unwrap();
    traces.add("gap3 simple".into(), t);
    let expected = &(&Scalar::from_int(2) + &eps) / &Scalar::from_int(3);
    verdict(
        opt == q("3") && best == q("21/10") && ratio == expected && ratio == q("7/10"),
        format!("optimum {opt}, max CWE welfare {best}, ratio {ratio}"),
    )
}

fn item_pricing() -> Verdict {
    let caps = OracleCaps::default();
    let eps = q("1/10");
    let mut notes = Vec::new();
    let mut ok = true;
    for m in 2..=5 {
        let (a, _) = instances::item_pricing_um_sm(m, &eps).unwrap();
        let (_, opt) = brute_force_optimal(&a, &caps).unwrap();
        let stable = enumerate_stable(&a, &Catalog::singletons(m), &caps).unwrap();
        let best = stable.iter().map(|s| s.welfare.clone()).max().unwrap();
        ok &= best == &Scalar::one() + &eps && opt == Scalar::from_int(m as i64);
        notes.push(format!("um_sm m={m}: best stable {best}, optimum {opt}"));
    }
    let (a, _) = instances::item_pricing_xos(3, &q("1/8")).unwrap();
    let stable = enumerate_stable(&a, &Catalog::singletons(3), &caps).unwrap();
    let multi: Vec<_> = stable.iter().filter(|s| s.assignment.iter().map(|x| x.len()).sum::<usize>() > 1).collect();
    if let Some(s) = multi.first() {
        ok = false;
        notes.push(format!(
            "xos m=3 δ=1/8: {} stable outcomes sell more than one item, e.g. {:?} at {:?} (welfare {})",
            multi.len(),
            s.assignment,
            s.prices,
            s.welfare
        ));
    } else {
        notes.push("xos m=3 δ=1/8: every stable outcome sells at most one item".into());
    }
    verdict(ok, notes.join("; "))
}

fn we_characterization() -> Verdict {
    let caps = OracleCaps::default();
    let mut disagree = Vec::new();
    let mut supported = 0;
    for seed in 0..100u64 {
        let n = 2 + (seed % 3) as usize;
        let m = 1 + (seed / 3 % 4) as usize;
        let (a, _) = instances::random_explicit(n, m, 1000 + seed, 64).unwrap();
        let c = Catalog::singletons(m);
        let (x, opt) = brute_force_over_catalog(&a, &c, &caps).unwrap();
        let lp = config_lp_fractional_opt(&a, &c, &caps).unwrap().value;
        let sup = supporting_prices_exist(&a, &c, &x, &caps).unwrap().is_some();
        supported += sup as usize;
        if sup != (lp == opt) {
            disagree.push(seed);
        }
    }
    verdict(
        disagree.is_empty(),
        format!("100 instances, {supported} with supporting item prices; disagreements {disagree:?}"),
    )
}

fn price_shift() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = Vec::new();
    for pair in 0..100u64 {
        let (a, y, _) = suite_instance(500 + pair);
        let (o, _) = run_poly(&a, &y).unwrap();
        let vmax = (0..a.n()).map(|i| a.valuation(i).eval(a.universe())).max().unwrap();
        let k: i64 = rng.random_range(0..=256);
        let sigma = &(&Scalar::ratio(k, 256) * &vmax) * &Scalar::from_int(2);
        let shifted = shift_prices(&a, &o, &sigma).unwrap();
        if !is_cwe(&a, &shifted).unwrap().is_ok() {
            bad.push((pair, sigma.to_string()));
        }
    }
    verdict(bad.is_empty(), format!("100 (CWE, σ) pairs; failures {bad:?}"))
}

fn revenue_lemma(traces: &mut Traces) -> Verdict {
    let mut bad = Vec::new();
    let mut tight = None::<Scalar>;
    for seed in 0..POLY_SUITE {
        let (a, y, sw_y) = suite_instance(seed);
        let run = maximize_revenue(&a, &y).unwrap();
        let k = run.ladder.k;
        let ell = ceil_log2_2k(k);
        let (by_sw0, by_y) = if ell == 0 {
            (Scalar::zero(), Scalar::zero())
        } else {
            let l = Scalar::from_int(ell as i64);
            (&run.ladder.sw0 / &(&Scalar::from_int(8) * &l), &sw_y / &(&Scalar::from_int(16) * &l))
        };
        if run.revenue < by_sw0 || run.revenue < by_y {
            bad.push(seed);
        }
        if by_sw0.is_positive() {
            let r = &run.revenue / &by_sw0;
            if tight.as_ref().is_none_or(|t| &r < t) {
                tight = Some(r);
            }
        }
        traces.add(format!("revenue seed {seed}"), run.trace);
    }
    verdict(
        bad.is_empty(),
        format!(
            "{POLY_SUITE} runs; smallest revenue / (sw0/8ℓ) = {}; failures {bad:?}",
            tight.map_or("n/a".to_string(), |t| t.to_string())
        ),
    )
}

fn logn_separation() -> Verdict {
    let (a, _) = instances::logn_revenue(4).unwrap();
    let caps = OracleCaps::default();
    let (_, opt) = brute_force_optimal(&a, &caps).unwrap();
    let (rev, _) = max_cwe_revenue(&a, &caps).unwrap();
    verdict(rev <= Scalar::one() && opt == q("25/12"), format!("max CWE revenue {rev}, optimum {opt}"))
}

fn raise_checks(traces: &mut Traces) -> (Verdict, Verdict) {
    let mut raises = 0;
    let mut non_maximal = Vec::new();
    let mut compared = 0;
    let mut swept_raises = 0;
    let mut mismatches = Vec::new();
    for seed in 0..POLY_SUITE {
        let (a, y, _) = suite_instance(seed);
        let sweep = a.n() <= 3 && compared < 50;
        let run = stepped_poly(&a, &y, sweep);
        let (reference, _) = run_poly(&a, &y).unwrap();
        assert_eq!(run.outcome, reference, "stepped run diverged on seed {seed}");
        raises += run.raises;
        non_maximal.extend(run.non_maximal.into_iter().map(|s| format!("seed {seed} {s}")));
        if sweep {
            compared += 1;
            swept_raises += run.raises;
            mismatches.extend(run.sweep_mismatches.into_iter().map(|s| format!("seed {seed} {s}")));
        }
        traces.add(format!("stepped seed {seed}"), run.trace);
    }
    (
        verdict(non_maximal.is_empty(), format!("{raises} price raises checked; violations {non_maximal:?}")),
        verdict(
            mismatches.is_empty() && compared == 50,
            format!("{compared} instances, {swept_raises} raises against the breakpoint sweep; mismatches {mismatches:?}"),
        ),
    )
}

fn structural(traces: &Traces) -> Verdict {
    let mut bad = Vec::new();
    for (label, t) in &traces.all {
        if let Err(e) = t.replay() {
            bad.push(format!("{label}: {e}"));
        }
    }
    verdict(bad.is_empty(), format!("{} traces replayed; failures {bad:?}", traces.all.len()))
}

fn main() {
    let mut traces = Traces::default();
    let mut results: Vec<(u32, &str, Verdict, f64)> = Vec::new();
    let mut timed = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        results.push((id, name, v, start.elapsed().as_secs_f64()));
    };
    timed(1, "half-welfare theorem", &mut || half_welfare(&mut traces));
    timed(2, "gap instance", &mut || gap_instance(&mut traces));
    timed(3, "item-pricing lower bounds", &mut item_pricing);
    timed(4, "WE characterization", &mut we_characterization);
    timed(5, "price-shift claim", &mut price_shift);
    timed(6, "revenue lemma", &mut || revenue_lemma(&mut traces));
    timed(7, "log-n separation", &mut logn_separation);
    let mut pair = None;
    timed(8, "RaisePrices maximality", &mut || {
        let (c8, c10) = raise_checks(&mut traces);
        pair = Some(c10);
        c8
    });
    timed(9, "structural invariants", &mut || structural(&traces));
    let c10 = pair.take().expect("criterion 8 ran");
    timed(10, "discrete vs continuous RaisePrices", &mut || verdict(c10.pass, c10.detail.clone()));

    let mut failed = 0;
    for (id, name, v, secs) in &results {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        failed += !v.pass as usize;
        println!("{tag} criterion {id} ({name}, {secs:.1}s): {}", v.detail);
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
