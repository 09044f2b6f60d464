//! Command-line front end. [`run_cli`] does all the work and returns the
//! exit code with the text for each stream, so it can be tested in-process.
//!
//! Exit codes: 0 success, 1 internal failure, 2 bad input, 3 an oracle or
//! enumeration cap was hit, 4 a result failed verification.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::instances::{InstanceSpec, DEFAULT_DENOMINATOR};
use crate::io::{instance_json, load_instance, parse_solution, OutcomeView};
use crate::market::{is_cwe, Auction, CweCheck, Outcome};
use crate::poly::run_poly;
use crate::revenue::{maximize_revenue, revenue_of, Level};
use crate::scalar::Scalar;
use crate::simple::{granularity, run_simple};
use crate::trace::Trace;
use crate::valuation::ItemSet;
use crate::verifier::{
    brute_force_optimal, brute_force_over_catalog, config_lp_fractional_opt, max_cwe_revenue, max_cwe_welfare,
    supporting_prices_exist, OracleCaps,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "cwe", version, about = "Bundle pricing equilibria: solve, extract revenue, verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Alg {
    Simple,
    Poly,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleKind {
    Optimal,
    LpOpt,
    MaxCwe,
    Support,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a solver and print its outcome with the welfare checks.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "poly")]
        alg: Alg,
        /// Price step for the simple solver; defaults to half the granularity.
        #[arg(long)]
        epsilon: Option<Scalar>,
        /// `optimal`, or `file:<path>` to read the allocation from an
        /// instance file. Defaults to the input's own allocation, else optimal.
        #[arg(long)]
        initial: Option<String>,
        /// Write the event log to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        no_verify: bool,
    },
    /// Run the poly solver, then pick the best uniform price shift.
    Revenue {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        initial: Option<String>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check that a reported outcome is an equilibrium.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Exhaustive oracles for small instances.
    Oracle {
        #[arg(value_enum)]
        kind: OracleKind,
        #[arg(long)]
        input: PathBuf,
        /// Outcome whose catalog (and assignment, for `support`) is used.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// With `max-cwe`, also search for the best revenue.
        #[arg(long)]
        revenue: bool,
    },
    /// Write one of the named instances as an instance file.
    PaperInstance {
        #[arg(value_parser = InstanceSpec::NAMES)]
        name: String,
        #[arg(long)]
        epsilon: Option<Scalar>,
        #[arg(long)]
        delta: Option<Scalar>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        denominator: Option<u64>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

/// Exit code and the text for stdout and stderr.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliOutput {
    fn ok(stdout: String) -> CliOutput {
        CliOutput { code: EXIT_OK, stdout, stderr: String::new() }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) => EXIT_INPUT,
        Error::Resource(_) => EXIT_RESOURCE,
        Error::Contract(_) | Error::Internal(_) => EXIT_INTERNAL,
    }
}

pub fn run_cli<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliOutput::ok(text),
                _ => CliOutput { code: EXIT_INPUT, stdout: String::new(), stderr: text },
            };
        }
    };
    match dispatch(cli.command) {
        Ok(out) => out,
        Err(e) => CliOutput { code: exit_code(&e), stdout: String::new(), stderr: format!("{e}\n") },
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}

fn resolve_initial(auction: &Auction, own: Option<Vec<ItemSet>>, flag: Option<&str>) -> Result<Vec<ItemSet>> {
    match flag {
        None => match own {
            Some(y) => Ok(y),
            None => Ok(brute_force_optimal(auction, &OracleCaps::default())?.0),
        },
        Some("optimal") => Ok(brute_force_optimal(auction, &OracleCaps::default())?.0),
        Some(other) => {
            let Some(path) = other.strip_prefix("file:") else {
                return Err(Error::Input(format!("--initial must be `optimal` or `file:<path>`, got {other:?}")));
            };
            let (other_auction, y) = load_instance(Path::new(path))?;
            let y = y.ok_or_else(|| Error::Input(format!("{path} has no initial_allocation")))?;
            if other_auction.items() != auction.items() || other_auction.n() != auction.n() {
                return Err(Error::Input(format!("{path} describes a different market")));
            }
            Ok(y)
        }
    }
}

#[derive(Serialize)]
struct RunReport {
    algorithm: &'static str,
    #[serde(flatten)]
    outcome: OutcomeView,
    sw: Scalar,
    revenue: Scalar,
    initial_sw: Scalar,
    half_welfare_bound: Scalar,
    /// Independent stability check; absent with `--no-verify`.
    #[serde(skip_serializing_if = "Option::is_none")]
    cwe_verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<Value>,
    iterations: u64,
    demand_queries: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_star: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ladder: Option<Vec<Level>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    revenue_guarantee: Option<Scalar>,
}

fn violation_json(auction: &Auction, outcome: &Outcome, check: &CweCheck) -> Option<Value> {
    match check {
        CweCheck::Ok => None,
        CweCheck::Violation { agent, better, gap } => Some(json!({
            "agent": auction.agents()[*agent].name,
            "better": outcome.catalog.items_of(*better).iter().map(|j| auction.items()[j].clone()).collect::<Vec<_>>(),
            "gap": gap,
        })),
    }
}

fn base_report(
    algorithm: &'static str,
    auction: &Auction,
    initial: &[ItemSet],
    outcome: &Outcome,
    trace: &Trace,
    verify: bool,
) -> Result<RunReport> {
    let initial_sw = auction.welfare_of(initial);
    let (cwe_verified, violation) = if verify {
        let check = is_cwe(auction, outcome)?;
        (Some(check.is_ok()), violation_json(auction, outcome, &check))
    } else {
        (None, None)
    };
    Ok(RunReport {
        algorithm,
        outcome: OutcomeView::new(auction, outcome),
        sw: outcome.social_welfare(auction),
        revenue: revenue_of(outcome),
        half_welfare_bound: initial_sw.half(),
        initial_sw,
        cwe_verified,
        violation,
        iterations: trace.iterations,
        demand_queries: trace.demand_queries,
        epsilon: None,
        t_star: None,
        ladder: None,
        revenue_guarantee: None,
    })
}

fn dispatch(cmd: Command) -> Result<CliOutput> {
    match cmd {
        Command::Solve { input, alg, epsilon, initial, trace, no_verify } => {
            let (auction, own) = load_instance(&input)?;
            let y = resolve_initial(&auction, own, initial.as_deref())?;
            let (name, outcome, log, eps) = match alg {
                Alg::Poly => {
                    if epsilon.is_some() {
                        return Err(Error::Input("--epsilon applies to --alg simple only".into()));
                    }
                    let (o, t) = run_poly(&auction, &y)?;
                    ("poly", o, t, None)
                }
                Alg::Simple => {
                    let eps = epsilon.unwrap_or_else(|| {
                        let g = granularity(&auction);
                        if g.is_zero() {
                            Scalar::one()
                        } else {
                            g.half()
                        }
                    });
                    let (o, t) = run_simple(&auction, &y, &eps)?;
                    ("simple", o, t, Some(eps))
                }
            };
            if let Some(path) = trace {
                write_file(&path, &pretty(&log))?;
            }
            let mut report = base_report(name, &auction, &y, &outcome, &log, !no_verify)?;
            report.epsilon = eps;
            let failed = !no_verify && (report.cwe_verified != Some(true) || report.sw < report.half_welfare_bound);
            finish(&report, failed)
        }
        Command::Revenue { input, initial, trace } => {
            let (auction, own) = load_instance(&input)?;
            let y = resolve_initial(&auction, own, initial.as_deref())?;
            let run = maximize_revenue(&auction, &y)?;
            if let Some(path) = trace {
                write_file(&path, &pretty(&run.trace))?;
            }
            let mut report = base_report("poly", &auction, &y, &run.outcome, &run.trace, true)?;
            let guarantee = run.ladder.guarantee();
            let failed = report.cwe_verified != Some(true) || run.revenue < guarantee;
            report.t_star = Some(run.t_star);
            report.ladder = Some(run.ladder.levels.clone());
            report.revenue_guarantee = Some(guarantee);
            finish(&report, failed)
        }
        Command::Verify { input, solution } => {
            let (auction, _) = load_instance(&input)?;
            let text = std::fs::read_to_string(&solution)
                .map_err(|e| Error::Input(format!("cannot read {}: {e}", solution.display())))?;
            let outcome = parse_solution(&text)?.to_outcome(&auction)?;
            let check = is_cwe(&auction, &outcome)?;
            let report = json!({
                "cwe_verified": check.is_ok(),
                "violation": violation_json(&auction, &outcome, &check),
                "sw": outcome.social_welfare(&auction),
                "revenue": revenue_of(&outcome),
            });
            finish(&report, !check.is_ok())
        }
        Command::Oracle { kind, input, solution, revenue } => {
            let (auction, _) = load_instance(&input)?;
            let caps = OracleCaps::default();
            let solution = match &solution {
                None => None,
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| Error::Input(format!("cannot read {}: {e}", p.display())))?;
                    Some(parse_solution(&text)?.to_outcome(&auction)?)
                }
            };
            let names = |s: ItemSet| s.iter().map(|j| auction.items()[j].clone()).collect::<Vec<_>>();
            let report = match kind {
                OracleKind::Optimal => {
                    let (y, sw) = brute_force_optimal(&auction, &caps)?;
                    let allocation: serde_json::Map<String, Value> =
                        auction.agents().iter().zip(&y).map(|(a, s)| (a.name.clone(), json!(names(*s)))).collect();
                    json!({ "sw": sw, "allocation": allocation })
                }
                OracleKind::LpOpt => {
                    let catalog = solution.as_ref().map_or_else(|| crate::market::Catalog::singletons(auction.m()), |o| o.catalog.clone());
                    let lp = config_lp_fractional_opt(&auction, &catalog, &caps)?;
                    let (_, integral) = brute_force_over_catalog(&auction, &catalog, &caps)?;
                    let weights: Vec<Value> = lp
                        .allocation
                        .weights
                        .iter()
                        .map(|(i, s, y)| json!({"agent": auction.agents()[*i].name, "set": names(catalog.items_of(*s)), "y": y}))
                        .collect();
                    json!({
                        "lp_opt": lp.value,
                        "integral_opt": integral,
                        "integral": lp.value == integral,
                        "weights": weights,
                    })
                }
                OracleKind::MaxCwe => {
                    let (sw, witness) = max_cwe_welfare(&auction, &caps)?;
                    let mut r = json!({ "sw": sw, "witness": OutcomeView::new(&auction, &witness) });
                    if revenue {
                        let (rev, w) = max_cwe_revenue(&auction, &caps)?;
                        r["revenue"] = json!(rev);
                        r["revenue_witness"] = json!(OutcomeView::new(&auction, &w));
                    }
                    r
                }
                OracleKind::Support => {
                    let o = solution.ok_or_else(|| Error::Input("oracle support needs --solution".into()))?;
                    let prices = supporting_prices_exist(&auction, &o.catalog, &o.assignment, &caps)?;
                    match prices {
                        None => json!({ "supported": false }),
                        Some(p) => {
                            let supported = Outcome { prices: p, ..o };
                            json!({ "supported": true, "witness": OutcomeView::new(&auction, &supported) })
                        }
                    }
                }
            };
            Ok(CliOutput::ok(pretty(&report)))
        }
        Command::PaperInstance { name, epsilon, delta, m, n, seed, denominator, output } => {
            let need = |flag: &str| Error::Input(format!("{name} needs --{flag}"));
            let spec = match name.as_str() {
                "gap3" => InstanceSpec::Gap3 { epsilon: epsilon.ok_or_else(|| need("epsilon"))? },
                "item_pricing_um_sm" => InstanceSpec::ItemPricingUmSm {
                    m: m.ok_or_else(|| need("m"))?,
                    epsilon: epsilon.ok_or_else(|| need("epsilon"))?,
                },
                "item_pricing_xos" => InstanceSpec::ItemPricingXos {
                    m: m.ok_or_else(|| need("m"))?,
                    delta: delta.ok_or_else(|| need("delta"))?,
                },
                "logn_revenue" => InstanceSpec::LognRevenue { n: n.ok_or_else(|| need("n"))? },
                "random_explicit" => InstanceSpec::RandomExplicit {
                    n: n.ok_or_else(|| need("n"))?,
                    m: m.ok_or_else(|| need("m"))?,
                    seed: seed.unwrap_or(0),
                    denominator: denominator.unwrap_or(DEFAULT_DENOMINATOR),
                },
                other => return Err(Error::Input(format!("unknown instance {other:?}"))),
            };
            let (auction, y) = spec.generate()?;
            let mut text = instance_json(&auction, Some(&y));
            text.push('\n');
            match output {
                Some(path) => {
                    write_file(&path, &text)?;
                    Ok(CliOutput::ok(String::new()))
                }
                None => Ok(CliOutput::ok(text)),
            }
        }
    }
}

fn finish<T: Serialize>(report: &T, failed: bool) -> Result<CliOutput> {
    let stdout = pretty(report);
    if failed {
        return Ok(CliOutput { code: EXIT_VERIFY, stdout, stderr: "verification failed\n".into() });
    }
    Ok(CliOutput::ok(stdout))
}
