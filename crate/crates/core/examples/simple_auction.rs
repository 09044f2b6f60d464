//! The ascending procedure with a fixed price step, on the gap instance.

use cwe::instances::gap3;
use cwe::simple::granularity;
use cwe::{is_cwe, run_simple, Event};

fn main() -> cwe::Result<()> {
    let (auction, y) = gap3(&"1/10".parse().unwrap())?;
    let eps = granularity(&auction).half();
    let (outcome, trace) = run_simple(&auction, &y, &eps)?;

    for e in &trace.events {
        match e {
            Event::Merge { parts, into, price } => println!("merge {parts:?} into {into:?} at {price}"),
            Event::Assign { agent, bundles } => println!("agent {agent} takes {bundles:?}"),
            Event::Concede { agent, bundle } => println!("agent {agent} concedes {bundle:?}"),
            _ => {}
        }
    }
    let raises = trace.events.iter().filter(|e| matches!(e, Event::PriceRaise { .. })).count();
    println!("ε = {eps}: {} iterations, {raises} price steps", trace.iterations);
    println!("welfare {} (initial {}), CWE: {}", outcome.social_welfare(&auction), auction.welfare_of(&y), is_cwe(&auction, &outcome)?.is_ok());
    Ok(())
}
