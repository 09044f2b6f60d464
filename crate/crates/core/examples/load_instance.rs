//! Reads an instance file, solves it, and prints the outcome as JSON.
//!
//! `cargo run --example load_instance -- path/to/instance.json`

use std::path::PathBuf;

use cwe::io::{load_instance, OutcomeView};
use cwe::{is_cwe, run_poly};

fn main() -> cwe::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/gap3.json")));
    let (auction, initial) = load_instance(&path)?;
    let y = initial.unwrap_or_else(|| vec![cwe::ItemSet::EMPTY; auction.n()]);
    let (outcome, _) = run_poly(&auction, &y)?;
    println!("{}", serde_json::to_string_pretty(&OutcomeView::new(&auction, &outcome)).unwrap());
    println!("stable: {}", is_cwe(&auction, &outcome)?.is_ok());
    Ok(())
}
