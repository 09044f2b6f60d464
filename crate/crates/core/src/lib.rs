//! Combinatorial Walrasian equilibria: bundle the items, price the bundles,
//! and give every buyer a set it demands.
//!
//! Two ascending procedures build such an outcome from any initial
//! allocation `Y` and keep at least half of `SW(Y)`; a uniform price shift
//! then trades welfare for revenue. Everything is exact rational arithmetic,
//! and [`verifier`] holds brute-force oracles for checking results on small
//! instances.

pub mod cli;
pub mod error;
pub mod instances;
pub mod io;
pub mod market;
pub mod poly;
pub mod revenue;
pub mod scalar;
pub mod simple;
pub mod trace;
pub mod valuation;
pub mod verifier;

pub use error::{Error, Result};
pub use market::{
    chosen_demand, demand_correspondence, is_cwe, merge_bundles, utility, AgentId, Auction, BundleId, BundleSet,
    Catalog, CweCheck, Demand, Outcome, PriceMap,
};
pub use poly::run_poly;
pub use revenue::{maximize_revenue, revenue_of, shift_prices};
pub use scalar::Scalar;
pub use simple::run_simple;
pub use trace::{Event, Trace};
pub use valuation::{ItemSet, Valuation};
