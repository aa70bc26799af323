//! Sponsored-search auction lab.
//!
//! * [`auction`]: rank-by-revenue GSP allocation, symmetric and plain Nash
//!   checks, the minimum symmetric equilibrium and a brute-force deviation
//!   oracle.
//! * [`capacity`]: auctioneer-provided capacity by forking one slot into a
//!   landing page, with revenue and efficiency conditions and fitness sweeps.
//! * [`mediator`]: for-profit mediators that rewrite the bids of a coalition
//!   while keeping outside bidders in equilibrium.
//! * [`cli`]: scenario files, result tables and the `adlab` subcommands.

pub mod auction;
pub mod capacity;
pub mod cli;
pub mod mediator;

/// Absolute slack, in score units, for every equilibrium inequality.
pub const DEFAULT_TOL: f64 = 1e-9;
