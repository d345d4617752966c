//! Combinatorial Vickrey-Clarke-Groves auctions with exact arithmetic.
//!
//! The engine is layered the same way the checks are: [`partitions`] of the
//! goods, [`allocations`] of partition blocks to bidders, winner
//! determination in [`wdp`], and pricing plus tie-breaking in [`vcg`]. Every
//! layer that has an efficient algorithm also has a brute-force counterpart,
//! and [`soundness`] checks that the two agree and that the auction is a
//! well-defined function of its bids.

pub mod allocations;
pub mod amount;
pub mod error;
pub mod instance;
pub mod partitions;
pub mod soundness;
pub mod vcg;
pub mod wdp;
pub mod weights;

pub use allocations::{
    distinct_allocations, injective_functions, is_valid_allocation, possible_allocations_alg,
    possible_allocations_oracle, Allocation,
};
pub use amount::Amount;
pub use error::{Error, Result};
pub use instance::{
    validate_instance, AuctionInstance, BidderId, Bundle, Good, RawBid, RawInstance,
};
pub use partitions::{all_partitions, canonical_order, is_partition_of, Partition};
pub use vcg::{alpha, payments, run_auction, tie_break, Outcome, TieBreakSeed};
pub use wdp::{max_value, winning_allocations_dp, winning_allocations_oracle, Solver, WdpResult};
pub use weights::bundle_weight;

/// Version string recorded in outcome documents.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
