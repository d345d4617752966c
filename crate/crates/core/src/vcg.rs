//! VCG payments, seeded tie-breaking, and the auction as a whole.
//!
//! Bidder `n` pays `alpha_n - sum_{m != n} b_m(X*_m)`, where `alpha_n` is the
//! best value attainable without `n`. When several allocations maximise value,
//! each candidate is scored by the sum of per-(bidder, bundle) weights drawn
//! from [`bundle_weight`]; residual ties go to the canonically least candidate.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::allocations::Allocation;
use crate::amount::Amount;
use crate::error::{Error, Result};
use crate::instance::{AuctionInstance, BidderId, Bundle};
use crate::wdp::Solver;
use crate::weights::bundle_weight;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TieBreakSeed(pub u64);

/// The result of one auction run.
///
/// Field order is alphabetical so that the derived JSON is canonical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub alphas: BTreeMap<BidderId, Amount>,
    pub chosen: Allocation,
    pub max_value: Amount,
    pub payments: BTreeMap<BidderId, Amount>,
    pub tie_break_applied: bool,
}

impl Outcome {
    /// Canonical serialization used to decide outcome equality byte-wise.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("outcome serialization cannot fail")
    }

    /// Seller revenue, the sum of all payments.
    pub fn revenue(&self) -> Amount {
        self.payments.values().sum()
    }
}

fn require_bidder(instance: &AuctionInstance, bidder: BidderId) -> Result<()> {
    if instance.bidders().contains(&bidder) {
        Ok(())
    } else {
        Err(Error::UnknownBidder(bidder))
    }
}

/// Best attainable value once `bidder` and its bids are removed.
pub fn alpha(instance: &AuctionInstance, bidder: BidderId) -> Result<Amount> {
    alpha_with(instance, bidder, Solver::Dp)
}

pub fn alpha_with(instance: &AuctionInstance, bidder: BidderId, solver: Solver) -> Result<Amount> {
    require_bidder(instance, bidder)?;
    solver.max_value(&instance.without_bidder(bidder))
}

/// VCG payments for a value-maximising allocation.
pub fn payments(
    instance: &AuctionInstance,
    chosen: &Allocation,
) -> Result<BTreeMap<BidderId, Amount>> {
    let value = instance.allocation_value(chosen)?;
    if value != Solver::Dp.max_value(instance)? {
        return Err(Error::NotAWinner);
    }
    let alphas = all_alphas(instance, Solver::Dp)?;
    Ok(payments_from(instance, chosen, &alphas))
}

fn all_alphas(instance: &AuctionInstance, solver: Solver) -> Result<BTreeMap<BidderId, Amount>> {
    instance
        .bidders()
        .iter()
        .map(|&n| Ok((n, alpha_with(instance, n, solver)?)))
        .collect()
}

fn payments_from(
    instance: &AuctionInstance,
    chosen: &Allocation,
    alphas: &BTreeMap<BidderId, Amount>,
) -> BTreeMap<BidderId, Amount> {
    alphas
        .iter()
        .map(|(&n, alpha)| {
            let others: Amount = chosen
                .iter()
                .filter(|&(_, m)| m != n)
                .map(|(bundle, m)| instance.bid_or_zero(m, bundle))
                .sum();
            (n, alpha - &others)
        })
        .collect()
}

/// Sum of weights over every bidder of the instance, the empty bundle
/// included for bidders the allocation leaves out.
pub fn tie_break_score(
    allocation: &Allocation,
    instance: &AuctionInstance,
    seed: TieBreakSeed,
) -> u128 {
    let empty = Bundle::empty();
    instance
        .bidders()
        .iter()
        .map(|&n| {
            let bundle = allocation.bundle_of(n).unwrap_or(&empty);
            u128::from(bundle_weight(seed.0, n, bundle))
        })
        .sum()
}

/// Picks one allocation out of `candidates`: highest weight score, then the
/// canonically least.
pub fn tie_break(
    candidates: &BTreeSet<Allocation>,
    instance: &AuctionInstance,
    seed: TieBreakSeed,
) -> Result<Allocation> {
    select_max(candidates, |a| tie_break_score(a, instance, seed))
        .cloned()
        .ok_or(Error::EmptyCandidates)
}

/// First maximum in ascending canonical order, which makes the least
/// candidate win residual ties.
fn select_max(
    candidates: &BTreeSet<Allocation>,
    score: impl Fn(&Allocation) -> u128,
) -> Option<&Allocation> {
    let mut best: Option<(u128, &Allocation)> = None;
    for candidate in candidates {
        let s = score(candidate);
        if best.is_none_or(|(top, _)| s > top) {
            best = Some((s, candidate));
        }
    }
    best.map(|(_, a)| a)
}

/// Runs the auction: solve the WDP, break ties, price every bidder.
pub fn run_auction(
    instance: &AuctionInstance,
    seed: TieBreakSeed,
    solver: Solver,
) -> Result<Outcome> {
    let wdp = solver.solve(instance)?;
    let chosen = tie_break(&wdp.winners, instance, seed)?;
    let alphas = all_alphas(instance, solver)?;
    let payments = payments_from(instance, &chosen, &alphas);
    Ok(Outcome {
        alphas,
        chosen,
        max_value: wdp.max_value,
        payments,
        tie_break_applied: wdp.winners.len() > 1,
    })
}
