//! Winner determination: the value-maximising allocations of an instance.
//!
//! Two solvers return the same [`WdpResult`]. The oracle scores every
//! allocation produced by [`possible_allocations_oracle`]; the dynamic
//! program works over bitmasks of goods, one bidder layer at a time.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::allocations::{possible_allocations_oracle, Allocation};
use crate::amount::Amount;
use crate::error::Result;
use crate::instance::{AuctionInstance, BidderId, Bundle, Good};
use crate::partitions::{canonical_order, guard, MAX_ENUMERATION_GOODS};

/// Bitmask width limit of the dynamic program.
pub const MAX_DP_GOODS: usize = 20;

/// The maximum attainable bid value and every allocation attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WdpResult {
    pub max_value: Amount,
    pub winners: BTreeSet<Allocation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Oracle,
    #[default]
    Dp,
}

impl Solver {
    pub fn solve(self, instance: &AuctionInstance) -> Result<WdpResult> {
        match self {
            Solver::Oracle => winning_allocations_oracle(instance),
            Solver::Dp => winning_allocations_dp(instance),
        }
    }

    pub fn max_value(self, instance: &AuctionInstance) -> Result<Amount> {
        match self {
            Solver::Oracle => Ok(winning_allocations_oracle(instance)?.max_value),
            Solver::Dp => dp_max_value(instance),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Solver::Oracle => "oracle",
            Solver::Dp => "dp",
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "oracle" => Ok(Solver::Oracle),
            "dp" => Ok(Solver::Dp),
            other => Err(format!("unknown solver {other:?} (expected oracle or dp)")),
        }
    }
}

/// Exhaustive argmax over every possible allocation.
pub fn winning_allocations_oracle(instance: &AuctionInstance) -> Result<WdpResult> {
    guard(instance.goods().len(), MAX_ENUMERATION_GOODS)?;
    let mut max_value = Amount::zero();
    let mut winners = BTreeSet::new();
    for allocation in possible_allocations_oracle(instance.goods(), instance.bidders())? {
        let value = instance.value_unchecked(&allocation);
        if value > max_value {
            max_value = value;
            winners.clear();
            winners.insert(allocation);
        } else if value == max_value {
            winners.insert(allocation);
        }
    }
    Ok(WdpResult { max_value, winners })
}

/// Maximum attainable value, whichever solver fits the instance.
pub fn max_value(instance: &AuctionInstance) -> Result<Amount> {
    Solver::Dp.max_value(instance)
}

struct BitIndex {
    goods: Vec<Good>,
    full: u32,
}

impl BitIndex {
    fn new(goods: &BTreeSet<Good>) -> Self {
        let goods = canonical_order(goods);
        let full = if goods.is_empty() {
            0
        } else {
            u32::MAX >> (32 - goods.len())
        };
        BitIndex { goods, full }
    }

    fn mask(&self, bundle: &Bundle) -> u32 {
        bundle.iter().fold(0, |m, g| {
            // bundles of a validated instance only contain known goods
            let i = self
                .goods
                .binary_search(g)
                .expect("good outside the instance");
            m | (1 << i)
        })
    }

    fn bundle(&self, mask: u32) -> Bundle {
        self.goods
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, g)| g.clone())
            .collect()
    }
}

/// One bidder's explicit non-empty bids as bitmasks.
fn layer_bids(
    instance: &AuctionInstance,
    index: &BitIndex,
    bidder: BidderId,
) -> Vec<(u32, Amount)> {
    instance
        .bids_of(bidder)
        .filter(|(b, _)| !b.is_empty())
        .map(|(b, a)| (index.mask(b), a.clone()))
        .collect()
}

/// Next DP layer: best value on each subset of goods given one more bidder.
fn relax(prev: &[Amount], bids: &[(u32, Amount)]) -> Vec<Amount> {
    let mut next = prev.to_vec();
    for (set, best) in next.iter_mut().enumerate() {
        let set = set as u32;
        for (mask, value) in bids {
            if mask & !set == 0 {
                let candidate = value + &prev[(set & !mask) as usize];
                if candidate > *best {
                    *best = candidate;
                }
            }
        }
    }
    next
}

fn dp_max_value(instance: &AuctionInstance) -> Result<Amount> {
    guard(instance.goods().len(), MAX_DP_GOODS)?;
    let index = BitIndex::new(instance.goods());
    let mut layer = vec![Amount::zero(); 1 << index.goods.len()];
    for &bidder in instance.bidders() {
        layer = relax(&layer, &layer_bids(instance, &index, bidder));
    }
    Ok(layer[index.full as usize].clone())
}

/// Subset dynamic program over bidders in canonical order.
///
/// Values come from the recurrence over each bidder's explicit bids plus the
/// empty bundle. Reconstruction walks back from the full goods set and, at
/// every cell, follows each sub-bundle (listed or not) whose bid plus the
/// previous layer's value reproduces the cell, so zero-value assignments
/// that tie are recovered too and the winner set is complete.
pub fn winning_allocations_dp(instance: &AuctionInstance) -> Result<WdpResult> {
    guard(instance.goods().len(), MAX_DP_GOODS)?;
    let index = BitIndex::new(instance.goods());
    let bidders: Vec<BidderId> = instance.bidders().iter().copied().collect();

    let mut layers = vec![vec![Amount::zero(); 1 << index.goods.len()]];
    let mut lookups: Vec<HashMap<u32, Amount>> = Vec::with_capacity(bidders.len());
    for &bidder in &bidders {
        let bids = layer_bids(instance, &index, bidder);
        let next = relax(layers.last().expect("base layer"), &bids);
        layers.push(next);
        lookups.push(bids.into_iter().collect());
    }

    let max_value = layers[bidders.len()][index.full as usize].clone();
    let mut winners = BTreeSet::new();
    let mut path = Vec::with_capacity(bidders.len());
    backtrack(
        &layers,
        &lookups,
        &bidders,
        bidders.len(),
        index.full,
        &mut path,
        &mut |path: &[(u32, BidderId)]| {
            let allocation = Allocation::from_pairs(
                path.iter()
                    .filter(|(mask, _)| *mask != 0)
                    .map(|&(mask, n)| (index.bundle(mask), n)),
            );
            winners.insert(allocation);
        },
    );
    Ok(WdpResult { max_value, winners })
}

type Emit<'a> = dyn FnMut(&[(u32, BidderId)]) + 'a;

fn backtrack(
    layers: &[Vec<Amount>],
    lookups: &[HashMap<u32, Amount>],
    bidders: &[BidderId],
    depth: usize,
    set: u32,
    path: &mut Vec<(u32, BidderId)>,
    emit: &mut Emit<'_>,
) {
    if depth == 0 {
        emit(path);
        return;
    }
    let layer = depth - 1;
    let target = &layers[depth][set as usize];
    let zero = Amount::zero();
    // every submask of `set`, including `set` itself and the empty mask
    let mut sub = set;
    loop {
        let bid = lookups[layer].get(&sub).unwrap_or(&zero);
        let rest = set & !sub;
        if &(bid + &layers[layer][rest as usize]) == target {
            path.push((sub, bidders[layer]));
            backtrack(layers, lookups, bidders, layer, rest, path, emit);
            path.pop();
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & set;
    }
}
