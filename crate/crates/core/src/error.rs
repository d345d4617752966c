use thiserror::Error;

use crate::instance::{BidderId, Bundle, Good};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("the set of goods is empty")]
    EmptyGoods,
    #[error("the set of bidders is empty")]
    EmptyBidders,
    #[error("empty good identifier")]
    EmptyGoodId,
    #[error("good {0} is listed more than once")]
    DuplicateGood(Good),
    #[error("bidder ids start at 1; got {0}")]
    InvalidBidderId(u64),
    #[error("bidder {0} is listed more than once")]
    DuplicateBidder(BidderId),
    #[error("bidder {0} is not part of this auction")]
    UnknownBidder(BidderId),
    #[error("bundle {bundle} contains good {good} which is not for sale")]
    BundleNotSubset { bundle: Bundle, good: Good },
    #[error("bundle names good {0} more than once")]
    DuplicateGoodInBundle(Good),
    #[error("bidder {bidder} bids a negative amount on {bundle}")]
    NegativeBid { bidder: BidderId, bundle: Bundle },
    #[error("bidder {0} bids a non-zero amount on the empty bundle")]
    NonzeroEmptyBundleBid(BidderId),
    #[error("bidder {bidder} has more than one bid on {bundle}")]
    DuplicateBidEntry { bidder: BidderId, bundle: Bundle },
    #[error("not a valid amount: {0:?}")]
    InvalidAmount(String),
    #[error("instance too large: {size} goods exceeds the limit of {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("allocation is not value-maximising")]
    NotAWinner,
    #[error("tie-break needs at least one candidate")]
    EmptyCandidates,
}

impl Error {
    /// True for the enumeration and solver size guards.
    pub fn is_size_guard(&self) -> bool {
        matches!(self, Error::TooLarge { .. })
    }
}
