//! Goods, bidders, bundles, and the sealed-bid auction instance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::allocations::Allocation;
use crate::amount::Amount;
use crate::error::{Error, Result};

/// An indivisible good, identified by a short text token.
///
/// Goods are ordered by their identifier text; that order is the canonical
/// order used everywhere a set of goods has to become a sequence.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Good(String);

impl Good {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::EmptyGoodId);
        }
        Ok(Good(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Good {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Good {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A bidder, numbered from 1. The seller is agent 0 and never bids.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct BidderId(u32);

impl BidderId {
    pub fn new(id: u64) -> Result<Self> {
        match u32::try_from(id) {
            Ok(v) if v >= 1 => Ok(BidderId(v)),
            _ => Err(Error::InvalidBidderId(id)),
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u64> for BidderId {
    type Error = Error;
    fn try_from(id: u64) -> Result<Self> {
        BidderId::new(id)
    }
}

impl From<BidderId> for u64 {
    fn from(id: BidderId) -> u64 {
        u64::from(id.0)
    }
}

impl fmt::Display for BidderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for BidderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A finite set of goods. May be empty.
///
/// The derived ordering compares the sorted identifier sequences
/// lexicographically, which is the canonical bundle order.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bundle(BTreeSet<Good>);

impl Bundle {
    pub fn empty() -> Self {
        Bundle(BTreeSet::new())
    }

    pub fn goods(&self) -> &BTreeSet<Good> {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Good> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, good: &Good) -> bool {
        self.0.contains(good)
    }

    pub fn insert(&mut self, good: Good) -> bool {
        self.0.insert(good)
    }

    pub fn is_subset(&self, goods: &BTreeSet<Good>) -> bool {
        self.0.is_subset(goods)
    }

    pub fn is_disjoint(&self, other: &Bundle) -> bool {
        self.0.is_disjoint(&other.0)
    }

    /// Parses a list of identifiers, rejecting repeats.
    pub fn from_ids<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut bundle = Bundle::empty();
        for id in ids {
            let good = Good::new(id)?;
            if bundle.0.contains(&good) {
                return Err(Error::DuplicateGoodInBundle(good));
            }
            bundle.0.insert(good);
        }
        Ok(bundle)
    }
}

impl FromIterator<Good> for Bundle {
    fn from_iter<I: IntoIterator<Item = Good>>(iter: I) -> Self {
        Bundle(iter.into_iter().collect())
    }
}

impl From<BTreeSet<Good>> for Bundle {
    fn from(goods: BTreeSet<Good>) -> Self {
        Bundle(goods)
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One unvalidated bid record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawBid {
    pub bidder: BidderId,
    pub bundle: Vec<Good>,
    pub price: Amount,
}

/// An auction as submitted, before any invariant has been checked.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawInstance {
    pub goods: Vec<Good>,
    pub bidders: Vec<BidderId>,
    pub bids: Vec<RawBid>,
}

/// A validated auction: goods for sale, bidders, and a sparse bid table.
///
/// Bundles without an entry for a bidder count as a bid of zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AuctionInstance {
    goods: BTreeSet<Good>,
    bidders: BTreeSet<BidderId>,
    bids: BTreeMap<BidderId, BTreeMap<Bundle, Amount>>,
}

/// Checks every instance invariant and returns the validated instance.
pub fn validate_instance(raw: RawInstance) -> Result<AuctionInstance> {
    if raw.goods.is_empty() {
        return Err(Error::EmptyGoods);
    }
    let mut goods = BTreeSet::new();
    for good in raw.goods {
        if good.0.is_empty() {
            return Err(Error::EmptyGoodId);
        }
        if goods.contains(&good) {
            return Err(Error::DuplicateGood(good));
        }
        goods.insert(good);
    }

    if raw.bidders.is_empty() {
        return Err(Error::EmptyBidders);
    }
    let mut bidders = BTreeSet::new();
    for bidder in raw.bidders {
        if !bidders.insert(bidder) {
            return Err(Error::DuplicateBidder(bidder));
        }
    }

    let mut bids: BTreeMap<BidderId, BTreeMap<Bundle, Amount>> = BTreeMap::new();
    for RawBid {
        bidder,
        bundle: ids,
        price,
    } in raw.bids
    {
        if !bidders.contains(&bidder) {
            return Err(Error::UnknownBidder(bidder));
        }
        let mut bundle = Bundle::empty();
        for good in ids {
            if bundle.contains(&good) {
                return Err(Error::DuplicateGoodInBundle(good));
            }
            bundle.insert(good);
        }
        let outside = bundle.iter().find(|g| !goods.contains(*g)).cloned();
        if let Some(good) = outside {
            return Err(Error::BundleNotSubset { bundle, good });
        }
        if price.is_negative() {
            return Err(Error::NegativeBid { bidder, bundle });
        }
        if bundle.is_empty() && !price.is_zero() {
            return Err(Error::NonzeroEmptyBundleBid(bidder));
        }
        let table = bids.entry(bidder).or_default();
        if table.contains_key(&bundle) {
            return Err(Error::DuplicateBidEntry { bidder, bundle });
        }
        table.insert(bundle, price);
    }

    Ok(AuctionInstance {
        goods,
        bidders,
        bids,
    })
}

impl AuctionInstance {
    pub fn goods(&self) -> &BTreeSet<Good> {
        &self.goods
    }

    pub fn bidders(&self) -> &BTreeSet<BidderId> {
        &self.bidders
    }

    /// The explicit bid entries of one bidder, in canonical bundle order.
    pub fn bids_of(&self, bidder: BidderId) -> impl Iterator<Item = (&Bundle, &Amount)> {
        self.bids.get(&bidder).into_iter().flat_map(|t| t.iter())
    }

    /// All explicit bid entries, ordered by bidder then bundle.
    pub fn bids(&self) -> impl Iterator<Item = (BidderId, &Bundle, &Amount)> {
        self.bids
            .iter()
            .flat_map(|(&n, table)| table.iter().map(move |(b, a)| (n, b, a)))
    }

    pub fn bid_count(&self) -> usize {
        self.bids.values().map(BTreeMap::len).sum()
    }

    /// Bid lookup without precondition checks; unlisted bundles are zero.
    pub(crate) fn bid_or_zero(&self, bidder: BidderId, bundle: &Bundle) -> Amount {
        self.bids
            .get(&bidder)
            .and_then(|t| t.get(bundle))
            .cloned()
            .unwrap_or_else(Amount::zero)
    }

    /// The value bidder `n` bids on `bundle`.
    pub fn bid_value(&self, bidder: BidderId, bundle: &Bundle) -> Result<Amount> {
        if !self.bidders.contains(&bidder) {
            return Err(Error::UnknownBidder(bidder));
        }
        if let Some(good) = bundle.iter().find(|g| !self.goods.contains(*g)) {
            return Err(Error::BundleNotSubset {
                bundle: bundle.clone(),
                good: good.clone(),
            });
        }
        Ok(self.bid_or_zero(bidder, bundle))
    }

    /// Total bid value of an allocation: the sum of each assigned bidder's
    /// bid on the bundle they receive.
    pub fn allocation_value(&self, allocation: &Allocation) -> Result<Amount> {
        allocation.check_valid(&self.goods, &self.bidders)?;
        Ok(self.value_unchecked(allocation))
    }

    pub(crate) fn value_unchecked(&self, allocation: &Allocation) -> Amount {
        allocation
            .iter()
            .map(|(bundle, bidder)| self.bid_or_zero(bidder, bundle))
            .sum()
    }

    /// The same auction with every bid multiplied by `factor` (which must be positive).
    pub fn scaled(&self, factor: &Amount) -> Result<AuctionInstance> {
        if factor.is_negative() || factor.is_zero() {
            return Err(Error::InvalidAmount(factor.to_string()));
        }
        let bids = self
            .bids
            .iter()
            .map(|(&n, table)| {
                let table = table.iter().map(|(b, a)| (b.clone(), a * factor)).collect();
                (n, table)
            })
            .collect();
        Ok(AuctionInstance {
            goods: self.goods.clone(),
            bidders: self.bidders.clone(),
            bids,
        })
    }

    /// The same auction without `bidder` and its bids. The result may have no
    /// bidders at all, so it is only used internally by the solvers.
    pub(crate) fn without_bidder(&self, bidder: BidderId) -> AuctionInstance {
        let mut reduced = self.clone();
        reduced.bidders.remove(&bidder);
        reduced.bids.remove(&bidder);
        reduced
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            goods: self.goods.iter().cloned().collect(),
            bidders: self.bidders.iter().copied().collect(),
            bids: self
                .bids()
                .map(|(bidder, bundle, price)| RawBid {
                    bidder,
                    bundle: bundle.iter().cloned().collect(),
                    price: price.clone(),
                })
                .collect(),
        }
    }
}
