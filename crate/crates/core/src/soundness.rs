//! Executable checks that the auction is a well-defined function of its bids.
//!
//! Each checker runs a mechanism over a corpus and collects counterexamples
//! rather than stopping at the first one. The `_with` variants take the
//! mechanism (or the pair of routes being compared) as a parameter so the
//! checkers themselves can be tested against deliberately broken inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::allocations::{possible_allocations_alg, possible_allocations_oracle, Allocation};
use crate::amount::Amount;
use crate::error::{Error, Result};
use crate::instance::{
    validate_instance, AuctionInstance, BidderId, Bundle, Good, RawBid, RawInstance,
};
use crate::partitions::{all_partitions, MAX_ENUMERATION_GOODS};
use crate::vcg::{run_auction, Outcome, TieBreakSeed};
use crate::wdp::{winning_allocations_dp, winning_allocations_oracle, Solver, WdpResult};
use crate::weights::SplitMix64;

/// Largest shape the exhaustive equivalence check accepts.
pub const MAX_EQUIVALENCE_SIZE: usize = 4;

/// Bid tables drawn per shape by [`check_equivalence`].
pub const DEFAULT_TABLES_PER_SHAPE: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    Totality,
    WellDefinedness,
    Uniqueness,
    Equivalence,
    Truthfulness,
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Goal::Totality => "totality",
            Goal::WellDefinedness => "well_definedness",
            Goal::Uniqueness => "uniqueness",
            Goal::Equivalence => "equivalence",
            Goal::Truthfulness => "truthfulness",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub instance: AuctionInstance,
    pub diagnostic: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoundnessReport {
    pub goal: Goal,
    pub instances_checked: usize,
    pub failures: Vec<Failure>,
    /// Informational lines that never affect pass/fail.
    pub notes: Vec<String>,
}

impl SoundnessReport {
    fn new(goal: Goal) -> Self {
        SoundnessReport {
            goal,
            instances_checked: 0,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, instance: &AuctionInstance, diagnostic: impl Into<String>) {
        self.failures.push(Failure {
            instance: instance.clone(),
            diagnostic: diagnostic.into(),
        });
    }

    pub fn summary(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        format!(
            "{}: {verdict} ({} checked, {} failures)",
            self.goal,
            self.instances_checked,
            self.failures.len()
        )
    }
}

/// Anything that maps an instance to an outcome the way [`run_auction`] does.
pub type Mechanism<'a> = dyn Fn(&AuctionInstance, TieBreakSeed, Solver) -> Result<Outcome> + 'a;

/// Bounds for randomly generated instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzSpec {
    pub max_goods: usize,
    pub max_bidders: usize,
    pub bid_grid: Vec<Amount>,
    pub instance_count: usize,
    pub rng_seed: u64,
}

impl FuzzSpec {
    /// Integer grid `{0, .., top}`.
    pub fn integer_grid(top: i64) -> Vec<Amount> {
        (0..=top).map(Amount::from).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_goods == 0 {
            return Err(Error::EmptyGoods);
        }
        if self.max_goods > MAX_ENUMERATION_GOODS {
            return Err(Error::TooLarge {
                size: self.max_goods,
                limit: MAX_ENUMERATION_GOODS,
            });
        }
        if self.max_bidders == 0 {
            return Err(Error::EmptyBidders);
        }
        if self.bid_grid.is_empty() {
            return Err(Error::InvalidAmount("empty bid grid".into()));
        }
        if let Some(a) = self.bid_grid.iter().find(|a| a.is_negative()) {
            return Err(Error::InvalidAmount(a.to_string()));
        }
        Ok(())
    }
}

/// Identifier of the `i`-th generated good: `A` to `Z`, then `G26`, `G27`...
pub fn good_name(i: usize) -> Good {
    let id = if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("G{i}")
    };
    Good::new(id).expect("non-empty")
}

fn random_instance(
    goods: usize,
    bidders: usize,
    grid: &[Amount],
    rng: &mut SplitMix64,
) -> AuctionInstance {
    let names: Vec<Good> = (0..goods).map(good_name).collect();
    let full = (1u32 << goods) - 1;
    let mut bids = Vec::new();
    for n in 1..=bidders as u64 {
        let bidder = BidderId::new(n).expect("positive");
        let masks: BTreeSet<u32> = if goods <= 4 {
            (1..=full).filter(|_| rng.coin()).collect()
        } else {
            let k = 1 + rng.below(8);
            (0..k)
                .map(|_| 1 + rng.below(u64::from(full)) as u32)
                .collect()
        };
        for mask in masks {
            let bundle = (0..goods)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| names[i].clone())
                .collect();
            let price = grid[rng.below(grid.len() as u64) as usize].clone();
            bids.push(RawBid {
                bidder,
                bundle,
                price,
            });
        }
    }
    let raw = RawInstance {
        goods: names,
        bidders: (1..=bidders as u64)
            .map(|n| BidderId::new(n).expect("positive"))
            .collect(),
        bids,
    };
    validate_instance(raw).expect("generated instances satisfy every invariant")
}

/// A deterministic corpus of instances within `spec`'s bounds.
pub fn fuzz_instances(spec: &FuzzSpec) -> Result<Vec<AuctionInstance>> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.rng_seed);
    Ok((0..spec.instance_count)
        .map(|_| {
            let goods = 1 + rng.below(spec.max_goods as u64) as usize;
            let bidders = 1 + rng.below(spec.max_bidders as u64) as usize;
            random_instance(goods, bidders, &spec.bid_grid, &mut rng)
        })
        .collect())
}

/// `count` random bid tables over exactly `goods` goods and `bidders` bidders.
pub fn fuzz_bid_tables(
    goods: usize,
    bidders: usize,
    grid: &[Amount],
    count: usize,
    seed: u64,
) -> Vec<AuctionInstance> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| random_instance(goods, bidders, grid, &mut rng))
        .collect()
}

pub fn check_totality(instances: &[AuctionInstance], seed: TieBreakSeed) -> SoundnessReport {
    check_totality_with(instances, seed, &run_auction)
}

/// Every admissible instance gets an outcome. Size-guard refusals are noted
/// but are not failures.
pub fn check_totality_with(
    instances: &[AuctionInstance],
    seed: TieBreakSeed,
    mechanism: &Mechanism<'_>,
) -> SoundnessReport {
    let mut report = SoundnessReport::new(Goal::Totality);
    for instance in instances {
        match mechanism(instance, seed, Solver::Dp) {
            Ok(_) => report.instances_checked += 1,
            Err(e) if e.is_size_guard() => report.notes.push(format!("skipped: {e}")),
            Err(e) => {
                report.instances_checked += 1;
                report.fail(instance, format!("no outcome: {e}"));
            }
        }
    }
    report
}

/// Goal-2 conditions on a single outcome: no good allocated twice, nothing
/// outside the goods for sale, one bundle per bidder, a non-negative payment
/// for every bidder.
pub fn check_outcome_well_defined(
    instance: &AuctionInstance,
    outcome: &Outcome,
) -> std::result::Result<(), String> {
    let mut owner: BTreeMap<&Good, BidderId> = BTreeMap::new();
    let mut holders = BTreeSet::new();
    for (bundle, bidder) in outcome.chosen.iter() {
        if !instance.bidders().contains(&bidder) {
            return Err(format!("bundle {bundle} goes to unknown bidder {bidder}"));
        }
        if !holders.insert(bidder) {
            return Err(format!("bidder {bidder} receives more than one bundle"));
        }
        for good in bundle.iter() {
            if !instance.goods().contains(good) {
                return Err(format!("good {good} is allocated but not for sale"));
            }
            if let Some(other) = owner.insert(good, bidder) {
                return Err(format!(
                    "good {good} is allocated twice, to bidders {other} and {bidder}"
                ));
            }
        }
    }
    for &bidder in instance.bidders() {
        match outcome.payments.get(&bidder) {
            None => return Err(format!("bidder {bidder} has no payment")),
            Some(p) if p.is_negative() => {
                return Err(format!("bidder {bidder} has negative payment {p}"));
            }
            Some(_) => {}
        }
    }
    Ok(())
}

pub fn check_well_defined(instances: &[AuctionInstance], seed: TieBreakSeed) -> SoundnessReport {
    check_well_defined_with(instances, seed, &run_auction)
}

pub fn check_well_defined_with(
    instances: &[AuctionInstance],
    seed: TieBreakSeed,
    mechanism: &Mechanism<'_>,
) -> SoundnessReport {
    let mut report = SoundnessReport::new(Goal::WellDefinedness);
    for instance in instances {
        match mechanism(instance, seed, Solver::Dp) {
            Ok(outcome) => {
                report.instances_checked += 1;
                if let Err(diagnostic) = check_outcome_well_defined(instance, &outcome) {
                    report.fail(instance, diagnostic);
                }
            }
            Err(e) if e.is_size_guard() => report.notes.push(format!("skipped: {e}")),
            Err(e) => {
                report.instances_checked += 1;
                report.fail(instance, format!("no outcome: {e}"));
            }
        }
    }
    report
}

pub fn check_uniqueness(instances: &[AuctionInstance], seed: TieBreakSeed) -> SoundnessReport {
    check_uniqueness_with(instances, seed, &run_auction)
}

/// Two oracle runs and one dp run must serialize identically. Instances too
/// large for the oracle are compared across two dp runs instead.
pub fn check_uniqueness_with(
    instances: &[AuctionInstance],
    seed: TieBreakSeed,
    mechanism: &Mechanism<'_>,
) -> SoundnessReport {
    let mut report = SoundnessReport::new(Goal::Uniqueness);
    for instance in instances {
        let oracle_fits = instance.goods().len() <= MAX_ENUMERATION_GOODS;
        let plan: &[Solver] = if oracle_fits {
            &[Solver::Oracle, Solver::Oracle, Solver::Dp]
        } else {
            &[Solver::Dp, Solver::Dp]
        };
        let mut runs = Vec::with_capacity(plan.len());
        let mut error = None;
        for &solver in plan {
            match mechanism(instance, seed, solver) {
                Ok(o) => runs.push((solver, o.canonical_json())),
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
        match error {
            Some(e) if e.is_size_guard() => {
                report.notes.push(format!("skipped: {e}"));
                continue;
            }
            Some(e) => {
                report.instances_checked += 1;
                report.fail(instance, format!("no outcome: {e}"));
                continue;
            }
            None => report.instances_checked += 1,
        }
        let (first_solver, first) = &runs[0];
        if let Some((solver, other)) = runs.iter().skip(1).find(|(_, json)| json != first) {
            report.fail(
                instance,
                format!(
                    "outcomes differ: {} gave {first} but {} gave {other}",
                    first_solver.name(),
                    solver.name()
                ),
            );
        }
    }
    report
}

pub type AllocationList<'a> =
    dyn Fn(&BTreeSet<Good>, &BTreeSet<BidderId>) -> Result<Vec<Allocation>> + 'a;
pub type AllocationSet<'a> =
    dyn Fn(&BTreeSet<Good>, &BTreeSet<BidderId>) -> Result<BTreeSet<Allocation>> + 'a;
pub type WdpRoute<'a> = dyn Fn(&AuctionInstance) -> Result<WdpResult> + 'a;

/// The two routes compared by the equivalence check.
pub struct EquivalenceSubjects<'a> {
    pub allocations_alg: &'a AllocationList<'a>,
    pub allocations_oracle: &'a AllocationSet<'a>,
    pub wdp_alg: &'a WdpRoute<'a>,
    pub wdp_oracle: &'a WdpRoute<'a>,
}

impl Default for EquivalenceSubjects<'static> {
    fn default() -> Self {
        EquivalenceSubjects {
            allocations_alg: &possible_allocations_alg,
            allocations_oracle: &possible_allocations_oracle,
            wdp_alg: &winning_allocations_dp,
            wdp_oracle: &winning_allocations_oracle,
        }
    }
}

pub fn check_equivalence(max_goods: usize, max_bidders: usize) -> Result<SoundnessReport> {
    check_equivalence_with(
        max_goods,
        max_bidders,
        DEFAULT_TABLES_PER_SHAPE,
        0,
        &EquivalenceSubjects::default(),
    )
}

fn list_difference(label: &str, items: &[&Allocation]) -> String {
    let shown: Vec<String> = items.iter().take(5).map(|a| a.to_string()).collect();
    let more = items.len().saturating_sub(shown.len());
    let tail = if more > 0 {
        format!(" and {more} more")
    } else {
        String::new()
    };
    format!("{label} [{}]{tail}", shown.join("; "))
}

/// For every shape up to `(max_goods, max_bidders)`: the listed allocations
/// equal the implicitly defined set, and on `tables_per_shape` random bid
/// tables the two winner determination routes agree.
pub fn check_equivalence_with(
    max_goods: usize,
    max_bidders: usize,
    tables_per_shape: usize,
    seed: u64,
    subjects: &EquivalenceSubjects<'_>,
) -> Result<SoundnessReport> {
    let limit = MAX_EQUIVALENCE_SIZE;
    for size in [max_goods, max_bidders] {
        if size > limit {
            return Err(Error::TooLarge { size, limit });
        }
    }
    let grid = FuzzSpec::integer_grid(5);
    let mut report = SoundnessReport::new(Goal::Equivalence);
    let mut rng = SplitMix64::new(seed);
    for g in 1..=max_goods {
        for m in 1..=max_bidders {
            let shape = random_instance(g, m, &[Amount::zero()], &mut SplitMix64::new(0));
            let goods = shape.goods();
            let bidders = shape.bidders();
            let alg: BTreeSet<Allocation> = (subjects.allocations_alg)(goods, bidders)?
                .into_iter()
                .collect();
            let oracle = (subjects.allocations_oracle)(goods, bidders)?;
            report.instances_checked += 1;
            if alg != oracle {
                let missing: Vec<&Allocation> = oracle.difference(&alg).collect();
                let extra: Vec<&Allocation> = alg.difference(&oracle).collect();
                report.fail(
                    &shape,
                    format!(
                        "allocation sets differ for {g} goods, {m} bidders: {}, {}",
                        list_difference("missing from algorithm", &missing),
                        list_difference("not in oracle", &extra)
                    ),
                );
            }
            report.notes.push(format!(
                "goods={g} bidders={m} partitions={} allocations={}",
                all_partitions(goods)?.len(),
                oracle.len()
            ));

            for instance in fuzz_bid_tables(g, m, &grid, tables_per_shape, rng.next_u64()) {
                report.instances_checked += 1;
                let fast = (subjects.wdp_alg)(&instance)?;
                let slow = (subjects.wdp_oracle)(&instance)?;
                if fast.max_value != slow.max_value {
                    report.fail(
                        &instance,
                        format!(
                            "max value {} from dp but {} from oracle",
                            fast.max_value, slow.max_value
                        ),
                    );
                } else if fast.winners != slow.winners {
                    let missing: Vec<&Allocation> =
                        slow.winners.difference(&fast.winners).collect();
                    let extra: Vec<&Allocation> = fast.winners.difference(&slow.winners).collect();
                    report.fail(
                        &instance,
                        format!(
                            "winner sets differ: {}, {}",
                            list_difference("missing from dp", &missing),
                            list_difference("not in oracle", &extra)
                        ),
                    );
                }
            }
        }
    }
    Ok(report)
}

/// Single-good auction where bidder `i + 1` bids `bids[i]` on the good `A`.
pub fn single_good_instance(bids: &[Amount]) -> AuctionInstance {
    let good = good_name(0);
    validate_instance(RawInstance {
        goods: vec![good.clone()],
        bidders: (1..=bids.len() as u64)
            .map(|n| BidderId::new(n).expect("positive"))
            .collect(),
        bids: bids
            .iter()
            .enumerate()
            .map(|(i, price)| RawBid {
                bidder: BidderId::new(i as u64 + 1).expect("positive"),
                bundle: vec![good.clone()],
                price: price.clone(),
            })
            .collect(),
    })
    .expect("single-good instances are valid for non-negative bids")
}

/// Every tuple in `grid^n`, in lexicographic order of grid positions.
pub fn grid_profiles(grid: &[Amount], n: usize) -> Vec<Vec<Amount>> {
    let mut profiles = vec![Vec::new()];
    for _ in 0..n {
        profiles = profiles
            .into_iter()
            .flat_map(|p| {
                grid.iter().map(move |a| {
                    let mut q = p.clone();
                    q.push(a.clone());
                    q
                })
            })
            .collect();
    }
    profiles
}

fn utility(valuation: &Amount, bidder: BidderId, outcome: &Outcome) -> Amount {
    let won = outcome
        .chosen
        .bundle_of(bidder)
        .is_some_and(|b| !b.is_empty());
    let gain = if won {
        valuation.clone()
    } else {
        Amount::zero()
    };
    let paid = outcome
        .payments
        .get(&bidder)
        .cloned()
        .unwrap_or_else(Amount::zero);
    gain - paid
}

pub fn check_truthfulness_single_good(
    n_bidders: usize,
    grid: &[Amount],
    seeds: &[TieBreakSeed],
) -> Result<SoundnessReport> {
    check_truthfulness_single_good_with(n_bidders, grid, seeds, &run_auction)
}

/// Exhaustive weak-dominance check of truthful bidding with one good: for
/// every valuation profile on the grid, every bidder and every alternative
/// bid on the grid, the truthful bid earns at least as much as the deviation
/// while the others bid truthfully.
pub fn check_truthfulness_single_good_with(
    n_bidders: usize,
    grid: &[Amount],
    seeds: &[TieBreakSeed],
    mechanism: &Mechanism<'_>,
) -> Result<SoundnessReport> {
    if n_bidders == 0 {
        return Err(Error::EmptyBidders);
    }
    if n_bidders > 3 {
        return Err(Error::TooLarge {
            size: n_bidders,
            limit: 3,
        });
    }
    if let Some(a) = grid.iter().find(|a| a.is_negative()) {
        return Err(Error::InvalidAmount(a.to_string()));
    }
    let mut report = SoundnessReport::new(Goal::Truthfulness);
    for &seed in seeds {
        for values in grid_profiles(grid, n_bidders) {
            let truthful_instance = single_good_instance(&values);
            let truthful = mechanism(&truthful_instance, seed, Solver::Dp)?;
            for (i, value) in values.iter().enumerate() {
                let bidder = BidderId::new(i as u64 + 1).expect("positive");
                let honest = utility(value, bidder, &truthful);
                for deviation in grid {
                    report.instances_checked += 1;
                    let mut bids = values.clone();
                    bids[i] = deviation.clone();
                    let deviated = mechanism(&single_good_instance(&bids), seed, Solver::Dp)?;
                    let gamed = utility(value, bidder, &deviated);
                    if gamed > honest {
                        report.fail(
                            &truthful_instance,
                            format!(
                                "bidder {bidder} with value {value} gains {gamed} by bidding {deviation} \
                                 instead of {honest} truthfully (seed {})",
                                seed.0
                            ),
                        );
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Adds an assignment to an outcome's allocation; used to build corrupted outcomes.
#[doc(hidden)]
pub fn with_extra_assignment(outcome: &Outcome, bundle: Bundle, bidder: BidderId) -> Outcome {
    let mut corrupted = outcome.clone();
    corrupted.chosen.insert(bundle, bidder);
    corrupted
}
