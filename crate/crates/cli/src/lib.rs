//! File formats and subcommands of the `vcg` command-line tool.
//!
//! Bid files and outcome documents are JSON. Prices are strings holding an
//! integer, a decimal, or a fraction `"p/q"`, so nothing is ever rounded.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;
use vcg_core::soundness::{
    check_equivalence, check_totality_with, check_truthfulness_single_good, check_uniqueness_with,
    check_well_defined_with, fuzz_instances, FuzzSpec, Mechanism, SoundnessReport,
};
use vcg_core::{
    all_partitions, distinct_allocations, possible_allocations_alg, run_auction, validate_instance,
    Allocation, Amount, AuctionInstance, BidderId, Good, Outcome, RawBid, RawInstance, Solver,
    TieBreakSeed, ENGINE_VERSION,
};

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const SIZE_GUARD: i32 = 2;
    pub const SOUNDNESS: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Engine(#[from] vcg_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine(e) if e.is_size_guard() => exit::SIZE_GUARD,
            _ => exit::VALIDATION,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends " at line L column C"; keep the message bare
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        CliError::Parse {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

/// A price as written in a bid file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Price(pub String);

impl<'de> Deserialize<'de> for Price {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = Price;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a price string such as \"2\", \"2.5\" or \"5/2\"")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Price, E> {
                v.parse::<Amount>().map_err(E::custom)?;
                Ok(Price(v.to_string()))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Price, E> {
                Ok(Price(v.to_string()))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Price, E> {
                Ok(Price(v.to_string()))
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<Price, E> {
                Err(E::custom(format!(
                    "non-integer number {v}; write exact prices as strings like \"5/2\""
                )))
            }
        }
        deserializer.deserialize_any(Visitor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidRecord {
    pub bidder: u64,
    pub bundle: Vec<String>,
    pub price: Price,
}

/// On-disk form of an auction instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidFile {
    pub goods: Vec<String>,
    pub bidders: Vec<u64>,
    pub bids: Vec<BidRecord>,
}

impl BidFile {
    pub fn from_instance(instance: &AuctionInstance) -> Self {
        BidFile {
            goods: instance.goods().iter().map(|g| g.to_string()).collect(),
            bidders: instance.bidders().iter().map(|&n| u64::from(n)).collect(),
            bids: instance
                .bids()
                .map(|(n, bundle, price)| BidRecord {
                    bidder: u64::from(n),
                    bundle: bundle.iter().map(|g| g.to_string()).collect(),
                    price: Price(price.to_string()),
                })
                .collect(),
        }
    }

    pub fn to_instance(&self) -> Result<AuctionInstance, vcg_core::Error> {
        let goods = self
            .goods
            .iter()
            .map(Good::new)
            .collect::<Result<Vec<_>, _>>()?;
        let bidders = self
            .bidders
            .iter()
            .map(|&n| BidderId::new(n))
            .collect::<Result<Vec<_>, _>>()?;
        let bids = self
            .bids
            .iter()
            .map(|r| {
                Ok(RawBid {
                    bidder: BidderId::new(r.bidder)?,
                    bundle: r
                        .bundle
                        .iter()
                        .map(Good::new)
                        .collect::<Result<Vec<_>, _>>()?,
                    price: r.price.0.parse()?,
                })
            })
            .collect::<Result<Vec<_>, vcg_core::Error>>()?;
        validate_instance(RawInstance {
            goods,
            bidders,
            bids,
        })
    }

    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("bid files always serialize");
        text.push('\n');
        text
    }
}

pub fn parse_bid_file(text: &str) -> Result<AuctionInstance, CliError> {
    let file: BidFile = serde_json::from_str(text)?;
    Ok(file.to_instance()?)
}

/// The JSON document written by `vcg run`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeDocument {
    pub alphas: BTreeMap<BidderId, Amount>,
    pub chosen: Allocation,
    pub max_value: Amount,
    pub payments: BTreeMap<BidderId, Amount>,
    pub seed: u64,
    pub solver: Solver,
    pub tie_break_applied: bool,
    pub version: String,
}

impl OutcomeDocument {
    pub fn new(outcome: Outcome, seed: TieBreakSeed, solver: Solver) -> Self {
        OutcomeDocument {
            alphas: outcome.alphas,
            chosen: outcome.chosen,
            max_value: outcome.max_value,
            payments: outcome.payments,
            seed: seed.0,
            solver,
            tie_break_applied: outcome.tie_break_applied,
            version: ENGINE_VERSION.to_string(),
        }
    }

    /// Pretty JSON with every object's keys in sorted order.
    pub fn render(&self) -> String {
        // serde_json's Value map is ordered, which sorts bidder-id keys as text too
        let value = serde_json::to_value(self).expect("outcome documents always serialize");
        let mut text = serde_json::to_string_pretty(&value).expect("values always serialize");
        text.push('\n');
        text
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn report_error(err: &mut dyn Write, e: &CliError) -> i32 {
    let _ = writeln!(err, "error: {e}");
    e.exit_code()
}

/// `vcg run`: one auction from a bid file to an outcome document.
pub fn cmd_run(
    bids_path: &Path,
    seed: TieBreakSeed,
    solver: Solver,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let result = (|| -> Result<String, CliError> {
        let instance = parse_bid_file(&read(bids_path)?)?;
        let outcome = run_auction(&instance, seed, solver)?;
        Ok(OutcomeDocument::new(outcome, seed, solver).render())
    })();
    let text = match result {
        Ok(text) => text,
        Err(e) => return report_error(err, &e),
    };
    let written = match output {
        Some(path) => std::fs::write(path, &text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    };
    match written {
        Ok(()) => exit::SUCCESS,
        Err(e) => report_error(err, &e),
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub max_goods: usize,
    pub max_bidders: usize,
    pub instances: usize,
    pub seed: u64,
    pub json: bool,
    /// Runs the checks against a deliberately broken mechanism.
    pub inject_fault: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            max_goods: 3,
            max_bidders: 3,
            instances: 200,
            seed: 0,
            json: false,
            inject_fault: false,
        }
    }
}

/// Charges the first bidder a negative amount whenever some good is sold.
fn faulty_auction(
    instance: &AuctionInstance,
    seed: TieBreakSeed,
    solver: Solver,
) -> vcg_core::Result<Outcome> {
    let mut outcome = run_auction(instance, seed, solver)?;
    if !outcome.chosen.is_empty() {
        if let Some(p) = outcome.payments.values_mut().next() {
            *p = &*p - &Amount::from(1);
        }
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct FailureJson<'a> {
    diagnostic: &'a str,
    instance: BidFile,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    checked: usize,
    failures: Vec<FailureJson<'a>>,
    goal: String,
    notes: &'a [String],
}

fn report_json(report: &SoundnessReport) -> ReportJson<'_> {
    ReportJson {
        checked: report.instances_checked,
        failures: report
            .failures
            .iter()
            .map(|f| FailureJson {
                diagnostic: &f.diagnostic,
                instance: BidFile::from_instance(&f.instance),
            })
            .collect(),
        goal: report.goal.to_string(),
        notes: &report.notes,
    }
}

fn run_checks(opts: &CheckOptions) -> Result<Vec<SoundnessReport>, CliError> {
    let corpus = fuzz_instances(&FuzzSpec {
        max_goods: opts.max_goods,
        max_bidders: opts.max_bidders,
        bid_grid: FuzzSpec::integer_grid(4),
        instance_count: opts.instances,
        rng_seed: opts.seed,
    })?;
    let seed = TieBreakSeed(opts.seed);
    let mechanism: &Mechanism<'_> = if opts.inject_fault {
        &faulty_auction
    } else {
        &run_auction
    };
    let truth_seeds: Vec<TieBreakSeed> = (0..3)
        .map(|k| TieBreakSeed(opts.seed.wrapping_add(k)))
        .collect();
    Ok(vec![
        check_totality_with(&corpus, seed, mechanism),
        check_well_defined_with(&corpus, seed, mechanism),
        check_uniqueness_with(&corpus, seed, mechanism),
        check_equivalence(opts.max_goods, opts.max_bidders)?,
        check_truthfulness_single_good(
            opts.max_bidders.min(3),
            &FuzzSpec::integer_grid(4),
            &truth_seeds,
        )?,
    ])
}

/// `vcg check`: the soundness suite over a fuzzed corpus.
pub fn cmd_check(opts: &CheckOptions, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let reports = match run_checks(opts) {
        Ok(r) => r,
        Err(e) => return report_error(err, &e),
    };
    let all_passed = reports.iter().all(SoundnessReport::passed);
    if opts.json {
        let docs: Vec<ReportJson<'_>> = reports.iter().map(report_json).collect();
        let text = serde_json::to_string_pretty(&docs).expect("reports always serialize");
        let _ = writeln!(out, "{text}");
    } else {
        for report in &reports {
            let _ = writeln!(out, "{}", report.summary());
            for note in report
                .notes
                .iter()
                .filter(|_| report.goal.to_string() == "equivalence")
            {
                let _ = writeln!(out, "  {note}");
            }
        }
        if let Some((report, failure)) = reports
            .iter()
            .find_map(|r| r.failures.first().map(|f| (r, f)))
        {
            let _ = writeln!(
                out,
                "first counterexample ({}): {}",
                report.goal, failure.diagnostic
            );
            let _ = write!(
                out,
                "{}",
                BidFile::from_instance(&failure.instance).render()
            );
        }
    }
    if all_passed {
        exit::SUCCESS
    } else {
        exit::SOUNDNESS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enumerate {
    Partitions,
    Allocations,
}

impl std::str::FromStr for Enumerate {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "partitions" => Ok(Enumerate::Partitions),
            "allocations" => Ok(Enumerate::Allocations),
            other => Err(format!(
                "unknown object {other:?} (expected partitions or allocations)"
            )),
        }
    }
}

fn enumerate_lines(
    goods: &[String],
    bidders: &[u64],
    what: Enumerate,
) -> Result<Vec<String>, CliError> {
    let mut raw = RawInstance {
        goods: goods.iter().map(Good::new).collect::<Result<_, _>>()?,
        bidders: bidders
            .iter()
            .map(|&n| BidderId::new(n))
            .collect::<Result<_, _>>()?,
        bids: Vec::new(),
    };
    if what == Enumerate::Partitions && raw.bidders.is_empty() {
        // bidders play no role in partitions
        raw.bidders.push(BidderId::new(1)?);
    }
    let instance = validate_instance(raw)?;
    Ok(match what {
        Enumerate::Partitions => all_partitions(instance.goods())?
            .iter()
            .map(|p| p.to_string())
            .collect(),
        Enumerate::Allocations => distinct_allocations(possible_allocations_alg(
            instance.goods(),
            instance.bidders(),
        )?)
        .iter()
        .map(|a| a.to_string())
        .collect(),
    })
}

/// `vcg enumerate`: list partitions or allocations, then a count line.
pub fn cmd_enumerate(
    goods: &[String],
    bidders: &[u64],
    what: Enumerate,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    match enumerate_lines(goods, bidders, what) {
        Ok(lines) => {
            for line in &lines {
                let _ = writeln!(out, "{line}");
            }
            let _ = writeln!(out, "count: {}", lines.len());
            exit::SUCCESS
        }
        Err(e) => report_error(err, &e),
    }
}
