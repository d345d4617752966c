//! Allocations of bundles to bidders, and the two ways of listing all of them.
//!
//! [`possible_allocations_oracle`] follows the set-builder definition: take
//! every partition of the goods, every relation from its blocks to bidders,
//! and keep the relations that are injective functions. The algorithmic
//! version [`possible_allocations_alg`] instead generates exactly the
//! wanted injective maps partition by partition and concatenates them.
//! The two must agree as sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::instance::{BidderId, Bundle, Good};
use crate::partitions::{all_partitions, guard, MAX_ENUMERATION_GOODS};

/// An assignment of pairwise disjoint, non-empty bundles to distinct bidders.
///
/// Goods may be left unallocated. The derived ordering, which compares
/// assignments sorted by bundle, is the canonical allocation order.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Allocation {
    assignments: BTreeMap<Bundle, BidderId>,
}

impl Allocation {
    pub fn empty() -> Self {
        Allocation::default()
    }

    /// Builds an allocation without checking any invariant; see
    /// [`Allocation::check_valid`].
    pub fn from_pairs<I: IntoIterator<Item = (Bundle, BidderId)>>(pairs: I) -> Self {
        Allocation {
            assignments: pairs.into_iter().collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Bundle, BidderId)> {
        self.assignments.iter().map(|(b, &n)| (b, n))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// The bundle assigned to `bidder`, if any.
    pub fn bundle_of(&self, bidder: BidderId) -> Option<&Bundle> {
        self.assignments
            .iter()
            .find_map(|(b, &n)| (n == bidder).then_some(b))
    }

    pub fn insert(&mut self, bundle: Bundle, bidder: BidderId) -> Option<BidderId> {
        self.assignments.insert(bundle, bidder)
    }

    /// Goods handed out by this allocation.
    pub fn allocated_goods(&self) -> BTreeSet<&Good> {
        self.assignments.keys().flat_map(Bundle::iter).collect()
    }

    /// Checks the allocation against a set of goods and bidders, naming the
    /// first violated invariant.
    pub fn check_valid(&self, goods: &BTreeSet<Good>, bidders: &BTreeSet<BidderId>) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidAllocation(msg));
        let mut owner_of: BTreeMap<&Good, BidderId> = BTreeMap::new();
        let mut holders: BTreeSet<BidderId> = BTreeSet::new();
        for (bundle, bidder) in self.iter() {
            if bundle.is_empty() {
                return invalid(format!("bidder {bidder} is assigned the empty bundle"));
            }
            if !bidders.contains(&bidder) {
                return invalid(format!("bidder {bidder} is not part of this auction"));
            }
            if !holders.insert(bidder) {
                return invalid(format!("bidder {bidder} receives more than one bundle"));
            }
            for good in bundle.iter() {
                if !goods.contains(good) {
                    return invalid(format!("good {good} is not for sale"));
                }
                if let Some(prev) = owner_of.insert(good, bidder) {
                    return invalid(format!(
                        "good {good} is allocated to both bidder {prev} and bidder {bidder}"
                    ));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.assignments.is_empty() {
            return f.write_str("(nothing allocated)");
        }
        for (i, (bundle, bidder)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{bundle}->{bidder}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct Assignment {
    bidder: BidderId,
    bundle: Bundle,
}

/// Serialized as a list of `{"bidder", "bundle"}` records in canonical order.
impl Serialize for Allocation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter().map(|(bundle, bidder)| Assignment {
            bidder,
            bundle: bundle.clone(),
        }))
    }
}

impl<'de> Deserialize<'de> for Allocation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let records = Vec::<Assignment>::deserialize(deserializer)?;
        let mut allocation = Allocation::empty();
        for Assignment { bidder, bundle } in records {
            if allocation.assignments.contains_key(&bundle) {
                return Err(serde::de::Error::custom(format!(
                    "bundle {bundle} assigned twice"
                )));
            }
            allocation.insert(bundle, bidder);
        }
        Ok(allocation)
    }
}

pub fn is_valid_allocation(
    allocation: &Allocation,
    goods: &BTreeSet<Good>,
    bidders: &BTreeSet<BidderId>,
) -> bool {
    allocation.check_valid(goods, bidders).is_ok()
}

/// The set of all valid allocations, by brute-force filtering.
///
/// For every partition of `goods`, every total map from its blocks to
/// "unassigned or some bidder" is built and kept when it is injective on
/// the assigned blocks. An empty bidder set yields only the empty allocation.
pub fn possible_allocations_oracle(
    goods: &BTreeSet<Good>,
    bidders: &BTreeSet<BidderId>,
) -> Result<BTreeSet<Allocation>> {
    guard(goods.len(), MAX_ENUMERATION_GOODS)?;
    let bidders_vec: Vec<BidderId> = bidders.iter().copied().collect();
    let choices = bidders_vec.len() + 1;
    let mut out = BTreeSet::new();
    for partition in all_partitions(goods)? {
        let blocks = partition.blocks();
        let total = choices.pow(blocks.len() as u32);
        for mut code in 0..total {
            let mut relation = Vec::with_capacity(blocks.len());
            for block in blocks {
                let choice = code % choices;
                code /= choices;
                if choice > 0 {
                    relation.push((block.clone(), bidders_vec[choice - 1]));
                }
            }
            let distinct: BTreeSet<BidderId> = relation.iter().map(|(_, n)| *n).collect();
            if distinct.len() != relation.len() {
                continue;
            }
            let candidate = Allocation::from_pairs(relation);
            if is_valid_allocation(&candidate, goods, bidders) {
                out.insert(candidate);
            }
        }
    }
    Ok(out)
}

/// Every injective partial map from `blocks` to `bidders`, exactly once.
///
/// Blocks are visited in order; each is either left unassigned or given to
/// each still-free bidder in turn, in that order.
pub fn injective_functions(blocks: &[Bundle], bidders: &[BidderId]) -> Vec<Allocation> {
    fn rec(
        blocks: &[Bundle],
        bidders: &[BidderId],
        used: &mut Vec<bool>,
        current: &mut Vec<(Bundle, BidderId)>,
        out: &mut Vec<Allocation>,
    ) {
        let Some((block, rest)) = blocks.split_first() else {
            out.push(Allocation::from_pairs(current.iter().cloned()));
            return;
        };
        rec(rest, bidders, used, current, out);
        for (i, &bidder) in bidders.iter().enumerate() {
            if used[i] {
                continue;
            }
            used[i] = true;
            current.push((block.clone(), bidder));
            rec(rest, bidders, used, current, out);
            current.pop();
            used[i] = false;
        }
    }
    let mut out = Vec::new();
    rec(
        blocks,
        bidders,
        &mut vec![false; bidders.len()],
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// All allocations as a list: the injective maps of every partition, in
/// partition order. The same allocation can appear under several
/// partitions when some blocks stay unassigned.
pub fn possible_allocations_alg(
    goods: &BTreeSet<Good>,
    bidders: &BTreeSet<BidderId>,
) -> Result<Vec<Allocation>> {
    let bidders: Vec<BidderId> = bidders.iter().copied().collect();
    Ok(all_partitions(goods)?
        .iter()
        .flat_map(|p| injective_functions(p.blocks(), &bidders))
        .collect())
}

/// Drops repeats from an allocation list, keeping first occurrences.
pub fn distinct_allocations(list: Vec<Allocation>) -> Vec<Allocation> {
    let mut seen = BTreeSet::new();
    list.into_iter()
        .filter(|a| seen.insert(a.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::{bidder, bundle, good};
    use crate::partitions::is_partition_of;

    fn goods(ids: &[&str]) -> BTreeSet<Good> {
        ids.iter().map(|s| good(s)).collect()
    }

    fn bidders(ns: &[u64]) -> BTreeSet<BidderId> {
        ns.iter().map(|&n| bidder(n)).collect()
    }

    fn alloc(pairs: &[(&[&str], u64)]) -> Allocation {
        Allocation::from_pairs(pairs.iter().map(|(ids, n)| (bundle(ids), bidder(*n))))
    }

    /// Independent enumeration: every map good -> (nobody | bidder),
    /// grouped by owner into bundles.
    fn allocations_by_owner_maps(
        goods: &BTreeSet<Good>,
        bidders: &BTreeSet<BidderId>,
    ) -> BTreeSet<Allocation> {
        let goods: Vec<&Good> = goods.iter().collect();
        let bidders: Vec<BidderId> = bidders.iter().copied().collect();
        let choices = bidders.len() + 1;
        let mut out = BTreeSet::new();
        for mut code in 0..choices.pow(goods.len() as u32) {
            let mut by_owner: BTreeMap<BidderId, Bundle> = BTreeMap::new();
            for g in &goods {
                let c = code % choices;
                code /= choices;
                if c > 0 {
                    by_owner
                        .entry(bidders[c - 1])
                        .or_default()
                        .insert((*g).clone());
                }
            }
            out.insert(Allocation::from_pairs(
                by_owner.into_iter().map(|(n, b)| (b, n)),
            ));
        }
        out
    }

    const IDS: [&str; 4] = ["A", "B", "C", "D"];

    #[test]
    fn validity_examples() {
        let g = goods(&["A", "B"]);
        let n = bidders(&[1, 2, 3]);
        assert!(is_valid_allocation(
            &alloc(&[(&["A"], 2), (&["B"], 3)]),
            &g,
            &n
        ));
        assert!(!is_valid_allocation(
            &alloc(&[(&["A"], 2), (&["A", "B"], 3)]),
            &g,
            &n
        ));
        assert!(!is_valid_allocation(
            &alloc(&[(&["A"], 2), (&["B"], 2)]),
            &g,
            &n
        ));
        assert!(!is_valid_allocation(&alloc(&[(&["C"], 2)]), &g, &n));
        assert!(!is_valid_allocation(&alloc(&[(&["A"], 4)]), &g, &n));
        assert!(!is_valid_allocation(&alloc(&[(&[], 1)]), &g, &n));
        assert!(is_valid_allocation(&Allocation::empty(), &g, &n));
    }

    #[test]
    fn overlap_diagnostic_names_the_good() {
        let err = alloc(&[(&["A"], 2), (&["A", "B"], 3)])
            .check_valid(&goods(&["A", "B"]), &bidders(&[1, 2, 3]))
            .unwrap_err();
        assert!(err.to_string().contains("good A"), "{err}");
    }

    #[test]
    fn oracle_small_cases() {
        let one = possible_allocations_oracle(&goods(&["A"]), &bidders(&[1])).unwrap();
        assert_eq!(
            one,
            [Allocation::empty(), alloc(&[(&["A"], 1)])]
                .into_iter()
                .collect()
        );

        let two = possible_allocations_oracle(&goods(&["A", "B"]), &bidders(&[1, 2])).unwrap();
        let expected: BTreeSet<Allocation> = [
            Allocation::empty(),
            alloc(&[(&["A", "B"], 1)]),
            alloc(&[(&["A", "B"], 2)]),
            alloc(&[(&["A"], 1)]),
            alloc(&[(&["A"], 2)]),
            alloc(&[(&["B"], 1)]),
            alloc(&[(&["B"], 2)]),
            alloc(&[(&["A"], 1), (&["B"], 2)]),
            alloc(&[(&["A"], 2), (&["B"], 1)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(two, expected);

        let single_bidder =
            possible_allocations_oracle(&goods(&["A", "B"]), &bidders(&[1])).unwrap();
        assert_eq!(single_bidder.len(), 4);
    }

    #[test]
    fn oracle_matches_owner_map_enumeration() {
        for g in 1..=4 {
            for m in 1..=4u64 {
                let gs = goods(&IDS[..g]);
                let ns: BTreeSet<BidderId> = (1..=m).map(bidder).collect();
                let oracle = possible_allocations_oracle(&gs, &ns).unwrap();
                assert_eq!(oracle, allocations_by_owner_maps(&gs, &ns), "g={g} m={m}");
                assert_eq!(oracle.len(), (m as usize + 1).pow(g as u32));
            }
        }
    }

    #[test]
    fn injective_function_examples() {
        assert_eq!(
            injective_functions(&[], &[bidder(1), bidder(2)]),
            vec![Allocation::empty()]
        );
        assert_eq!(
            injective_functions(&[bundle(&["A"])], &[bidder(1), bidder(2)]),
            vec![
                Allocation::empty(),
                alloc(&[(&["A"], 1)]),
                alloc(&[(&["A"], 2)])
            ]
        );
        // partial maps from two blocks to one bidder: nobody, or one of the two blocks
        assert_eq!(
            injective_functions(&[bundle(&["A"]), bundle(&["B"])], &[bidder(1)]),
            vec![
                Allocation::empty(),
                alloc(&[(&["B"], 1)]),
                alloc(&[(&["A"], 1)])
            ]
        );
    }

    #[test]
    fn injective_functions_count_partial_injections() {
        // sum_j C(k, j) * m! / (m - j)!
        let count = |k: u64, m: u64| -> u64 {
            let choose = |n: u64, r: u64| (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1));
            let falling = |n: u64, r: u64| (0..r).fold(1, |acc, i| acc * (n - i));
            (0..=k.min(m)).map(|j| choose(k, j) * falling(m, j)).sum()
        };
        for k in 0..=4u64 {
            for m in 0..=4u64 {
                let blocks: Vec<Bundle> = IDS[..k as usize].iter().map(|s| bundle(&[s])).collect();
                let ns: Vec<BidderId> = (1..=m).map(bidder).collect();
                let fs = injective_functions(&blocks, &ns);
                assert_eq!(fs.len() as u64, count(k, m), "k={k} m={m}");
                let distinct: BTreeSet<_> = fs.iter().cloned().collect();
                assert_eq!(distinct.len(), fs.len());
            }
        }
    }

    #[test]
    fn alg_examples() {
        let g = goods(&["A", "B"]);
        let n = bidders(&[1, 2]);
        let alg: BTreeSet<_> = possible_allocations_alg(&g, &n)
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(alg, possible_allocations_oracle(&g, &n).unwrap());
        assert_eq!(alg.len(), 9);

        let single: BTreeSet<_> = possible_allocations_alg(&goods(&["A"]), &bidders(&[1, 2, 3]))
            .unwrap()
            .into_iter()
            .collect();
        let expected: BTreeSet<_> = [
            Allocation::empty(),
            alloc(&[(&["A"], 1)]),
            alloc(&[(&["A"], 2)]),
            alloc(&[(&["A"], 3)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(single, expected);

        let three = possible_allocations_alg(&g, &bidders(&[1, 2, 3])).unwrap();
        assert!(three.contains(&alloc(&[(&["A"], 2), (&["B"], 3)])));
    }

    #[test]
    fn alg_equals_oracle_exhaustively() {
        for g in 1..=4 {
            for m in 1..=4u64 {
                let gs = goods(&IDS[..g]);
                let ns: BTreeSet<BidderId> = (1..=m).map(bidder).collect();
                let raw = possible_allocations_alg(&gs, &ns).unwrap();
                assert!(raw.iter().all(|a| is_valid_allocation(a, &gs, &ns)));
                let alg: BTreeSet<_> = raw.iter().cloned().collect();
                assert_eq!(
                    alg,
                    possible_allocations_oracle(&gs, &ns).unwrap(),
                    "g={g} m={m}"
                );

                let full_domain: Vec<_> = raw
                    .iter()
                    .filter(|a| {
                        let blocks: Vec<Bundle> = a.iter().map(|(b, _)| b.clone()).collect();
                        is_partition_of(&blocks, &gs)
                    })
                    .collect();
                let distinct: BTreeSet<_> = full_domain.iter().collect();
                assert_eq!(distinct.len(), full_domain.len(), "g={g} m={m}");
            }
        }
    }

    #[test]
    fn raw_list_has_duplicates_that_distinct_removes() {
        let raw = possible_allocations_alg(&goods(&["A", "B"]), &bidders(&[1, 2])).unwrap();
        assert!(raw.len() > 9);
        let distinct = distinct_allocations(raw);
        assert_eq!(distinct.len(), 9);
        assert_eq!(distinct[0], Allocation::empty());
    }

    #[test]
    fn monotone_in_goods_and_bidders() {
        let small = possible_allocations_oracle(&goods(&["A", "B"]), &bidders(&[1, 2])).unwrap();
        let more_bidders =
            possible_allocations_oracle(&goods(&["A", "B"]), &bidders(&[1, 2, 3])).unwrap();
        let more_goods =
            possible_allocations_oracle(&goods(&["A", "B", "C"]), &bidders(&[1, 2])).unwrap();
        assert!(small.is_subset(&more_bidders));
        assert!(small.is_subset(&more_goods));
    }

    #[test]
    fn size_guard() {
        let gs: BTreeSet<Good> = (0..13).map(|i| good(&format!("G{i:02}"))).collect();
        assert!(possible_allocations_oracle(&gs, &bidders(&[1]))
            .unwrap_err()
            .is_size_guard());
        assert!(possible_allocations_alg(&gs, &bidders(&[1]))
            .unwrap_err()
            .is_size_guard());
    }
}
