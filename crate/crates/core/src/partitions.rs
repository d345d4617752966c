//! Set partitions of a finite set of goods.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::instance::{Bundle, Good};

/// Largest ground set the exhaustive enumerators accept. Bell(13) is already
/// over 27 million.
pub const MAX_ENUMERATION_GOODS: usize = 12;

/// A partition of a set of goods into non-empty, pairwise disjoint blocks.
///
/// Blocks are kept in the order the enumeration created them; equality,
/// ordering and hashing treat the blocks as a set.
#[derive(Debug, Clone)]
pub struct Partition {
    blocks: Vec<Bundle>,
}

impl Partition {
    pub fn blocks(&self) -> &[Bundle] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Blocks sorted in canonical bundle order.
    pub fn canonical_blocks(&self) -> Vec<Bundle> {
        let mut blocks = self.blocks.clone();
        blocks.sort();
        blocks
    }
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_blocks() == other.canonical_blocks()
    }
}

impl Eq for Partition {}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_blocks().cmp(&other.canonical_blocks())
    }
}

impl Hash for Partition {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical_blocks().hash(state);
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str("}")
    }
}

/// The goods of `set` as a strictly increasing sequence.
pub fn canonical_order<'a, I>(set: I) -> Vec<Good>
where
    I: IntoIterator<Item = &'a Good>,
{
    let sorted: BTreeSet<&Good> = set.into_iter().collect();
    sorted.into_iter().cloned().collect()
}

pub(crate) fn guard(size: usize, limit: usize) -> Result<()> {
    if size > limit {
        return Err(Error::TooLarge { size, limit });
    }
    Ok(())
}

/// Every partition of `goods`, each exactly once.
///
/// Elements are taken in canonical order; each partition of the first `k`
/// elements spawns the partitions of the first `k + 1` by adding the next
/// element to each existing block in turn, then as a new singleton block.
/// The empty set has exactly one partition, the one with no blocks.
pub fn all_partitions(goods: &BTreeSet<Good>) -> Result<Vec<Partition>> {
    guard(goods.len(), MAX_ENUMERATION_GOODS)?;
    let mut partitions = vec![Partition { blocks: Vec::new() }];
    for good in canonical_order(goods) {
        let mut next = Vec::with_capacity(partitions.len() * (partitions.len().min(4) + 1));
        for p in &partitions {
            for i in 0..p.blocks.len() {
                let mut blocks = p.blocks.clone();
                blocks[i].insert(good.clone());
                next.push(Partition { blocks });
            }
            let mut blocks = p.blocks.clone();
            blocks.push(std::iter::once(good.clone()).collect());
            next.push(Partition { blocks });
        }
        partitions = next;
    }
    Ok(partitions)
}

/// Whether `candidate` partitions `goods`: non-empty, pairwise disjoint
/// blocks whose union is exactly `goods`.
pub fn is_partition_of(candidate: &[Bundle], goods: &BTreeSet<Good>) -> bool {
    let mut seen = BTreeSet::new();
    for block in candidate {
        if block.is_empty() {
            return false;
        }
        for good in block.iter() {
            if !goods.contains(good) || !seen.insert(good) {
                return false;
            }
        }
    }
    seen.len() == goods.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::{bundle, good};

    fn set(ids: &[&str]) -> BTreeSet<Good> {
        ids.iter().map(|s| good(s)).collect()
    }

    /// Bell numbers by the Bell triangle, independent of the enumerator.
    fn bell_triangle(n: usize) -> Vec<u64> {
        let mut bells = vec![1u64];
        let mut row = vec![1u64];
        for _ in 1..=n {
            let mut next = vec![*row.last().unwrap()];
            for &x in &row {
                let last = *next.last().unwrap();
                next.push(last + x);
            }
            bells.push(next[0]);
            row = next;
        }
        bells.truncate(n + 1);
        bells
    }

    /// Partitions via restricted growth strings, a second independent route.
    fn partitions_by_growth_strings(goods: &[Good]) -> BTreeSet<Vec<Bundle>> {
        fn rec(i: usize, labels: &mut Vec<usize>, goods: &[Good], out: &mut BTreeSet<Vec<Bundle>>) {
            if i == goods.len() {
                let k = labels.iter().copied().max().map_or(0, |m| m + 1);
                let mut blocks = vec![Bundle::empty(); k];
                for (g, &l) in goods.iter().zip(labels.iter()) {
                    blocks[l].insert(g.clone());
                }
                blocks.sort();
                out.insert(blocks);
                return;
            }
            let next_label = labels.iter().copied().max().map_or(0, |m| m + 1);
            for l in 0..=next_label {
                labels.push(l);
                rec(i + 1, labels, goods, out);
                labels.pop();
            }
        }
        let mut out = BTreeSet::new();
        rec(0, &mut Vec::new(), goods, &mut out);
        out
    }

    #[test]
    fn canonical_order_sorts() {
        assert_eq!(
            canonical_order(&set(&["B", "A"])),
            vec![good("A"), good("B")]
        );
        assert!(canonical_order(&set(&[])).is_empty());
        assert_eq!(
            canonical_order(&set(&["C", "A", "B"])),
            vec![good("A"), good("B"), good("C")]
        );
    }

    #[test]
    fn bell_triangle_values() {
        assert_eq!(bell_triangle(6), vec![1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn small_partitions() {
        let one = all_partitions(&set(&["A"])).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].blocks(), &[bundle(&["A"])]);

        let two = all_partitions(&set(&["A", "B"])).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].blocks(), &[bundle(&["A", "B"])]);
        assert_eq!(two[1].blocks(), &[bundle(&["A"]), bundle(&["B"])]);

        assert_eq!(all_partitions(&set(&["A", "B", "C"])).unwrap().len(), 5);

        let none = all_partitions(&set(&[])).unwrap();
        assert_eq!(none.len(), 1);
        assert!(none[0].is_empty());
    }

    #[test]
    fn counts_match_bell_and_growth_strings() {
        let ids = ["A", "B", "C", "D", "E", "F"];
        let bells = bell_triangle(6);
        for n in 0..=6 {
            let goods = set(&ids[..n]);
            let parts = all_partitions(&goods).unwrap();
            assert_eq!(parts.len() as u64, bells[n]);
            let distinct: BTreeSet<_> = parts.iter().map(Partition::canonical_blocks).collect();
            assert_eq!(distinct.len(), parts.len(), "duplicates for n={n}");
            assert!(parts.iter().all(|p| is_partition_of(p.blocks(), &goods)));
            let oracle = partitions_by_growth_strings(&canonical_order(&goods));
            assert_eq!(distinct, oracle);
        }
    }

    #[test]
    fn enumeration_is_deterministic() {
        let goods = set(&["D", "A", "C", "B"]);
        let a = all_partitions(&goods).unwrap();
        let b = all_partitions(&goods).unwrap();
        let render = |ps: &[Partition]| ps.iter().map(|p| p.to_string()).collect::<Vec<_>>();
        assert_eq!(render(&a), render(&b));
    }

    #[test]
    fn too_large_is_refused() {
        let goods: BTreeSet<Good> = (0..13).map(|i| good(&format!("G{i:02}"))).collect();
        assert_eq!(
            all_partitions(&goods).unwrap_err(),
            Error::TooLarge {
                size: 13,
                limit: 12
            }
        );
    }

    #[test]
    fn recognizer() {
        let ab = set(&["A", "B"]);
        assert!(is_partition_of(&[bundle(&["A"]), bundle(&["B"])], &ab));
        assert!(!is_partition_of(&[bundle(&["A"])], &ab));
        assert!(!is_partition_of(
            &[bundle(&["A", "B"]), bundle(&["B"])],
            &ab
        ));
        assert!(!is_partition_of(
            &[bundle(&["A", "B"]), Bundle::empty()],
            &ab
        ));
        assert!(!is_partition_of(&[bundle(&["A", "B", "C"])], &ab));
        assert!(is_partition_of(&[], &set(&[])));
    }

    #[test]
    fn partition_equality_ignores_block_order() {
        let ab = set(&["A", "B"]);
        let p = &all_partitions(&ab).unwrap()[1];
        let q = Partition {
            blocks: vec![bundle(&["B"]), bundle(&["A"])],
        };
        assert_eq!(p, &q);
    }
}
