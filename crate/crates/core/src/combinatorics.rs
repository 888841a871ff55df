//! Subsets, set partitions and multisets: the index structures that every
//! sum in the calculus runs over.
//!
//! Partitions are generated as restricted-growth strings (RGS) in
//! lexicographic order, which yields blocks sorted by their smallest element.
//! Subsets are generated in increasing bitmask order.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Ground sets larger than this are rejected by the process layer unless the
/// caller raises the limit explicitly (`B₁₁ = 678570`).
pub const DEFAULT_MAX_ORDER: usize = 10;

/// Bitmask enumeration limit.
pub const MAX_GROUND: usize = 31;

/// An ordered set of indices drawn from `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSubset {
    indices: Vec<usize>,
}

impl IndexSubset {
    /// Panics if `indices` is not strictly increasing.
    pub fn new(indices: Vec<usize>) -> Self {
        assert!(
            indices.windows(2).all(|w| w[0] < w[1]),
            "subset indices must be strictly increasing"
        );
        IndexSubset { indices }
    }

    /// The full ground set `{0, …, n-1}`.
    pub fn full(n: usize) -> Self {
        IndexSubset {
            indices: (0..n).collect(),
        }
    }

    pub fn from_mask(mask: u32) -> Self {
        let mut indices = Vec::with_capacity(mask.count_ones() as usize);
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            indices.push(i);
            rest &= rest - 1;
        }
        IndexSubset { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

impl fmt::Display for IndexSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.indices {
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

/// All `2ⁿ` subsets of `{0, …, n-1}` in increasing bitmask order.
pub fn enumerate_subsets(n: usize) -> Vec<IndexSubset> {
    assert!(
        n <= MAX_GROUND,
        "ground set too large for subset enumeration"
    );
    (0..1u32 << n).map(IndexSubset::from_mask).collect()
}

/// A partition of a ground set into disjoint, nonempty blocks, sorted by
/// smallest element. The empty ground set has exactly one partition, with no
/// blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    blocks: Vec<IndexSubset>,
}

impl SetPartition {
    pub fn blocks(&self) -> &[IndexSubset] {
        &self.blocks
    }

    /// Number of blocks, `|π|`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Builds the partition of `ground` described by a restricted-growth
    /// string over positions of `ground`.
    pub fn from_rgs(ground: &IndexSubset, rgs: &[usize]) -> Self {
        debug_assert_eq!(ground.len(), rgs.len());
        let count = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (&element, &b) in ground.indices().iter().zip(rgs) {
            blocks[b].push(element);
        }
        SetPartition {
            blocks: blocks
                .into_iter()
                .map(|indices| IndexSubset { indices })
                .collect(),
        }
    }

    /// True when blocks are nonempty, pairwise disjoint, cover `ground`, and
    /// are in canonical order.
    pub fn is_partition_of(&self, ground: &IndexSubset) -> bool {
        if self.blocks.iter().any(IndexSubset::is_empty) {
            return false;
        }
        let mut all: Vec<usize> = self
            .blocks
            .iter()
            .flat_map(|b| b.indices().iter().copied())
            .collect();
        all.sort_unstable();
        let canonical = self
            .blocks
            .windows(2)
            .all(|w| w[0].indices()[0] < w[1].indices()[0]);
        canonical && all == ground.indices()
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str("}")
    }
}

/// Lexicographic walk over restricted-growth strings of length `n`.
///
/// `a[0] = 0` and `a[i] ≤ 1 + max(a[0..i])`. Each string encodes one set
/// partition; position `i` lies in block `a[i]`.
#[derive(Debug, Clone)]
pub struct RestrictedGrowth {
    rgs: Vec<usize>,
    // prefix_max[i] = max(rgs[0..i]), with prefix_max[0] unused
    prefix_max: Vec<usize>,
    started: bool,
    done: bool,
}

impl RestrictedGrowth {
    pub fn new(n: usize) -> Self {
        RestrictedGrowth {
            rgs: vec![0; n],
            prefix_max: vec![0; n],
            started: false,
            done: false,
        }
    }

    /// Advances to the next string; returns `None` when exhausted. The empty
    /// string (n = 0) is produced exactly once.
    pub fn next_rgs(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.rgs);
        }
        let n = self.rgs.len();
        let mut i = n;
        while i > 1 {
            i -= 1;
            if self.rgs[i] <= self.prefix_max[i] {
                self.rgs[i] += 1;
                let m = self.prefix_max[i].max(self.rgs[i]);
                for j in i + 1..n {
                    self.rgs[j] = 0;
                    self.prefix_max[j] = m;
                }
                return Some(&self.rgs);
            }
        }
        self.done = true;
        None
    }
}

/// Every set partition of `ground`, in canonical (RGS-lexicographic) order.
pub fn enumerate_partitions(ground: &IndexSubset) -> Vec<SetPartition> {
    let mut walk = RestrictedGrowth::new(ground.len());
    let mut out = Vec::new();
    while let Some(rgs) = walk.next_rgs() {
        out.push(SetPartition::from_rgs(ground, rgs));
    }
    out
}

/// Partitions of `{0, …, k-1}` with each block stored as a bitmask; the
/// layout used by the hot summation loops.
#[derive(Debug, Clone)]
pub struct PartitionTable {
    size: usize,
    partitions: Vec<Vec<u32>>,
}

impl PartitionTable {
    pub fn new(size: usize) -> Self {
        assert!(
            size <= MAX_GROUND,
            "ground set too large for partition table"
        );
        let mut walk = RestrictedGrowth::new(size);
        let mut partitions = Vec::new();
        while let Some(rgs) = walk.next_rgs() {
            let count = rgs.iter().max().map_or(0, |m| m + 1);
            let mut masks = vec![0u32; count];
            for (i, &b) in rgs.iter().enumerate() {
                masks[b] |= 1 << i;
            }
            partitions.push(masks);
        }
        PartitionTable { size, partitions }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn partitions(&self) -> &[Vec<u32>] {
        &self.partitions
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }
}

/// Partition tables for every ground size `0..=max`.
pub fn partition_tables(max: usize) -> Vec<PartitionTable> {
    (0..=max).map(PartitionTable::new).collect()
}

/// Bell number `Bₙ` by the Bell triangle.
pub fn bell_number(n: usize) -> BigUint {
    let mut row = vec![BigUint::one()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().cloned().unwrap_or_else(BigUint::zero));
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    row.swap_remove(0)
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// A multiset of state-space indices, stored as `(index, multiplicity)` with
/// strictly increasing indices. Used as the canonical key for symmetric
/// density arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Multiset {
    entries: Vec<(usize, u32)>,
}

impl Multiset {
    pub fn empty() -> Self {
        Multiset::default()
    }

    /// From a nondecreasing list of indices.
    pub fn from_sorted(points: &[usize]) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] <= w[1]));
        let mut entries: Vec<(usize, u32)> = Vec::new();
        for &p in points {
            match entries.last_mut() {
                Some((last, m)) if *last == p => *m += 1,
                _ => entries.push((p, 1)),
            }
        }
        Multiset { entries }
    }

    pub fn from_points(points: &[usize]) -> Self {
        canonicalize(points).0
    }

    /// From per-index counts (`counts[i]` copies of index `i`).
    pub fn from_counts(counts: &[u32]) -> Self {
        Multiset {
            entries: counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (i, c))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    /// Total size `Σ mᵢ`.
    pub fn size(&self) -> usize {
        self.entries.iter().map(|&(_, m)| m as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sorted tuple with repetitions.
    pub fn expand(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.size());
        for &(p, m) in &self.entries {
            out.extend(std::iter::repeat_n(p, m as usize));
        }
        out
    }

    /// Number of distinct ordered tuples with this content, `n!/∏ mᵢ!`.
    pub fn permutation_multiplicity(&self) -> u64 {
        let denom: u64 = self
            .entries
            .iter()
            .map(|&(_, m)| factorial(m as usize))
            .product();
        factorial(self.size()) / denom
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(p, _)| p)
    }

    /// Multiset union (sum of multiplicities).
    pub fn union(&self, other: &Multiset) -> Multiset {
        let mut points = self.expand();
        points.extend(other.expand());
        points.sort_unstable();
        Multiset::from_sorted(&points)
    }
}

/// Sorts a tuple of state indices into its multiset and returns how many
/// ordered tuples share that multiset.
pub fn canonicalize(points: &[usize]) -> (Multiset, u64) {
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    let m = Multiset::from_sorted(&sorted);
    let mult = m.permutation_multiplicity();
    (m, mult)
}

/// All multisets of size `n` over `{0, …, m-1}`, lexicographic in their
/// sorted expansions.
pub fn multisets_of_size(m: usize, n: usize) -> Vec<Multiset> {
    let mut out = Vec::new();
    if m == 0 {
        if n == 0 {
            out.push(Multiset::empty());
        }
        return out;
    }
    let mut tuple = vec![0usize; n];
    loop {
        out.push(Multiset::from_sorted(&tuple));
        // next nondecreasing tuple
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if tuple[i] + 1 < m {
                let v = tuple[i] + 1;
                for t in &mut tuple[i..] {
                    *t = v;
                }
                break;
            }
        }
    }
}

/// All multisets of sizes `lo..=hi`, ordered by size then lexicographically.
pub fn multisets_up_to(m: usize, lo: usize, hi: usize) -> Vec<Multiset> {
    (lo..=hi).flat_map(|n| multisets_of_size(m, n)).collect()
}
