//! Finite index sets `I = {0, .., k-1}` and their subsets, stored as bitmasks.
//!
//! Distributions, regular sequences and antichains indexed by `[I]^{<ω}` all use
//! [`IndexSet`] keys. For a finite `I` the finite subsets are exactly `P(I)`,
//! so tables are stored densely by mask.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest supported index set.
pub const MAX_INDEX: usize = 16;

/// A subset of `{0, .., MAX_INDEX - 1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet(pub u32);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    /// The full set `{0, .., k-1}`.
    pub fn full(k: usize) -> IndexSet {
        assert!(k <= MAX_INDEX, "index set too large");
        IndexSet(((1u64 << k) - 1) as u32)
    }

    pub fn singleton(i: usize) -> IndexSet {
        IndexSet(1 << i)
    }

    pub fn from_indices(indices: &[usize]) -> IndexSet {
        IndexSet(indices.iter().fold(0, |acc, &i| acc | (1 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & other.0)
    }

    pub fn without(self, i: usize) -> IndexSet {
        IndexSet(self.0 & !(1 << i))
    }

    pub fn insert(self, i: usize) -> IndexSet {
        IndexSet(self.0 | (1 << i))
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32usize).filter(move |&i| self.0 & (1 << i) != 0)
    }

    pub fn max(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(31 - self.0.leading_zeros() as usize)
        }
    }

    /// All subsets of `self`, in increasing mask order (so `∅` first, `self` last).
    pub fn subsets(self) -> impl Iterator<Item = IndexSet> {
        let full = self.0;
        (0..=full as u64)
            .map(|m| m as u32)
            .filter(move |m| m & !full == 0)
            .map(IndexSet)
    }

    /// All subsets of `{0, .., k-1}` in mask order.
    pub fn all(k: usize) -> impl Iterator<Item = IndexSet> {
        (0..(1u32 << k)).map(IndexSet)
    }

    /// Dense table position of this subset.
    pub fn position(self) -> usize {
        self.0 as usize
    }

    /// The key used by the JSON formats: members joined by commas, `""` for `∅`.
    pub fn key(self) -> String {
        self.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn parse_key(key: &str) -> Option<IndexSet> {
        if key.trim().is_empty() {
            return Some(IndexSet::EMPTY);
        }
        let mut set = IndexSet::EMPTY;
        for part in key.split(',') {
            let i: usize = part.trim().parse().ok()?;
            if i >= MAX_INDEX {
                return None;
            }
            set = set.insert(i);
        }
        Some(set)
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.key())
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        IndexSet::parse_key(&s).ok_or_else(|| serde::de::Error::custom(format!("bad index set key {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_round_trip() {
        for k in 0..5 {
            for s in IndexSet::all(k) {
                assert_eq!(IndexSet::parse_key(&s.key()), Some(s));
            }
        }
        assert_eq!(IndexSet::from_indices(&[0, 1]).key(), "0,1");
        assert_eq!(IndexSet::EMPTY.key(), "");
    }

    #[test]
    fn subsets_are_ordered_and_complete() {
        let s = IndexSet::from_indices(&[0, 2]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs, vec![IndexSet(0), IndexSet(1), IndexSet(4), IndexSet(5)]);
        assert_eq!(IndexSet::all(3).count(), 8);
    }
}
