//! Degree-`k` regular sequences built from an antichain indexed by small index sets.
//!
//! The infinite notion of a regular family is replaced by a finite surrogate: a
//! sequence `(a_i : i ∈ I)` is degree-`k` regular when every meet of at most `k`
//! members is nonzero, deciding elements are dense, and no nonzero element that
//! decides every `a_i` lies below more than `k` of them.

use serde::{Deserialize, Serialize};

use super::{AlgebraError, BoolAlg, Elem, Result};
use crate::index::IndexSet;

/// An antichain whose members are labeled by distinct index sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexedAntichain {
    index_size: usize,
    entries: Vec<(IndexSet, Elem)>,
}

impl IndexedAntichain {
    /// Entries are sorted by index set; labels must be distinct subsets of `{0..index_size-1}`.
    pub fn new(alg: &BoolAlg, index_size: usize, mut entries: Vec<(IndexSet, Elem)>) -> Result<IndexedAntichain> {
        entries.sort_by_key(|(s, _)| *s);
        let full = IndexSet::full(index_size);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(AlgebraError::BadIndexing(format!("index {} repeated", w[0].0)));
            }
        }
        if let Some((s, _)) = entries.iter().find(|(s, _)| !s.is_subset(full)) {
            return Err(AlgebraError::BadIndexing(format!("index {s} outside I")));
        }
        let members: Vec<Elem> = entries.iter().map(|(_, e)| *e).collect();
        if !alg.antichain_checks(&members)?.0 {
            return Err(AlgebraError::NotAntichain(format!("{members:?}")));
        }
        Ok(IndexedAntichain { index_size, entries })
    }

    /// `c_s` on the first `count` atoms, taking the index sets in the given order.
    pub fn on_atoms(alg: &BoolAlg, index_size: usize, labels: &[IndexSet]) -> Result<IndexedAntichain> {
        if labels.len() > alg.atom_count() {
            return Err(AlgebraError::BadIndexing(format!(
                "{} labels need at least that many atoms, P({}) has fewer",
                labels.len(),
                alg.atom_count()
            )));
        }
        let entries = labels.iter().enumerate().map(|(k, s)| (*s, alg.atom(k))).collect();
        IndexedAntichain::new(alg, index_size, entries)
    }

    pub fn index_size(&self) -> usize {
        self.index_size
    }

    pub fn entries(&self) -> &[(IndexSet, Elem)] {
        &self.entries
    }

    pub fn get(&self, s: IndexSet) -> Option<Elem> {
        self.entries.iter().find(|(t, _)| *t == s).map(|(_, e)| *e)
    }

    pub fn labels(&self) -> impl Iterator<Item = IndexSet> + '_ {
        self.entries.iter().map(|(s, _)| *s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularSequenceReport {
    pub degree: usize,
    pub length: usize,
    pub fip_up_to: usize,
    pub deciding_dense: bool,
    /// Most members lying above a single atom.
    pub max_cover: usize,
}

impl RegularSequenceReport {
    pub fn is_regular(&self) -> bool {
        self.deciding_dense && self.max_cover <= self.degree && self.fip_up_to >= self.degree.min(self.length)
    }
}

/// `a_i = ⋁{c_s : i ∈ s}` for an antichain indexed by `{s ⊆ I : 1 ≤ |s| ≤ k}` (and possibly `∅`).
pub fn regular_sequence_from_antichain(
    alg: &BoolAlg,
    c: &IndexedAntichain,
    degree: usize,
) -> Result<(Vec<Elem>, RegularSequenceReport)> {
    if degree == 0 {
        return Err(AlgebraError::BadIndexing("degree must be at least 1".into()));
    }
    let n = c.index_size();
    let expected: Vec<IndexSet> = IndexSet::all(n).filter(|s| !s.is_empty() && s.len() <= degree).collect();
    let got: Vec<IndexSet> = c.labels().filter(|s| !s.is_empty()).collect();
    if got != expected {
        return Err(AlgebraError::BadIndexing(format!(
            "expected the index sets of size 1..={degree} over {n} indices"
        )));
    }
    let seq: Vec<Elem> = (0..n)
        .map(|i| alg.big_join(c.entries().iter().filter(|(s, _)| s.contains(i)).map(|(_, e)| *e)))
        .collect::<Result<_>>()?;
    Ok((seq.clone(), regular_report(alg, &seq, degree)))
}

/// Measures the degree-`k` surrogate properties of an arbitrary sequence.
pub fn regular_report(alg: &BoolAlg, seq: &[Elem], degree: usize) -> RegularSequenceReport {
    let n = seq.len();
    let mut fip_up_to = n;
    for s in IndexSet::all(n) {
        let meet = s.iter().fold(alg.one(), |acc, i| acc & seq[i]);
        if meet.is_zero() {
            fip_up_to = fip_up_to.min(s.len() - 1);
        }
    }
    // Every atom decides every member, so deciding elements are dense; checked anyway.
    let deciding_dense = alg.atoms().all(|a| seq.iter().all(|&x| alg.decides(a, x).unwrap_or(false)));
    let max_cover = (0..alg.atom_count())
        .map(|e| seq.iter().filter(|x| x.contains_atom(e)).count())
        .max()
        .unwrap_or(0);
    RegularSequenceReport { degree, length: n, fip_up_to, deciding_dense, max_cover }
}
