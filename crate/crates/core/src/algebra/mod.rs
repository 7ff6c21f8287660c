//! Finite complete Boolean algebras.
//!
//! Every finite Boolean algebra is atomic, so it is represented as the powerset
//! of its atom set `{0, .., n-1}`; an [`Elem`] is a subset of atoms stored as a
//! bitmask. The chain-condition convention follows the one where `c.c.(B)` is the
//! least `λ` such that `B` has no antichain of size `λ`, so `c.c.(P(n)) = n + 1`
//! (Jech instead takes the least *infinite* such cardinal, which is `ℵ0` for every
//! finite algebra).

mod filter;
mod regular;
mod term;

pub use filter::{LatticeFormula, PrincipalFilter, Quotient};
pub use regular::{regular_report, regular_sequence_from_antichain, IndexedAntichain, RegularSequenceReport};
pub use term::LatticeTerm;

use std::fmt;
use std::ops::{BitAnd, BitOr, Not};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard limit imposed by the `u64` element representation.
pub const MAX_ATOMS: usize = 64;

/// Default cap used by exhaustive searches over algebras.
pub const DEFAULT_ATOM_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("operands belong to different algebras (P({0}) and P({1}))")]
    MixedAlgebras(usize, usize),
    #[error("element must be nonzero")]
    ZeroElement,
    #[error("atom count {0} outside 1..={max}", max = MAX_ATOMS)]
    BadAtomCount(usize),
    #[error("atom index {atom} out of range for P({n})")]
    AtomOutOfRange { atom: usize, n: usize },
    #[error("antichain member {0} is not maximal")]
    NotMaximal(usize),
    #[error("sequence is not an antichain: {0}")]
    NotAntichain(String),
    #[error("{requested} atoms exceeds the configured cap of {cap}")]
    SizeOverflow { requested: u128, cap: usize },
    #[error("generators have no common lower bound (meet is 0)")]
    NoFip,
    #[error("antichain indexing is invalid: {0}")]
    BadIndexing(String),
}

pub type Result<T, E = AlgebraError> = std::result::Result<T, E>;

/// The powerset algebra `P({0, .., n-1})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoolAlg {
    #[serde(rename = "atoms")]
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

/// An element of some `P(n)`: a set of atoms.
///
/// The atom count is carried along so that elements of different algebras
/// are never silently combined.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem {
    n: u8,
    bits: u64,
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl BoolAlg {
    pub fn new(n: usize) -> Result<BoolAlg> {
        if n == 0 || n > MAX_ATOMS {
            return Err(AlgebraError::BadAtomCount(n));
        }
        Ok(BoolAlg { n, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<BoolAlg> {
        let mut alg = BoolAlg::new(labels.len())?;
        alg.labels = Some(labels);
        Ok(alg)
    }

    /// The two-element algebra `{0, 1}`.
    pub fn trivial() -> BoolAlg {
        BoolAlg { n: 1, labels: None }
    }

    pub fn atom_count(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Re-validates a deserialized algebra.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_ATOMS {
            return Err(AlgebraError::BadAtomCount(self.n));
        }
        Ok(())
    }

    pub fn zero(&self) -> Elem {
        Elem { n: self.n as u8, bits: 0 }
    }

    pub fn one(&self) -> Elem {
        Elem { n: self.n as u8, bits: full_mask(self.n) }
    }

    pub fn atom(&self, i: usize) -> Elem {
        assert!(i < self.n, "atom {i} out of range for P({})", self.n);
        Elem { n: self.n as u8, bits: 1 << i }
    }

    pub fn atoms(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.n).map(move |i| self.atom(i))
    }

    pub fn elem(&self, atoms: &[usize]) -> Result<Elem> {
        let mut bits = 0u64;
        for &a in atoms {
            if a >= self.n {
                return Err(AlgebraError::AtomOutOfRange { atom: a, n: self.n });
            }
            bits |= 1 << a;
        }
        Ok(Elem { n: self.n as u8, bits })
    }

    pub fn from_bits(&self, bits: u64) -> Elem {
        assert!(bits & !full_mask(self.n) == 0, "bits outside P({})", self.n);
        Elem { n: self.n as u8, bits }
    }

    /// Every element, in increasing bitmask order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        assert!(self.n < 32, "refusing to enumerate P({})", self.n);
        (0..(1u64 << self.n)).map(move |b| self.from_bits(b))
    }

    pub fn owns(&self, a: Elem) -> bool {
        a.n as usize == self.n
    }

    fn check(&self, a: Elem) -> Result<()> {
        if self.owns(a) {
            Ok(())
        } else {
            Err(AlgebraError::MixedAlgebras(self.n, a.n as usize))
        }
    }

    pub fn meet(&self, a: Elem, b: Elem) -> Result<Elem> {
        self.check(a)?;
        self.check(b)?;
        Ok(a & b)
    }

    pub fn join(&self, a: Elem, b: Elem) -> Result<Elem> {
        self.check(a)?;
        self.check(b)?;
        Ok(a | b)
    }

    pub fn complement(&self, a: Elem) -> Result<Elem> {
        self.check(a)?;
        Ok(!a)
    }

    pub fn leq(&self, a: Elem, b: Elem) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.leq(b))
    }

    /// `⋀ S`, with `⋀ ∅ = 1`.
    pub fn big_meet<I: IntoIterator<Item = Elem>>(&self, items: I) -> Result<Elem> {
        items.into_iter().try_fold(self.one(), |acc, x| self.meet(acc, x))
    }

    /// `⋁ S`, with `⋁ ∅ = 0`.
    pub fn big_join<I: IntoIterator<Item = Elem>>(&self, items: I) -> Result<Elem> {
        items.into_iter().try_fold(self.zero(), |acc, x| self.join(acc, x))
    }

    /// `c` decides `b` when `c ≤ b` or `c ≤ ¬b`.
    pub fn decides(&self, c: Elem, b: Elem) -> Result<bool> {
        self.check(c)?;
        self.check(b)?;
        if c.is_zero() {
            return Err(AlgebraError::ZeroElement);
        }
        Ok(c.leq(b) || c.leq(!b))
    }

    /// `(is_antichain, is_maximal)`. A zero member makes the sequence a non-antichain.
    pub fn antichain_checks(&self, members: &[Elem]) -> Result<(bool, bool)> {
        for &m in members {
            self.check(m)?;
        }
        let is_antichain = members.iter().all(|m| !m.is_zero())
            && members
                .iter()
                .enumerate()
                .all(|(i, a)| members[i + 1..].iter().all(|b| (*a & *b).is_zero()));
        // Maximality as stated: the meet of the complements is 0.
        let is_maximal = is_antichain && self.big_meet(members.iter().map(|m| !*m))?.is_zero();
        Ok((is_antichain, is_maximal))
    }

    /// Least `λ` with no antichain of size `λ`; the atoms form the largest antichain.
    pub fn chain_condition(&self) -> usize {
        self.n + 1
    }

    /// Whether every choice function on the family has nonzero meet.
    ///
    /// Only total choice functions are enumerated: a partial choice function's
    /// meet lies above the meet of any total extension, so the total ones decide
    /// the question for every finite subfamily.
    pub fn independent_family_check(&self, family: &[Antichain]) -> Result<bool> {
        Ok(self.independence_counterexample(family)?.is_none())
    }

    /// The first choice (one member index per antichain, odometer order) whose meet is 0.
    pub fn independence_counterexample(&self, family: &[Antichain]) -> Result<Option<Vec<usize>>> {
        for (i, c) in family.iter().enumerate() {
            for &m in c.members() {
                self.check(m)?;
            }
            if !c.is_maximal() {
                return Err(AlgebraError::NotMaximal(i));
            }
        }
        let mut choice = vec![0usize; family.len()];
        loop {
            let meet = family
                .iter()
                .zip(&choice)
                .fold(self.one(), |acc, (c, &k)| acc & c.members()[k]);
            if meet.is_zero() {
                return Ok(Some(choice));
            }
            // odometer, last position fastest
            let mut pos = family.len();
            loop {
                if pos == 0 {
                    return Ok(None);
                }
                pos -= 1;
                choice[pos] += 1;
                if choice[pos] < family[pos].len() {
                    break;
                }
                choice[pos] = 0;
            }
        }
    }
}

/// `P(d^m)` together with `m` independent maximal antichains of size `d`.
///
/// Atoms are the functions `{0..m-1} → {0..d-1}`, numbered in base `d` with
/// coordinate 0 as the most significant digit; the `i`-th antichain groups atoms by
/// their `i`-th coordinate.
pub fn make_independent_family(m: usize, d: usize, atom_cap: usize) -> Result<(BoolAlg, Vec<Antichain>)> {
    if d == 0 {
        return Err(AlgebraError::BadAtomCount(0));
    }
    let size = (d as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if size > atom_cap.min(MAX_ATOMS) as u128 {
        return Err(AlgebraError::SizeOverflow { requested: size, cap: atom_cap.min(MAX_ATOMS) });
    }
    let size = size as usize;
    let alg = BoolAlg::new(size)?;
    let digit = |atom: usize, coord: usize| (atom / d.pow((m - 1 - coord) as u32)) % d;
    let family = (0..m)
        .map(|coord| {
            let members = (0..d)
                .map(|v| {
                    let bits = (0..size).filter(|&a| digit(a, coord) == v).fold(0u64, |acc, a| acc | 1 << a);
                    alg.from_bits(bits)
                })
                .collect();
            Antichain::new(&alg, members).expect("coordinate partition is an antichain")
        })
        .collect();
    Ok((alg, family))
}

impl Elem {
    pub fn atom_count(self) -> usize {
        self.n as usize
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn is_one(self) -> bool {
        self.bits == full_mask(self.n as usize)
    }

    pub fn is_atom(self) -> bool {
        self.bits.count_ones() == 1
    }

    pub fn count(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn contains_atom(self, i: usize) -> bool {
        self.bits & (1 << i) != 0
    }

    pub fn leq(self, other: Elem) -> bool {
        assert_eq!(self.n, other.n, "mixed algebras");
        self.bits & !other.bits == 0
    }

    /// Atom indices in increasing order.
    pub fn atoms(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..64usize).filter(move |&i| bits & (1 << i) != 0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.atoms().collect()
    }

    pub fn symmetric_difference(self, other: Elem) -> Elem {
        assert_eq!(self.n, other.n, "mixed algebras");
        Elem { n: self.n, bits: self.bits ^ other.bits }
    }

    pub fn minus(self, other: Elem) -> Elem {
        self & !other
    }
}

impl BitAnd for Elem {
    type Output = Elem;
    fn bitand(self, rhs: Elem) -> Elem {
        assert_eq!(self.n, rhs.n, "mixed algebras");
        Elem { n: self.n, bits: self.bits & rhs.bits }
    }
}

impl BitOr for Elem {
    type Output = Elem;
    fn bitor(self, rhs: Elem) -> Elem {
        assert_eq!(self.n, rhs.n, "mixed algebras");
        Elem { n: self.n, bits: self.bits | rhs.bits }
    }
}

impl Not for Elem {
    type Output = Elem;
    fn not(self) -> Elem {
        Elem { n: self.n, bits: !self.bits & full_mask(self.n as usize) }
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, a) in self.atoms().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A finite sequence of pairwise-disjoint nonzero elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Antichain {
    members: Vec<Elem>,
    maximal: bool,
}

impl Antichain {
    pub fn new(alg: &BoolAlg, members: Vec<Elem>) -> Result<Antichain> {
        let (ok, maximal) = alg.antichain_checks(&members)?;
        if !ok {
            return Err(AlgebraError::NotAntichain(format!("{members:?}")));
        }
        Ok(Antichain { members, maximal })
    }

    /// The atoms of `alg`, the finest maximal antichain.
    pub fn atoms(alg: &BoolAlg) -> Antichain {
        Antichain { members: alg.atoms().collect(), maximal: true }
    }

    pub fn members(&self) -> &[Elem] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_maximal(&self) -> bool {
        self.maximal
    }

    /// The member containing atom `i`, if any.
    pub fn block_of(&self, i: usize) -> Option<usize> {
        self.members.iter().position(|m| m.contains_atom(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p3() -> BoolAlg {
        BoolAlg::new(3).unwrap()
    }

    #[test]
    fn lattice_examples() {
        let b = p3();
        let m = b.meet(b.elem(&[0, 1]).unwrap(), b.elem(&[1, 2]).unwrap()).unwrap();
        assert_eq!(m.to_vec(), vec![1]);
        assert_eq!(b.complement(b.elem(&[0]).unwrap()).unwrap().to_vec(), vec![1, 2]);
        assert!(b.big_join(std::iter::empty()).unwrap().is_zero());
        assert!(b.big_meet(std::iter::empty()).unwrap().is_one());
    }

    #[test]
    fn mixed_algebras_rejected() {
        let b = p3();
        let other = BoolAlg::new(2).unwrap().one();
        assert_eq!(b.meet(b.one(), other), Err(AlgebraError::MixedAlgebras(3, 2)));
        assert!(BoolAlg::new(0).is_err());
    }

    #[test]
    fn decides_examples() {
        let b = p3();
        assert!(b.decides(b.elem(&[0]).unwrap(), b.elem(&[0, 1]).unwrap()).unwrap());
        assert!(!b.decides(b.elem(&[0, 1]).unwrap(), b.elem(&[1, 2]).unwrap()).unwrap());
        for a in b.atoms() {
            for x in b.elements() {
                assert!(b.decides(a, x).unwrap());
            }
        }
        assert_eq!(b.decides(b.zero(), b.one()), Err(AlgebraError::ZeroElement));
    }

    #[test]
    fn decides_matches_atom_agreement() {
        let b = BoolAlg::new(4).unwrap();
        for c in b.elements().filter(|c| !c.is_zero()) {
            for x in b.elements() {
                let agree = c.atoms().all(|i| c.atoms().all(|j| x.contains_atom(i) == x.contains_atom(j)));
                assert_eq!(b.decides(c, x).unwrap(), agree);
            }
        }
    }

    #[test]
    fn antichain_examples() {
        let b = p3();
        let e = |v: &[usize]| b.elem(v).unwrap();
        assert_eq!(b.antichain_checks(&[e(&[0]), e(&[1])]).unwrap(), (true, false));
        assert_eq!(b.antichain_checks(&[e(&[0]), e(&[1]), e(&[2])]).unwrap(), (true, true));
        assert!(!b.antichain_checks(&[e(&[0, 1]), e(&[1, 2])]).unwrap().0);
        assert!(!b.antichain_checks(&[b.zero()]).unwrap().0);
    }

    /// Largest antichain by brute force: search over sets of pairwise-disjoint nonzero elements.
    fn largest_antichain(b: &BoolAlg) -> usize {
        fn grow(elems: &[Elem], start: usize, used: u64, size: usize, best: &mut usize) {
            *best = (*best).max(size);
            for k in start..elems.len() {
                if elems[k].bits() & used == 0 {
                    grow(elems, k + 1, used | elems[k].bits(), size + 1, best);
                }
            }
        }
        let elems: Vec<Elem> = b.elements().filter(|e| !e.is_zero()).collect();
        let mut best = 0;
        grow(&elems, 0, 0, 0, &mut best);
        best
    }

    #[test]
    fn chain_condition_matches_enumeration() {
        for n in 1..=4 {
            let b = BoolAlg::new(n).unwrap();
            assert_eq!(b.chain_condition(), largest_antichain(&b) + 1);
        }
        assert_eq!(BoolAlg::new(1).unwrap().chain_condition(), 2);
        assert_eq!(BoolAlg::new(2).unwrap().chain_condition(), 3);
        assert_eq!(BoolAlg::new(3).unwrap().chain_condition(), 4);
    }

    #[test]
    fn independent_family_examples() {
        let b = BoolAlg::new(4).unwrap();
        assert!(b.independent_family_check(&[]).unwrap());
        let c0 = Antichain::new(&b, vec![b.elem(&[0, 1]).unwrap(), b.elem(&[2, 3]).unwrap()]).unwrap();
        let c1 = Antichain::new(&b, vec![b.elem(&[0, 2]).unwrap(), b.elem(&[1, 3]).unwrap()]).unwrap();
        assert!(b.independent_family_check(&[c0.clone(), c1.clone()]).unwrap());
        // listing c0 twice: choosing {0,1} then {2,3} meets to 0
        assert!(!b.independent_family_check(&[c0.clone(), c0.clone()]).unwrap());
        assert_eq!(b.independence_counterexample(&[c0.clone(), c0]).unwrap(), Some(vec![0, 1]));
        let partial = Antichain::new(&b, vec![b.elem(&[0]).unwrap()]).unwrap();
        assert_eq!(b.independent_family_check(&[partial]), Err(AlgebraError::NotMaximal(0)));
    }

    #[test]
    fn independent_family_construction() {
        let (b, fam) = make_independent_family(0, 3, 64).unwrap();
        assert_eq!((b.atom_count(), fam.len()), (1, 0));
        let (b, fam) = make_independent_family(1, 3, 64).unwrap();
        assert_eq!(b.atom_count(), 3);
        assert_eq!(fam[0].members(), Antichain::atoms(&b).members());
        let (b, fam) = make_independent_family(2, 2, 64).unwrap();
        assert_eq!(b.atom_count(), 4);
        assert_eq!(fam[0].members(), &[b.elem(&[0, 1]).unwrap(), b.elem(&[2, 3]).unwrap()]);
        assert_eq!(fam[1].members(), &[b.elem(&[0, 2]).unwrap(), b.elem(&[1, 3]).unwrap()]);
        for m in 0..=3 {
            for d in 1..=3 {
                let (b, fam) = make_independent_family(m, d, 64).unwrap();
                assert!(b.independent_family_check(&fam).unwrap(), "m={m} d={d}");
            }
        }
        assert!(matches!(make_independent_family(3, 3, 16), Err(AlgebraError::SizeOverflow { .. })));
    }

    #[test]
    fn boolean_algebra_axioms_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let n = rng.gen_range(1..=10);
            let b = BoolAlg::new(n).unwrap();
            let mut pick = || b.from_bits(rng.gen::<u64>() & full_mask(n));
            let (x, y, z) = (pick(), pick(), pick());
            assert_eq!((x & y) & z, x & (y & z));
            assert_eq!((x | y) | z, x | (y | z));
            assert_eq!(x & (y | z), (x & y) | (x & z));
            assert_eq!(x | (y & z), (x | y) & (x | z));
            assert_eq!(!(x & y), !x | !y);
            assert_eq!(!(x | y), !x & !y);
            assert_eq!(!!x, x);
            assert_eq!(x & !x, b.zero());
            assert_eq!(x | !x, b.one());
            assert_eq!(x | (x & y), x);
            assert_eq!(x.leq(y), (x & y) == x);
        }
    }
}
