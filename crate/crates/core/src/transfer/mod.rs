//! Surjective homomorphisms between finite algebras and moving distributions
//! along them.
//!
//! A homomorphism `j: P(X) → P(Y)` comes from a point map `g: Y → X` by
//! `j(a) = g⁻¹(a)`; it is onto exactly when `g` is injective. Its kernel filter
//! `j⁻¹(1)` is generated by the range of `g`.

mod goodpair;

pub use goodpair::{refinement_step, ChoiceFunction, GoodPairState, PregoodReport, PregoodViolation, SigmaValue, Witness, DEFAULT_SIGMA_DEPTH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, BoolAlg, Elem, PrincipalFilter};
use crate::dist::{find_multiplicative_refinement, los_criterion, DistError, Distribution, FormulaSequence, PatternCheck, Scope, Verdict};
use crate::index::IndexSet;
use crate::logic::Theory;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransferError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("atom map has {got} entries, target has {expected} atoms")]
    BadAtomMap { got: usize, expected: usize },
    #[error("target atoms {0} and {1} both map to source atom {2}")]
    NotInjective(usize, usize, usize),
    #[error("homomorphism is not onto")]
    NotSurjective,
    #[error("image of the value at {0} is 0")]
    ZeroImage(IndexSet),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("state is not pre-good: {0}")]
    NotPregood(String),
    #[error("filter meets B({index}) in 0, so the extension has no finite intersection property")]
    NoFip { index: IndexSet, filter: Vec<usize>, value: Vec<usize> },
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
}

pub type Result<T, E = TransferError> = std::result::Result<T, E>;

/// `j: source → target` given by `atom_map[y] = g(y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraHom {
    source: BoolAlg,
    target: BoolAlg,
    atom_map: Vec<usize>,
}

impl AlgebraHom {
    pub fn source(&self) -> &BoolAlg {
        &self.source
    }

    pub fn target(&self) -> &BoolAlg {
        &self.target
    }

    pub fn atom_map(&self) -> &[usize] {
        &self.atom_map
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.source.atom_count()];
        self.atom_map.iter().all(|&x| !std::mem::replace(&mut seen[x], true))
    }

    pub fn apply(&self, a: Elem) -> Elem {
        let bits = self.atom_map.iter().enumerate().filter(|(_, &x)| a.contains_atom(x)).fold(0u64, |acc, (y, _)| acc | 1 << y);
        self.target.from_bits(bits)
    }

    /// The least `a` with `j(a) = b`, for `b` in the target.
    pub fn min_preimage(&self, b: Elem) -> Elem {
        let bits = b.atoms().fold(0u64, |acc, y| acc | 1 << self.atom_map[y]);
        self.source.from_bits(bits)
    }

    /// The join of the range of `g`; `j(a) = 1` exactly when `a` lies above it.
    pub fn range(&self) -> Elem {
        self.min_preimage(self.target.one())
    }

    /// `j⁻¹(1)`.
    pub fn kernel_filter(&self) -> PrincipalFilter {
        PrincipalFilter::principal(&self.source, self.range()).expect("the range is nonempty")
    }

    /// `j⁻¹(u)`, generated by the least preimage of `u`'s generator.
    pub fn preimage_filter(&self, u: &PrincipalFilter) -> PrincipalFilter {
        PrincipalFilter::principal(&self.source, self.min_preimage(u.generator())).expect("preimage of a nonzero element under an onto map")
    }

    /// Checks 0, 1, ∧, ∨ and ¬ over all elements (or pairs); for small algebras.
    pub fn check_homomorphism(&self) -> bool {
        let j = |a| self.apply(a);
        if !j(self.source.zero()).is_zero() || !j(self.source.one()).is_one() {
            return false;
        }
        self.source.elements().all(|a| j(!a) == !j(a) && self.source.elements().all(|b| j(a & b) == (j(a) & j(b)) && j(a | b) == (j(a) | j(b))))
    }
}

/// The homomorphism of the atom map `g`, required onto when `surjective` is set.
pub fn hom_from_atom_map(source: &BoolAlg, target: &BoolAlg, g: &[usize], surjective: bool) -> Result<AlgebraHom> {
    if g.len() != target.atom_count() {
        return Err(TransferError::BadAtomMap { got: g.len(), expected: target.atom_count() });
    }
    if let Some(&x) = g.iter().find(|&&x| x >= source.atom_count()) {
        return Err(AlgebraError::AtomOutOfRange { atom: x, n: source.atom_count() }.into());
    }
    if surjective {
        for (y0, &x) in g.iter().enumerate() {
            if let Some(y1) = g[y0 + 1..].iter().position(|&x1| x1 == x) {
                return Err(TransferError::NotInjective(y0, y0 + 1 + y1, x));
            }
        }
    }
    Ok(AlgebraHom { source: source.clone(), target: target.clone(), atom_map: g.to_vec() })
}

fn require_surjective(j: &AlgebraHom) -> Result<()> {
    if j.is_surjective() {
        Ok(())
    } else {
        Err(TransferError::NotSurjective)
    }
}

/// `j ∘ a0`.
pub fn pushforward(j: &AlgebraHom, a0: &Distribution) -> Result<Distribution> {
    if a0.algebra() != j.source() {
        return Err(DistError::IndexMismatch.into());
    }
    if let Some(s) = a0.index().subsets().find(|&s| j.apply(a0.get(s)).is_zero()) {
        return Err(TransferError::ZeroImage(s));
    }
    let a1 = a0.map(j.target(), |v| j.apply(v))?;
    assert!(a1.is_distribution(), "homomorphic image of a distribution");
    Ok(a1)
}

/// A distribution `a0` over the source with `j ∘ a0 = a1`, built from the least preimages.
pub fn pullback_distribution(j: &AlgebraHom, a1: &Distribution) -> Result<Distribution> {
    let lifts: Vec<Elem> = a1.values().iter().map(|&v| j.min_preimage(v)).collect();
    pullback_distribution_with(j, a1, &lifts)
}

/// As [`pullback_distribution`], starting from any table of preimages `lifts`
/// (indexed by bitmask). The lifts need not be monotone; the kernel filter
/// repairs that.
pub fn pullback_distribution_with(j: &AlgebraHom, a1: &Distribution, lifts: &[Elem]) -> Result<Distribution> {
    require_surjective(j)?;
    if a1.algebra() != j.target() || !a1.is_distribution() {
        return Err(TransferError::PreconditionFailed("not a distribution over the target".into()));
    }
    let alg = j.source();
    let mut prime = Distribution::from_table(alg, a1.index_size(), lifts.to_vec())?;
    if a1.index().subsets().any(|s| j.apply(prime.get(s)) != a1.get(s)) {
        return Err(TransferError::PreconditionFailed("lifts are not preimages".into()));
    }
    prime = Distribution::from_fn(alg, a1.index_size(), |s| if s.is_empty() { alg.one() } else { prime.get(s) })?;
    // where the lift behaves like a distribution: a'(t) ∨ ¬a'(t') over t ⊆ t' ⊆ s
    let c = Distribution::from_fn(alg, a1.index_size(), |s| {
        s.subsets().fold(alg.one(), |acc, t2| t2.subsets().fold(acc, |acc, t| acc & (prime.get(t) | !prime.get(t2))))
    })?;
    let kernel = j.kernel_filter();
    let d = find_multiplicative_refinement(&c, &kernel, false)?;
    let a0 = Distribution::from_fn(alg, a1.index_size(), |s| prime.get(s) & d.get(s))?;
    assert!(a0.is_distribution(), "repaired lift is a distribution");
    assert_eq!(&pushforward(j, &a0)?, a1, "repaired lift maps onto a1");
    Ok(a0)
}

/// A multiplicative refinement of `a0` in `j⁻¹(u1)` from one of `j ∘ a0` in `u1`.
pub fn pull_back_mult_refinement(j: &AlgebraHom, a0: &Distribution, u1: &PrincipalFilter, b1: &Distribution) -> Result<Distribution> {
    let lifts: Vec<Elem> = (0..b1.index_size()).map(|i| j.min_preimage(b1.singleton(i))).collect();
    pull_back_mult_refinement_with(j, a0, u1, b1, &lifts)
}

/// As [`pull_back_mult_refinement`], with any preimages `lifts[i]` of `b1({i})`.
pub fn pull_back_mult_refinement_with(j: &AlgebraHom, a0: &Distribution, u1: &PrincipalFilter, b1: &Distribution, lifts: &[Elem]) -> Result<Distribution> {
    require_surjective(j)?;
    let fail = |m: &str| Err(TransferError::PreconditionFailed(m.into()));
    let u0 = j.preimage_filter(u1);
    if a0.algebra() != j.source() || !a0.is_distribution() || !a0.is_in_filter(&u0) {
        return fail("a0 is not a distribution in the preimage filter");
    }
    let a1 = pushforward(j, a0)?;
    if !b1.is_multiplicative() || !b1.refines(&a1)? || !b1.is_in_filter(u1) {
        return fail("b1 is not a multiplicative refinement of the pushforward in the filter");
    }
    if lifts.len() != b1.index_size() || lifts.iter().enumerate().any(|(i, &v)| j.apply(v) != b1.singleton(i)) {
        return fail("lifts are not preimages of the singleton values");
    }
    let alg = j.source();
    let prime = Distribution::multiplicative(alg, lifts)?;
    // where the lift refines a0: a0(t) ∨ ¬b'(t) over t ⊆ s
    let c = Distribution::from_fn(alg, a0.index_size(), |s| s.subsets().fold(alg.one(), |acc, t| acc & (a0.get(t) | !prime.get(t))))?;
    let d = find_multiplicative_refinement(&c, &j.kernel_filter(), false)?;
    let b0 = Distribution::from_fn(alg, a0.index_size(), |s| prime.get(s) & d.get(s))?;
    assert!(b0.is_multiplicative() && b0.is_in_filter(&u0) && b0.refines(a0)?, "pulled-back refinement");
    Ok(b0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LosTransferReport {
    pub source: Verdict,
    pub target: Verdict,
    pub agree: bool,
    /// A failure on the target side, moved to the source through
    /// `c0 = ⋀_{t∈J} A0(t) ∧ ⋀_{t∉J} ¬A0(t)`.
    pub transferred: Option<PatternCheck>,
    /// A source failure at an atom outside the range of `g`, which the target
    /// cannot see.
    pub unseen_source_failure: Option<PatternCheck>,
}

/// The Łoś-map criterion for `a0` and for `j ∘ a0`, computed independently.
#[allow(clippy::too_many_arguments)]
pub fn los_transfer_check(j: &AlgebraHom, a0: &Distribution, seq: &FormulaSequence, theory: &Theory, bound: usize, budget: u64) -> Result<LosTransferReport> {
    require_surjective(j)?;
    let a1 = pushforward(j, a0)?;
    let r0 = los_criterion(a0, seq, theory, bound, budget, Scope::Atoms, false)?;
    let r1 = los_criterion(&a1, seq, theory, bound, budget, Scope::Atoms, false)?;
    let mut transferred = None;
    if let (Verdict::No, Some(w)) = (r1.verdict, &r1.witness) {
        let j_set: Vec<IndexSet> = w.pattern.clone();
        let c0 = a0.index().subsets().fold(j.source().one(), |acc, t| acc & if j_set.contains(&t) { a0.get(t) } else { !a0.get(t) });
        let c1 = j.target().elem(&w.c)?;
        assert!(c1.leq(j.apply(c0)), "j(c0) lies above the failing element");
        let atom = c0.atoms().next().expect("c0 is nonzero");
        let pattern: Vec<IndexSet> = a0.index().subsets().filter(|&t| a0.get(t).contains_atom(atom)).collect();
        assert_eq!(pattern, j_set, "the atom below c0 has the failing pattern");
        // the same finder task failed on the target side
        assert_eq!(r0.verdict, Verdict::No, "target failure transfers to the source");
        transferred = Some(PatternCheck { c: vec![atom], s: w.s, pattern, verdict: Verdict::No });
    }
    let unseen = match (&r0.witness, r0.verdict) {
        (Some(w), Verdict::No) if w.c.iter().all(|&x| !j.range().contains_atom(x)) => Some(w.clone()),
        _ => None,
    };
    Ok(LosTransferReport { source: r0.verdict, target: r1.verdict, agree: r0.verdict == r1.verdict, transferred, unseen_source_failure: unseen })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finder::DEFAULT_NODE_BUDGET;
    use crate::logic::{parse_theory, parse_with, Signature};
    use proptest::prelude::*;

    fn p(n: usize) -> BoolAlg {
        BoolAlg::new(n).unwrap()
    }

    fn worked() -> AlgebraHom {
        hom_from_atom_map(&p(3), &p(2), &[0, 2], true).unwrap()
    }

    #[test]
    fn hom_examples() {
        let j = worked();
        assert_eq!(j.apply(p(3).elem(&[0, 1]).unwrap()), p(2).elem(&[0]).unwrap());
        assert_eq!(j.kernel_filter().generator(), p(3).elem(&[0, 2]).unwrap());
        assert!(j.check_homomorphism() && j.is_surjective());
        let id = hom_from_atom_map(&p(3), &p(3), &[0, 1, 2], true).unwrap();
        assert!(p(3).elements().all(|a| id.apply(a) == a));
        assert!(id.kernel_filter().generator().is_one());
        assert_eq!(hom_from_atom_map(&p(2), &p(2), &[0, 0], true), Err(TransferError::NotInjective(0, 1, 0)));
        assert!(!hom_from_atom_map(&p(2), &p(2), &[0, 0], false).unwrap().is_surjective());
    }

    #[test]
    fn kernel_quotient_is_the_target() {
        let j = worked();
        let q = crate::algebra::Quotient::new(&p(3), j.kernel_filter());
        assert_eq!(q.target().atom_count(), 2);
        for a in p(3).elements() {
            assert_eq!(j.kernel_filter().contains(a), j.apply(a).is_one());
            // quotient atoms are the range of g in increasing order, as is g here
            assert_eq!(q.project(a).bits(), j.apply(a).bits());
        }
    }

    #[test]
    fn pushforward_examples() {
        let j = worked();
        let a0 = Distribution::new(&p(3), 1, vec![p(3).one(), p(3).elem(&[0, 1]).unwrap()]).unwrap();
        let a1 = pushforward(&j, &a0).unwrap();
        assert_eq!(a1.singleton(0), p(2).atom(0));
        let one = Distribution::constant(&p(3), 2, p(3).one()).unwrap();
        assert_eq!(pushforward(&j, &one).unwrap(), Distribution::constant(&p(2), 2, p(2).one()).unwrap());
        let bad = Distribution::new(&p(3), 1, vec![p(3).one(), p(3).atom(1)]).unwrap();
        assert_eq!(pushforward(&j, &bad), Err(TransferError::ZeroImage(IndexSet::singleton(0))));
    }

    #[test]
    fn pullback_repairs_non_monotone_lifts() {
        let j = worked();
        let a1 = Distribution::new(&p(2), 1, vec![p(2).one(), p(2).atom(0)]).unwrap();
        // the lift at {0} carries the stray atom 1, the lift at ∅ does not
        let lifts = vec![p(3).elem(&[0, 2]).unwrap(), p(3).elem(&[0, 1]).unwrap()];
        let a0 = pullback_distribution_with(&j, &a1, &lifts).unwrap();
        assert_eq!(pushforward(&j, &a0).unwrap(), a1);
        assert!(a0.is_distribution());
        assert_eq!(pullback_distribution(&j, &Distribution::constant(&p(2), 2, p(2).one()).unwrap()).unwrap().get(IndexSet::full(2)), j.range());
    }

    #[test]
    fn pull_back_refinement_worked() {
        let j = hom_from_atom_map(&p(4), &p(2), &[1, 3], true).unwrap();
        let u1 = PrincipalFilter::ultrafilter_from_atom(&p(2), 0).unwrap();
        let a0 = Distribution::new(&p(4), 2, vec![p(4).one(), p(4).elem(&[0, 1, 2]).unwrap(), p(4).elem(&[1, 3]).unwrap(), p(4).elem(&[1]).unwrap()]).unwrap();
        let a1 = pushforward(&j, &a0).unwrap();
        let b1 = find_multiplicative_refinement(&a1, &u1, false).unwrap();
        // lifts deliberately larger than needed
        let lifts = vec![p(4).elem(&[0, 1]).unwrap(), p(4).elem(&[0, 1, 3]).unwrap()];
        let b0 = pull_back_mult_refinement_with(&j, &a0, &u1, &b1, &lifts).unwrap();
        assert!(b0.is_multiplicative() && b0.refines(&a0).unwrap() && b0.is_in_filter(&j.preimage_filter(&u1)));
        let b0 = pull_back_mult_refinement(&j, &a0, &u1, &a1).unwrap();
        assert!(b0.refines(&a0).unwrap());
    }

    fn eq_seq(sig: &Signature) -> FormulaSequence {
        FormulaSequence::new(sig.clone(), vec!["x".into()], vec![parse_with("x = y0", sig).unwrap(), parse_with("x = y1", sig).unwrap()]).unwrap()
    }

    #[test]
    fn los_transfer() {
        let sig = Signature::new();
        let t = parse_theory(&["forall x, y. x = y"], &sig).unwrap();
        let j = hom_from_atom_map(&p(2), &p(2), &[1, 0], true).unwrap();
        // fails at atom 0 in both algebras
        let a0 = Distribution::new(&p(2), 2, vec![p(2).one(), p(2).one(), p(2).one(), p(2).atom(1)]).unwrap();
        let r = los_transfer_check(&j, &a0, &eq_seq(&sig), &t, 2, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!((r.source, r.target, r.agree), (Verdict::No, Verdict::No, true));
        assert!(r.transferred.is_some());
        // a failure outside the range is invisible to the target
        let j = hom_from_atom_map(&p(2), &p(1), &[1], true).unwrap();
        let r = los_transfer_check(&j, &a0, &eq_seq(&sig), &t, 2, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!((r.source, r.target), (Verdict::No, Verdict::Yes));
        assert_eq!(r.unseen_source_failure.unwrap().c, vec![0]);
    }

    /// `(m, g, noise)`: an injective atom map from `k ≤ min(m, 3)` target atoms into `m ≤ 4`.
    fn instance() -> impl Strategy<Value = (usize, Vec<usize>, Vec<u64>)> {
        (1usize..=4)
            .prop_flat_map(|m| (Just(m), 1..=m.min(3), Just((0..m).collect::<Vec<_>>()).prop_shuffle(), proptest::collection::vec(any::<u64>(), 4)))
            .prop_map(|(m, k, perm, noise)| (m, perm[..k].to_vec(), noise))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn pullback_round_trip((m, g, noise) in instance()) {
            let (b0, b1) = (p(m), p(g.len()));
            let j = hom_from_atom_map(&b0, &b1, &g, true).unwrap();
            let all = crate::dist::enumerate_distributions(&b1, 2, None, 1 << 20).unwrap();
            let a1 = &all[(noise[0] as usize) % all.len()];
            let outside = !j.range();
            let lifts: Vec<Elem> = a1.values().iter().zip(noise.iter().cycle()).map(|(&v, &r)| j.min_preimage(v) | (b0.from_bits(r & b0.one().bits()) & outside)).collect();
            let a0 = pullback_distribution_with(&j, a1, &lifts).unwrap();
            prop_assert_eq!(&pushforward(&j, &a0).unwrap(), a1);
        }
    }
}
