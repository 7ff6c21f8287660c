//! Single steps of the good-pair construction: Σ-term values, the pre-good
//! check, maximal extension of the filter, witnesses for elements, and the
//! multiplicative refinement step that spends one reserve antichain.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Result, TransferError};
use crate::algebra::{Antichain, BoolAlg, Elem, IndexedAntichain, LatticeTerm, PrincipalFilter};
use crate::dist::Distribution;
use crate::index::IndexSet;

pub const DEFAULT_SIGMA_DEPTH: usize = 3;
const CHOICE_CAP: u64 = 1 << 20;

/// A term over the designated variables and its value on both sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaValue {
    pub term: LatticeTerm,
    pub source: Elem,
    pub target: Elem,
}

/// `(reserve antichain, member)` pairs; the domain is a set of antichains.
pub type ChoiceFunction = Vec<(usize, usize)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PregoodViolation {
    /// `σ(c̄') = 1` but `σ(c̄)` is outside the filter.
    NotInFilter { term: String },
    /// `σ(c̄') ≠ 0` but `x_f ∧ σ(c̄)` is 0 modulo the filter.
    Disjoint { term: String, choice: ChoiceFunction },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PregoodReport {
    pub pregood: bool,
    pub sigma_values: usize,
    pub choice_functions: u64,
    pub violation: Option<PregoodViolation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub choice: ChoiceFunction,
    pub alpha: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodPairState {
    pub source: BoolAlg,
    pub target: BoolAlg,
    /// `(c_α, c'_α)`.
    pub designated: Vec<(Elem, Elem)>,
    pub reserve: Vec<Antichain>,
    pub filter: PrincipalFilter,
    pub depth: usize,
}

impl GoodPairState {
    pub fn new(source: &BoolAlg, target: &BoolAlg, designated: Vec<(Elem, Elem)>, reserve: Vec<Antichain>, filter: PrincipalFilter) -> Result<GoodPairState> {
        if designated.iter().any(|&(c, d)| !source.owns(c) || !target.owns(d)) || !source.owns(filter.generator()) {
            return Err(TransferError::PreconditionFailed("designated pairs or filter from the wrong algebra".into()));
        }
        if reserve.iter().any(|c| !c.is_maximal() || c.members().iter().any(|&m| !source.owns(m))) {
            return Err(TransferError::PreconditionFailed("reserve antichains must be maximal in the source".into()));
        }
        Ok(GoodPairState { source: source.clone(), target: target.clone(), designated, reserve, filter, depth: DEFAULT_SIGMA_DEPTH })
    }

    /// Values of all terms up to the depth bound, one representative term per
    /// distinct pair of values, in order of discovery.
    pub fn sigma_values(&self) -> Vec<SigmaValue> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut push = |out: &mut Vec<SigmaValue>, v: SigmaValue| {
            if seen.insert((v.source.bits(), v.target.bits())) {
                out.push(v);
            }
        };
        push(&mut out, SigmaValue { term: LatticeTerm::Zero, source: self.source.zero(), target: self.target.zero() });
        push(&mut out, SigmaValue { term: LatticeTerm::One, source: self.source.one(), target: self.target.one() });
        for (i, &(c, d)) in self.designated.iter().enumerate() {
            push(&mut out, SigmaValue { term: LatticeTerm::var(i), source: c, target: d });
        }
        for _ in 0..self.depth {
            let level = out.clone();
            for x in &level {
                push(&mut out, SigmaValue { term: LatticeTerm::not(x.term.clone()), source: !x.source, target: !x.target });
                for y in &level {
                    push(&mut out, SigmaValue { term: LatticeTerm::meet(x.term.clone(), y.term.clone()), source: x.source & y.source, target: x.target & y.target });
                    push(&mut out, SigmaValue { term: LatticeTerm::join(x.term.clone(), y.term.clone()), source: x.source | y.source, target: x.target | y.target });
                }
            }
        }
        out
    }

    /// `σ(c̄)` and `σ(c̄')`.
    pub fn eval_sigma(&self, term: &LatticeTerm) -> (Elem, Elem) {
        let (cs, ds): (Vec<Elem>, Vec<Elem>) = self.designated.iter().copied().unzip();
        (term.eval(&self.source, &cs), term.eval(&self.target, &ds))
    }

    /// The filter generated by `{σ(c̄) : σ(c̄') = 1}`, the least one meeting the first condition.
    pub fn sigma_one_filter(&self) -> Result<PrincipalFilter> {
        let gens: Vec<Elem> = self.sigma_values().into_iter().filter(|v| v.target.is_one()).map(|v| v.source).collect();
        Ok(PrincipalFilter::generated_by(&self.source, &gens)?)
    }

    pub fn x_f(&self, f: &[(usize, usize)]) -> Elem {
        f.iter().fold(self.source.one(), |acc, &(c, m)| acc & self.reserve[c].members()[m])
    }

    fn total_choices(&self) -> Result<u64> {
        let n = self.reserve.iter().fold(1u64, |acc, c| acc.saturating_mul(c.len() as u64));
        if n > CHOICE_CAP {
            return Err(TransferError::CapExceeded(format!("{n} choice functions")));
        }
        Ok(n)
    }

    fn choice_at(&self, mut k: u64) -> ChoiceFunction {
        let mut f = Vec::with_capacity(self.reserve.len());
        for (c, ac) in self.reserve.iter().enumerate().rev() {
            f.push((c, (k % ac.len() as u64) as usize));
            k /= ac.len() as u64;
        }
        f.reverse();
        f
    }

    /// Nonzero is read modulo the filter. Total choice functions suffice, since
    /// `x_f` only shrinks as the domain grows.
    pub fn is_pregood(&self) -> Result<PregoodReport> {
        self.pregood_under(self.filter)
    }

    fn pregood_under(&self, filter: PrincipalFilter) -> Result<PregoodReport> {
        let sigma = self.sigma_values();
        let n = self.total_choices()?;
        let report = |violation: Option<PregoodViolation>| PregoodReport { pregood: violation.is_none(), sigma_values: sigma.len(), choice_functions: n, violation };
        if let Some(v) = sigma.iter().find(|v| v.target.is_one() && !filter.contains(v.source)) {
            return Ok(report(Some(PregoodViolation::NotInFilter { term: v.term.to_string() })));
        }
        let gen = filter.generator();
        let positive: Vec<&SigmaValue> = sigma.iter().filter(|v| !v.target.is_zero()).collect();
        for k in 0..n {
            let f = self.choice_at(k);
            let x = self.x_f(&f) & gen;
            if let Some(v) = positive.iter().find(|v| (x & v.source).is_zero()) {
                return Ok(report(Some(PregoodViolation::Disjoint { term: v.term.to_string(), choice: f })));
            }
        }
        Ok(report(None))
    }

    /// Strengthens the filter, one atom of its generator at a time, while the
    /// state stays pre-good. Pre-goodness only gets harder as the filter grows,
    /// so no single step succeeding means no extension does.
    pub fn extend_to_good(&self) -> Result<GoodPairState> {
        if let Some(v) = self.is_pregood()?.violation {
            return Err(TransferError::NotPregood(format!("{v:?}")));
        }
        let mut gen = self.filter.generator();
        loop {
            let mut changed = false;
            for atom in gen.atoms().collect::<Vec<_>>() {
                let smaller = gen.minus(self.source.atom(atom));
                if smaller.is_zero() {
                    continue;
                }
                let f = PrincipalFilter::principal(&self.source, smaller)?;
                if self.pregood_under(f)?.pregood {
                    gen = smaller;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Ok(GoodPairState { filter: PrincipalFilter::principal(&self.source, gen)?, ..self.clone() })
    }

    /// Some `f` and `α` with `c'_α ≠ 0` and `0 ≠ x_f ∧ c_α ≤ a` modulo the filter,
    /// smallest domains first. `None` when `a` is 0 modulo the filter or nothing fits.
    pub fn find_witness(&self, a: Elem) -> Result<Option<Witness>> {
        let gen = self.filter.generator();
        if (a & gen).is_zero() {
            return Ok(None);
        }
        self.total_choices()?;
        let r = self.reserve.len();
        for size in 0..=r {
            for dom in IndexSet::all(r).filter(|d| d.len() == size) {
                let dom: Vec<usize> = dom.iter().collect();
                let count: u64 = dom.iter().map(|&c| self.reserve[c].len() as u64).product();
                for mut k in 0..count {
                    let mut f = Vec::with_capacity(size);
                    for &c in dom.iter().rev() {
                        let len = self.reserve[c].len() as u64;
                        f.push((c, (k % len) as usize));
                        k /= len;
                    }
                    f.reverse();
                    let x = self.x_f(&f) & gen;
                    for (alpha, &(c, d)) in self.designated.iter().enumerate() {
                        let y = x & c;
                        if !d.is_zero() && !y.is_zero() && y.leq(a) {
                            return Ok(Some(Witness { choice: f, alpha }));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    /// Spends reserve antichain `which`, whose members are read as `d_s` with `s`
    /// the member's position as a bitmask, on a multiplicative refinement of `a`.
    pub fn apply_refinement(&self, which: usize, a: &Distribution) -> Result<(Distribution, GoodPairState)> {
        let members = self.reserve.get(which).ok_or_else(|| TransferError::PreconditionFailed(format!("no reserve antichain {which}")))?.members();
        if members.len() != 1 << a.index_size() {
            return Err(TransferError::PreconditionFailed(format!("{} members cannot be indexed by the subsets of {} indices", members.len(), a.index_size())));
        }
        let d = IndexedAntichain::new(&self.source, a.index_size(), members.iter().enumerate().map(|(m, &e)| (IndexSet(m as u32), e)).collect())?;
        let was_pregood = self.is_pregood()?.pregood;
        let (b, filter) = refinement_step(&self.filter, &d, a)?;
        let mut reserve = self.reserve.clone();
        reserve.remove(which);
        let next = GoodPairState { reserve, filter, ..self.clone() };
        if was_pregood {
            assert!(next.is_pregood()?.pregood, "spending one antichain keeps the pair pre-good");
        }
        Ok((b, next))
    }
}

/// `B(s) = ⋁{A(t) ∧ d_t : s ⊆ t}` for `s ≠ ∅`, `B(∅) = 1`, and the filter
/// generated by `e` and the values of `B`.
pub fn refinement_step(e: &PrincipalFilter, d: &IndexedAntichain, a: &Distribution) -> Result<(Distribution, PrincipalFilter)> {
    let alg = a.algebra();
    let k = a.index_size();
    if d.index_size() != k || !d.labels().eq(IndexSet::all(k)) {
        return Err(TransferError::PreconditionFailed("antichain must be indexed by every subset of I".into()));
    }
    if !a.is_distribution() || !a.is_in_filter(e) || !alg.owns(e.generator()) {
        return Err(TransferError::PreconditionFailed("a is not a distribution in the filter".into()));
    }
    let dt = |t: IndexSet| d.get(t).expect("every subset is labeled");
    let b = Distribution::from_fn(alg, k, |s| {
        if s.is_empty() {
            alg.one()
        } else {
            IndexSet::all(k).filter(|t| s.is_subset(*t)).fold(alg.zero(), |acc, t| acc | (a.get(t) & dt(t)))
        }
    })?;
    let gen = e.generator();
    if let Some(s) = a.index().subsets().find(|&s| (gen & b.get(s)).is_zero()) {
        return Err(TransferError::NoFip { index: s, filter: gen.to_vec(), value: b.get(s).to_vec() });
    }
    let all = b.values().iter().fold(gen, |acc, &v| acc & v);
    if all.is_zero() {
        return Err(TransferError::NoFip { index: a.index(), filter: gen.to_vec(), value: b.get(a.index()).to_vec() });
    }
    assert!(b.is_distribution() && b.is_multiplicative(), "antichain-indexed joins are multiplicative");
    assert!(b.refines_off_empty(a)?, "B lies below A off the empty set");
    Ok((b, PrincipalFilter::principal(alg, all)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::make_independent_family;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_state_is_pregood() {
        let p2 = BoolAlg::new(2).unwrap();
        let s = GoodPairState::new(&p2, &p2, vec![], vec![], PrincipalFilter::trivial(&p2)).unwrap();
        let r = s.is_pregood().unwrap();
        assert!(r.pregood);
        assert_eq!(r.choice_functions, 1);
    }

    fn independent_state() -> GoodPairState {
        // three independent two-block antichains on P(8): two in reserve, one designated
        let (alg, fam) = make_independent_family(3, 2, 16).unwrap();
        let p2 = BoolAlg::new(2).unwrap();
        let c = fam[2].members()[0];
        GoodPairState::new(&alg, &p2, vec![(alg.one(), p2.one()), (c, p2.atom(0))], fam[..2].to_vec(), PrincipalFilter::trivial(&alg)).unwrap()
    }

    #[test]
    fn independent_reserve_is_pregood() {
        let s = independent_state();
        let r = s.is_pregood().unwrap();
        assert!(r.pregood, "{r:?}");
        assert_eq!(r.choice_functions, 4);
        assert!(s.sigma_one_filter().unwrap().generator().is_one());
        // a designated element missing a reserve block breaks it
        let mut bad = s.clone();
        bad.designated.push((bad.reserve[0].members()[0], bad.target.atom(1)));
        assert!(!bad.is_pregood().unwrap().pregood);
        // with the first condition met, the second still fails
        bad.filter = bad.sigma_one_filter().unwrap();
        let r = bad.is_pregood().unwrap();
        assert!(matches!(r.violation, Some(PregoodViolation::Disjoint { .. })), "{r:?}");
        assert!(matches!(bad.extend_to_good(), Err(TransferError::NotPregood(_))));
    }

    #[test]
    fn extension_is_maximal_and_pregood() {
        let s = independent_state();
        let g = s.extend_to_good().unwrap();
        assert!(g.is_pregood().unwrap().pregood);
        for atom in g.filter.generator().atoms() {
            let smaller = g.filter.generator().minus(g.source.atom(atom));
            if !smaller.is_zero() {
                let mut t = g.clone();
                t.filter = PrincipalFilter::principal(&g.source, smaller).unwrap();
                assert!(!t.is_pregood().unwrap().pregood);
            }
        }
    }

    #[test]
    fn witnesses() {
        let s = independent_state().extend_to_good().unwrap();
        let w = s.find_witness(s.source.one()).unwrap().unwrap();
        assert_eq!(w, Witness { choice: vec![], alpha: 0 });
        assert_eq!(s.find_witness(!s.filter.generator()).unwrap(), None);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let a = s.source.from_bits(rng.gen::<u64>() & s.source.one().bits());
            if let Some(w) = s.find_witness(a).unwrap() {
                let y = s.x_f(&w.choice) & s.designated[w.alpha].0 & s.filter.generator();
                assert!(!y.is_zero() && y.leq(a) && !s.designated[w.alpha].1.is_zero());
            } else {
                assert!((a & s.filter.generator()).is_zero() || s.find_witness(a).unwrap().is_none());
            }
        }
    }

    #[test]
    fn refinement_step_example() {
        let p8 = BoolAlg::new(8).unwrap();
        let d = IndexedAntichain::on_atoms(&p8, 2, &IndexSet::all(2).collect::<Vec<_>>()).unwrap();
        let a = Distribution::constant(&p8, 2, p8.one()).unwrap();
        let (b, f) = refinement_step(&PrincipalFilter::trivial(&p8), &d, &a).unwrap();
        assert_eq!(b.singleton(0), p8.elem(&[1, 3]).unwrap());
        assert!(b.get(IndexSet::EMPTY).is_one());
        assert_eq!(f.generator(), p8.atom(3));
        let none = IndexedAntichain::on_atoms(&p8, 0, &[IndexSet::EMPTY]).unwrap();
        let a0 = Distribution::constant(&p8, 0, p8.one()).unwrap();
        let (b, f) = refinement_step(&PrincipalFilter::trivial(&p8), &none, &a0).unwrap();
        assert_eq!((b.values().len(), f), (1, PrincipalFilter::trivial(&p8)));
        let far = PrincipalFilter::principal(&p8, p8.elem(&[0, 5]).unwrap()).unwrap();
        assert!(matches!(refinement_step(&far, &d, &Distribution::constant(&p8, 2, far.generator()).unwrap()), Err(TransferError::NoFip { .. })));
    }

    /// Every atom below the singleton meets sits under one `d_t`, and each
    /// singleton forces `i ∈ t`, so it lies under `B(s)`.
    #[test]
    fn multiplicativity_through_the_antichain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p8 = BoolAlg::new(8).unwrap();
        for _ in 0..1000 {
            let k = rng.gen_range(0..=3);
            let mut atoms: Vec<usize> = (0..8).collect();
            for i in (1..8).rev() {
                atoms.swap(i, rng.gen_range(0..=i));
            }
            let labels: Vec<IndexSet> = IndexSet::all(k).collect();
            let d = IndexedAntichain::new(&p8, k, labels.iter().enumerate().map(|(m, &s)| (s, p8.atom(atoms[m]))).collect()).unwrap();
            let all = (0..1 << k).map(|_| p8.from_bits((rng.gen::<u64>() & 0xff) | 1 << atoms[(1 << k) - 1]));
            let a = Distribution::from_fn(&p8, k, |_| p8.one()).unwrap();
            let noise: Vec<Elem> = all.collect();
            let a = Distribution::from_fn(&p8, k, |s| if s.is_empty() { p8.one() } else { s.subsets().filter(|t| !t.is_empty()).fold(a.get(s), |acc, t| acc & noise[t.0 as usize]) }).unwrap();
            // d_I shares an atom with every value, so the filter of A(I) stays compatible
            let e = PrincipalFilter::principal(&p8, a.get(a.index())).unwrap();
            let (b, _) = refinement_step(&e, &d, &a).unwrap();
            for s in a.index().subsets().filter(|s| !s.is_empty()) {
                let meet = s.iter().fold(p8.one(), |acc, i| acc & b.singleton(i));
                for e in meet.atoms() {
                    let ts: Vec<IndexSet> = s.iter().map(|i| labels.iter().copied().find(|&t| t.contains(i) && (a.get(t) & d.get(t).unwrap()).contains_atom(e)).unwrap()).collect();
                    assert!(ts.windows(2).all(|w| w[0] == w[1]));
                    assert!(s.is_subset(ts[0]) && b.get(s).contains_atom(e));
                }
            }
        }
    }

    #[test]
    fn spending_a_reserve_antichain() {
        let (alg, fam) = make_independent_family(3, 2, 16).unwrap();
        let p2 = BoolAlg::new(2).unwrap();
        let s = GoodPairState::new(&alg, &p2, vec![(alg.one(), p2.one())], fam, PrincipalFilter::trivial(&alg)).unwrap();
        let a = Distribution::constant(&alg, 1, alg.one()).unwrap();
        let (b, next) = s.apply_refinement(0, &a).unwrap();
        assert!(b.is_multiplicative() && next.reserve.len() == 2);
        assert!(next.filter.contains(b.singleton(0)));
    }
}
