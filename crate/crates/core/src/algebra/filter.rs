//! Principal filters and quotients `B/D`.
//!
//! On a finite algebra every filter is principal, so a filter is stored by its
//! generator `d` (the meet of its members).

use serde::{Deserialize, Serialize};

use super::{AlgebraError, BoolAlg, Elem, LatticeTerm, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrincipalFilter {
    generator: Elem,
}

impl PrincipalFilter {
    /// The filter generated by `gens`, or `NoFip` when their meet is 0.
    pub fn generated_by(alg: &BoolAlg, gens: &[Elem]) -> Result<PrincipalFilter> {
        let d = alg.big_meet(gens.iter().copied())?;
        if d.is_zero() {
            return Err(AlgebraError::NoFip);
        }
        Ok(PrincipalFilter { generator: d })
    }

    pub fn principal(alg: &BoolAlg, d: Elem) -> Result<PrincipalFilter> {
        PrincipalFilter::generated_by(alg, &[d])
    }

    pub fn trivial(alg: &BoolAlg) -> PrincipalFilter {
        PrincipalFilter { generator: alg.one() }
    }

    pub fn ultrafilter_from_atom(alg: &BoolAlg, i: usize) -> Result<PrincipalFilter> {
        if i >= alg.atom_count() {
            return Err(AlgebraError::AtomOutOfRange { atom: i, n: alg.atom_count() });
        }
        Ok(PrincipalFilter { generator: alg.atom(i) })
    }

    /// Every filter on `alg`, ordered by generator bitmask.
    pub fn all(alg: &BoolAlg) -> Vec<PrincipalFilter> {
        alg.elements()
            .filter(|e| !e.is_zero())
            .map(|generator| PrincipalFilter { generator })
            .collect()
    }

    pub fn generator(&self) -> Elem {
        self.generator
    }

    pub fn contains(&self, a: Elem) -> bool {
        self.generator.leq(a)
    }

    pub fn is_ultrafilter(&self) -> bool {
        self.generator.is_atom()
    }

    /// The atom generating an ultrafilter.
    pub fn ultrafilter_atom(&self) -> Option<usize> {
        if self.is_ultrafilter() {
            self.generator.atoms().next()
        } else {
            None
        }
    }

    /// The filter generated by `self ∪ {a}`.
    pub fn extend(&self, a: Elem) -> Result<PrincipalFilter> {
        let d = self.generator & a;
        if d.is_zero() {
            return Err(AlgebraError::NoFip);
        }
        Ok(PrincipalFilter { generator: d })
    }

    /// `a =_D b`, i.e. `¬(a △ b) ∈ D`.
    pub fn equiv(&self, a: Elem, b: Elem) -> bool {
        self.contains(!a.symmetric_difference(b))
    }
}

/// `B/D`, realized as the powerset of the atoms below `d`.
///
/// Quotient atom `k` is the `k`-th atom of `d` in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    source: BoolAlg,
    target: BoolAlg,
    filter: PrincipalFilter,
    kept: Vec<usize>,
}

impl Quotient {
    pub fn new(source: &BoolAlg, filter: PrincipalFilter) -> Quotient {
        let kept = filter.generator().to_vec();
        let target = BoolAlg::new(kept.len()).expect("generator is nonzero");
        Quotient { source: source.clone(), target, filter, kept }
    }

    pub fn source(&self) -> &BoolAlg {
        &self.source
    }

    pub fn target(&self) -> &BoolAlg {
        &self.target
    }

    pub fn filter(&self) -> PrincipalFilter {
        self.filter
    }

    /// Source atoms below the generator, indexed by quotient atom.
    pub fn kept_atoms(&self) -> &[usize] {
        &self.kept
    }

    /// `a ↦ a ∧ d`, re-indexed onto the quotient atoms.
    pub fn project(&self, a: Elem) -> Elem {
        let bits = self
            .kept
            .iter()
            .enumerate()
            .filter(|(_, &src)| a.contains_atom(src))
            .fold(0u64, |acc, (k, _)| acc | 1 << k);
        self.target.from_bits(bits)
    }

    /// The least source element projecting to `q`.
    pub fn lift(&self, q: Elem) -> Elem {
        let bits = q.atoms().fold(0u64, |acc, k| acc | 1 << self.kept[k]);
        self.source.from_bits(bits)
    }

    pub fn equiv(&self, a: Elem, b: Elem) -> bool {
        self.project(a) == self.project(b)
    }

    /// Whether `φ(a_0/D, ..)` holds in `B/D`.
    pub fn holds_mod(&self, phi: &LatticeFormula, args: &[Elem]) -> bool {
        let projected: Vec<Elem> = args.iter().map(|&a| self.project(a)).collect();
        phi.holds(&self.target, &projected)
    }
}

/// Quantifier-free formulas of the language of Boolean algebras.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeFormula {
    Eq(LatticeTerm, LatticeTerm),
    Leq(LatticeTerm, LatticeTerm),
    Not(Box<LatticeFormula>),
    And(Box<LatticeFormula>, Box<LatticeFormula>),
    Or(Box<LatticeFormula>, Box<LatticeFormula>),
}

impl LatticeFormula {
    pub fn holds(&self, alg: &BoolAlg, args: &[Elem]) -> bool {
        match self {
            LatticeFormula::Eq(a, b) => a.eval(alg, args) == b.eval(alg, args),
            LatticeFormula::Leq(a, b) => a.eval(alg, args).leq(b.eval(alg, args)),
            LatticeFormula::Not(f) => !f.holds(alg, args),
            LatticeFormula::And(f, g) => f.holds(alg, args) && g.holds(alg, args),
            LatticeFormula::Or(f, g) => f.holds(alg, args) || g.holds(alg, args),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_examples() {
        let b = BoolAlg::new(3).unwrap();
        let e = |v: &[usize]| b.elem(v).unwrap();
        let f = PrincipalFilter::generated_by(&b, &[e(&[0, 1]), e(&[1, 2])]).unwrap();
        assert_eq!(f.generator(), e(&[1]));
        assert!(f.is_ultrafilter());
        assert_eq!(PrincipalFilter::generated_by(&b, &[e(&[0]), e(&[1])]), Err(AlgebraError::NoFip));
        let t = PrincipalFilter::generated_by(&b, &[b.one()]).unwrap();
        assert!(!t.is_ultrafilter());
        assert!(t.contains(b.one()) && !t.contains(e(&[0, 1])));
        assert_eq!(PrincipalFilter::ultrafilter_from_atom(&b, 2).unwrap().ultrafilter_atom(), Some(2));
    }

    #[test]
    fn quotient_examples() {
        let b = BoolAlg::new(3).unwrap();
        let e = |v: &[usize]| b.elem(v).unwrap();
        let q = Quotient::new(&b, PrincipalFilter::principal(&b, e(&[0, 1])).unwrap());
        assert_eq!(q.target().atom_count(), 2);
        assert_eq!(q.project(e(&[0, 2])).to_vec(), vec![0]);
        assert!(q.equiv(e(&[0, 2]), e(&[0])));
        assert!(q.filter().equiv(e(&[0, 2]), e(&[0])));

        let id = Quotient::new(&b, PrincipalFilter::trivial(&b));
        for a in b.elements() {
            assert_eq!(id.project(a).bits(), a.bits());
        }
    }

    #[test]
    fn projection_is_surjective_hom_with_kernel_d() {
        let b = BoolAlg::new(4).unwrap();
        for f in PrincipalFilter::all(&b) {
            let q = Quotient::new(&b, f);
            let mut hit = vec![false; 1 << q.target().atom_count()];
            for x in b.elements() {
                hit[q.project(x).bits() as usize] = true;
                assert_eq!(q.project(!x), !q.project(x));
                assert_eq!(q.project(x).is_one(), f.contains(x));
                for y in b.elements() {
                    assert_eq!(q.project(x & y), q.project(x) & q.project(y));
                    assert_eq!(q.project(x | y), q.project(x) | q.project(y));
                    assert_eq!(q.equiv(x, y), f.equiv(x, y));
                }
            }
            assert!(hit.iter().all(|&h| h));
        }
    }

    #[test]
    fn holds_mod_matches_equivalence() {
        let b = BoolAlg::new(3).unwrap();
        let q = Quotient::new(&b, PrincipalFilter::principal(&b, b.elem(&[0, 1]).unwrap()).unwrap());
        let phi = LatticeFormula::Eq(LatticeTerm::var(0), LatticeTerm::var(1));
        for x in b.elements() {
            for y in b.elements() {
                assert_eq!(q.holds_mod(&phi, &[x, y]), q.equiv(x, y));
            }
        }
        let below = LatticeFormula::Leq(LatticeTerm::var(0), LatticeTerm::Zero);
        assert!(q.holds_mod(&below, &[b.elem(&[2]).unwrap()]));
    }
}
