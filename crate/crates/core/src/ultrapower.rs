//! Boolean ultrapowers of finite structures.
//!
//! Over a finite algebra every partition of unity indexed by `M` is determined by
//! which element each atom lies under, so elements are stored canonically as
//! atom → `M` functions, ordered lexicographically (atom 0 most significant).
//! That is exactly the full product bundle of `n` copies of `M`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, Antichain, BoolAlg, Elem, PrincipalFilter};
use crate::bvalued::{
    check_elementary, make_bundle, specialize, BValuedStructure, Bundle, BvError, ElementaryReport, FormulaFamily,
};
use crate::finder::{tuple_at, FinderError, Structure};
use crate::logic::{compile, Formula, LogicError};

pub const DEFAULT_ELEMENT_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UltrapowerError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    BValued(#[from] BvError),
    #[error(transparent)]
    Finder(#[from] FinderError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("not a partition of unity: {0}")]
    NotPartition(String),
}

pub type Result<T, E = UltrapowerError> = std::result::Result<T, E>;

/// A map `M → B` whose values are pairwise disjoint and join to 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionElement {
    values: Vec<Elem>,
}

impl PartitionElement {
    pub fn new(alg: &BoolAlg, values: Vec<Elem>) -> Result<PartitionElement> {
        let mut seen = alg.zero();
        for (m, &v) in values.iter().enumerate() {
            if !alg.owns(v) {
                return Err(AlgebraError::MixedAlgebras(alg.atom_count(), v.atom_count()).into());
            }
            if !(seen & v).is_zero() {
                return Err(UltrapowerError::NotPartition(format!("value at {m} overlaps an earlier one")));
            }
            seen = seen | v;
        }
        if !seen.is_one() {
            return Err(UltrapowerError::NotPartition("values do not join to 1".into()));
        }
        Ok(PartitionElement { values })
    }

    /// `a(m) = {e : f(e) = m}`.
    pub fn from_function(alg: &BoolAlg, base_size: usize, f: &[usize]) -> Result<PartitionElement> {
        let mut values = vec![alg.zero(); base_size];
        for (e, &m) in f.iter().enumerate() {
            values[m] = values[m] | alg.atom(e);
        }
        PartitionElement::new(alg, values)
    }

    pub fn values(&self) -> &[Elem] {
        &self.values
    }

    /// The atom → `M` function.
    pub fn function(&self) -> Vec<usize> {
        let n = self.values.first().map_or(0, |v| v.atom_count());
        (0..n).map(|e| self.values.iter().position(|v| v.contains_atom(e)).expect("partition covers")).collect()
    }
}

/// A maximal antichain labelled by elements of `M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InversePartition {
    pub antichain: Antichain,
    pub labels: Vec<usize>,
}

impl InversePartition {
    pub fn new(antichain: Antichain, labels: Vec<usize>) -> Result<InversePartition> {
        if !antichain.is_maximal() {
            return Err(AlgebraError::NotMaximal(antichain.len()).into());
        }
        if labels.len() != antichain.len() {
            return Err(UltrapowerError::NotPartition("one label per block is needed".into()));
        }
        Ok(InversePartition { antichain, labels })
    }

    /// `a(m)` is the join of the blocks labelled `m`.
    pub fn to_partition(&self, alg: &BoolAlg, base_size: usize) -> Result<PartitionElement> {
        let mut values = vec![alg.zero(); base_size];
        for (&c, &m) in self.antichain.members().iter().zip(&self.labels) {
            if m >= base_size {
                return Err(FinderError::OutOfDomain { value: m, size: base_size }.into());
            }
            values[m] = values[m] | c;
        }
        PartitionElement::new(alg, values)
    }

    pub fn equivalent(&self, other: &InversePartition, alg: &BoolAlg, base_size: usize) -> Result<bool> {
        Ok(self.to_partition(alg, base_size)? == other.to_partition(alg, base_size)?)
    }
}

/// `M^B` as a bundle, with the base structure kept for the partition engines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ultrapower {
    base: Structure,
    bundle: Bundle,
}

pub fn boolean_ultrapower(m: &Structure, alg: &BoolAlg, cap: usize) -> Result<Ultrapower> {
    let n = alg.atom_count();
    let count = (m.size() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(AlgebraError::SizeOverflow { requested: count, cap }.into());
    }
    let bundle = make_bundle(alg, vec![m.clone(); n], None)?;
    Ok(Ultrapower { base: m.clone(), bundle })
}

impl Ultrapower {
    pub fn base(&self) -> &Structure {
        &self.base
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn algebra(&self) -> &BoolAlg {
        self.bundle.algebra()
    }

    pub fn len(&self) -> usize {
        self.bundle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bundle.is_empty()
    }

    pub fn as_structure(&self) -> BValuedStructure {
        self.bundle.clone().into()
    }

    pub fn element(&self, i: usize) -> &[usize] {
        &self.bundle.elements()[i]
    }

    pub fn index_of(&self, f: &[usize]) -> Option<usize> {
        // lexicographic order makes the index the base-|M| reading of f
        let s = self.base.size();
        (f.len() == self.algebra().atom_count() && f.iter().all(|&x| x < s)).then(|| f.iter().fold(0, |acc, &x| acc * s + x))
    }

    pub fn partition(&self, i: usize) -> PartitionElement {
        PartitionElement::from_function(self.algebra(), self.base.size(), self.element(i)).expect("atoms partition 1")
    }

    /// `⋁ { ⋀ a_i(m_i) : M ⊨ φ(m̄) }`, from the partitions alone.
    pub fn eval_partitions(&self, phi: &Formula, args: &[PartitionElement]) -> Result<Elem> {
        let alg = self.algebra();
        let c = compile(phi, self.base.signature(), &[])?;
        if c.param_count > args.len() {
            return Err(BvError::MissingParameter(c.param_count - 1).into());
        }
        let s = self.base.size();
        let k = args.len();
        let mut env = vec![0; c.slots.max(1)];
        let mut acc = alg.zero();
        for i in 0..s.pow(k as u32) {
            let t = tuple_at(i, k, s);
            let w = t.iter().zip(args).fold(alg.one(), |w, (&m, a)| w & a.values[m]);
            if !w.is_zero() && !w.leq(acc) && self.base.eval(&c.formula, &mut env, &t) {
                acc = acc | w;
            }
        }
        Ok(acc)
    }

    /// Same value, reading each argument through a labelled antichain and
    /// joining over the blocks of their common refinement.
    pub fn eval_inverse(&self, phi: &Formula, args: &[InversePartition]) -> Result<Elem> {
        let alg = self.algebra();
        let c = compile(phi, self.base.signature(), &[])?;
        if c.param_count > args.len() {
            return Err(BvError::MissingParameter(c.param_count - 1).into());
        }
        let mut env = vec![0; c.slots.max(1)];
        // blocks of the refinement, each with the labels it inherits
        let mut blocks: Vec<(Elem, Vec<usize>)> = vec![(alg.one(), Vec::new())];
        for ip in args {
            let mut next = Vec::new();
            for (d, labels) in &blocks {
                for (&c, &m) in ip.antichain.members().iter().zip(&ip.labels) {
                    let meet = *d & c;
                    if !meet.is_zero() {
                        let mut l = labels.clone();
                        l.push(m);
                        next.push((meet, l));
                    }
                }
            }
            blocks = next;
        }
        let mut acc = alg.zero();
        for (d, labels) in blocks {
            if self.base.eval(&c.formula, &mut env, &labels) {
                acc = acc | d;
            }
        }
        Ok(acc)
    }

    /// The pre-Łoś embedding: `m ↦` the constant function.
    pub fn pre_los(&self) -> Vec<usize> {
        let n = self.algebra().atom_count();
        (0..self.base.size()).map(|m| self.index_of(&vec![m; n]).expect("constant function")).collect()
    }
}

/// `M` as a B-valued structure with crisp values: only its diagonal elements.
pub fn crisp_copy(m: &Structure, alg: &BoolAlg) -> Result<BValuedStructure> {
    let n = alg.atom_count();
    let diagonal = (0..m.size()).map(|a| vec![a; n]).collect();
    Ok(make_bundle(alg, vec![m.clone(); n], Some(diagonal))?.into())
}

/// Checks `i : M → M^B` elementary over the family.
pub fn check_pre_los(up: &Ultrapower, family: &FormulaFamily) -> Result<ElementaryReport> {
    let source = crisp_copy(&up.base, up.algebra())?;
    let map: Vec<(usize, usize)> = up.pre_los().into_iter().enumerate().collect();
    Ok(check_elementary(&map, &source, &up.as_structure(), family)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LosReport {
    pub atom: usize,
    /// `j(m)`, as an element of the quotient `M^B/U`.
    pub j: Vec<usize>,
    /// Element of `M^B` ↦ its class in the quotient.
    pub quotient_map: Vec<usize>,
    /// Class ↦ element of `M`; an isomorphism of the quotient onto `M`.
    pub isomorphism: Vec<usize>,
    pub isomorphism_verified: bool,
    pub elementary: ElementaryReport,
}

/// `j = π_U ∘ i`, checked elementary, with the quotient identified with `M`.
pub fn los_check(up: &Ultrapower, u: &PrincipalFilter, family: &FormulaFamily) -> Result<LosReport> {
    let spec = specialize(&up.as_structure(), u)?;
    let j: Vec<usize> = up.pre_los().iter().map(|&x| spec.projection[x]).collect();
    let trivial = BoolAlg::trivial();
    let source = crisp_copy(&up.base, &trivial)?;
    let target: BValuedStructure = make_bundle(&trivial, vec![spec.structure.clone()], None)?.into();
    let map: Vec<(usize, usize)> = j.iter().copied().enumerate().collect();
    let elementary = check_elementary(&map, &source, &target, family)?;
    // class of x ↦ x_e
    let mut isomorphism = vec![usize::MAX; spec.structure.size()];
    for (x, &class) in spec.projection.iter().enumerate() {
        isomorphism[class] = up.element(x)[spec.atom];
    }
    let isomorphism_verified = spec.structure.is_isomorphism(&up.base, &isomorphism);
    Ok(LosReport { atom: spec.atom, j, quotient_map: spec.projection, isomorphism, isomorphism_verified, elementary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvalued::{eval_bv, fullness_check};
    use crate::logic::{enumerate_formulas, parse_with, EnumConfig, Signature};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rc_sig() -> Signature {
        Signature::new().with_relation("R", 2).with_constant("c")
    }

    fn random_structure(rng: &mut ChaCha8Rng, sig: &Signature, size: usize) -> Structure {
        let mut m = Structure::new(sig, size).unwrap();
        for i in 0..size * size {
            m.set_relation(0, &tuple_at(i, 2, size), rng.gen_bool(0.5)).unwrap();
        }
        m.set_constant(0, rng.gen_range(0..size)).unwrap();
        m
    }

    #[test]
    fn ultrapower_sizes() {
        let sig = rc_sig();
        let m = Structure::new(&sig, 2).unwrap();
        assert_eq!(boolean_ultrapower(&m, &BoolAlg::new(2).unwrap(), DEFAULT_ELEMENT_CAP).unwrap().len(), 4);
        let up = boolean_ultrapower(&m, &BoolAlg::trivial(), DEFAULT_ELEMENT_CAP).unwrap();
        assert_eq!(up.bundle().fibers()[0], m);
        assert_eq!(up.len(), 2);
        assert!(matches!(
            boolean_ultrapower(&m, &BoolAlg::new(13).unwrap(), DEFAULT_ELEMENT_CAP),
            Err(UltrapowerError::Algebra(AlgebraError::SizeOverflow { requested: 8192, .. }))
        ));
    }

    #[test]
    fn partition_formula_matches_coordinatewise_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let sig = rc_sig();
        let formulas = enumerate_formulas(&sig, &EnumConfig::sentences(2, vec![0, 1], 4)).unwrap();
        for trial in 0..200 {
            let m = random_structure(&mut rng, &sig, 2 + trial % 2);
            let alg = BoolAlg::new(1 + trial % 3).unwrap();
            let up = boolean_ultrapower(&m, &alg, DEFAULT_ELEMENT_CAP).unwrap();
            let phi = formulas.choose(&mut rng).unwrap();
            let params = [rng.gen_range(0..up.len()), rng.gen_range(0..up.len())];
            let parts: Vec<_> = params.iter().map(|&p| up.partition(p)).collect();
            assert_eq!(up.eval_partitions(phi, &parts).unwrap(), eval_bv(&up.as_structure(), phi, &params).unwrap(), "{phi}");
        }
    }

    #[test]
    fn dummy_parameters_do_not_change_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let sig = rc_sig();
        let m = random_structure(&mut rng, &sig, 3);
        let up = boolean_ultrapower(&m, &BoolAlg::new(2).unwrap(), DEFAULT_ELEMENT_CAP).unwrap();
        let phi = parse_with("exists x. R(x,#0)", &sig).unwrap();
        for a in 0..up.len() {
            let base = up.eval_partitions(&phi, &[up.partition(a)]).unwrap();
            for d in 0..up.len() {
                assert_eq!(up.eval_partitions(&phi, &[up.partition(a), up.partition(d)]).unwrap(), base);
            }
        }
    }

    #[test]
    fn pre_los_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let sig = rc_sig();
        let m = random_structure(&mut rng, &sig, 3);
        let alg = BoolAlg::new(2).unwrap();
        let up = boolean_ultrapower(&m, &alg, DEFAULT_ELEMENT_CAP).unwrap();
        let i = up.pre_los();
        let mut sorted = i.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 3);
        let atomic = parse_with("R(#0,#1)", &sig).unwrap();
        let bv = up.as_structure();
        for a in 0..3 {
            for b in 0..3 {
                let v = eval_bv(&bv, &atomic, &[i[a], i[b]]).unwrap();
                assert!(v.is_zero() || v.is_one());
                assert_eq!(v.is_one(), m.relation_holds(0, &[a, b]));
            }
        }
    }

    /// Fullness of `M^B` and elementarity of `i` over the small instance family.
    #[test]
    fn ultrapowers_are_full_and_pre_los_elementary() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        let sig = rc_sig();
        let family = FormulaFamily { rank: 2, params: 1, max_size: 4, max_count: 1_000_000 };
        for size in 1..=3 {
            for atoms in 1..=2 {
                let m = random_structure(&mut rng, &sig, size);
                let up = boolean_ultrapower(&m, &BoolAlg::new(atoms).unwrap(), DEFAULT_ELEMENT_CAP).unwrap();
                assert!(fullness_check(&up.as_structure(), &family).unwrap().full);
                assert!(check_pre_los(&up, &family).unwrap().elementary);
            }
        }
    }

    #[test]
    fn inverse_partition_examples() {
        let alg = BoolAlg::new(3).unwrap();
        let sig = rc_sig();
        let m = Structure::new(&sig, 2).unwrap();
        let up = boolean_ultrapower(&m, &alg, DEFAULT_ELEMENT_CAP).unwrap();
        let atoms = InversePartition::new(Antichain::atoms(&alg), vec![1, 1, 1]).unwrap();
        assert_eq!(atoms.to_partition(&alg, 2).unwrap(), up.partition(up.pre_los()[1]));
        let single = InversePartition::new(Antichain::new(&alg, vec![alg.one()]).unwrap(), vec![1]).unwrap();
        assert_eq!(single.to_partition(&alg, 2).unwrap(), up.partition(up.pre_los()[1]));
        // {e0,e1} ↦ 0, {e2} ↦ 1 refines to the atom labelling (0,0,1)
        let coarse = InversePartition::new(Antichain::new(&alg, vec![alg.elem(&[0, 1]).unwrap(), alg.atom(2)]).unwrap(), vec![0, 1]).unwrap();
        let fine = InversePartition::new(Antichain::atoms(&alg), vec![0, 0, 1]).unwrap();
        assert!(coarse.equivalent(&fine, &alg, 2).unwrap());
        assert!(!coarse.equivalent(&atoms, &alg, 2).unwrap());
        let partial = Antichain::new(&alg, vec![alg.atom(0)]).unwrap();
        assert!(matches!(InversePartition::new(partial, vec![0]), Err(UltrapowerError::Algebra(AlgebraError::NotMaximal(_)))));
    }

    /// Random labelled antichains: refinement-based evaluation agrees with
    /// evaluation of the converted partitions.
    #[test]
    fn inverse_evaluation_is_refinement_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        let sig = rc_sig();
        let alg = BoolAlg::new(3).unwrap();
        let formulas = enumerate_formulas(&sig, &EnumConfig::sentences(1, vec![0, 1], 3)).unwrap();
        let random_ip = |rng: &mut ChaCha8Rng| {
            // random set partition of the atoms
            let blocks_of: Vec<usize> = (0..3).map(|_| rng.gen_range(0..3)).collect();
            let mut members = Vec::new();
            for b in 0..3 {
                let atoms: Vec<usize> = (0..3).filter(|&e| blocks_of[e] == b).collect();
                if !atoms.is_empty() {
                    members.push(alg.elem(&atoms).unwrap());
                }
            }
            let labels = members.iter().map(|_| rng.gen_range(0..3)).collect();
            InversePartition::new(Antichain::new(&alg, members).unwrap(), labels).unwrap()
        };
        for _ in 0..100 {
            let m = random_structure(&mut rng, &sig, 3);
            let up = boolean_ultrapower(&m, &alg, DEFAULT_ELEMENT_CAP).unwrap();
            let ips = [random_ip(&mut rng), random_ip(&mut rng)];
            let parts: Vec<_> = ips.iter().map(|ip| ip.to_partition(&alg, 3).unwrap()).collect();
            let phi = formulas.choose(&mut rng).unwrap();
            assert_eq!(up.eval_inverse(phi, &ips).unwrap(), up.eval_partitions(phi, &parts).unwrap());
        }
    }

    #[test]
    fn los_examples() {
        let sig = Signature::new().with_relation("<", 2);
        let m = Structure::new(&sig, 2).unwrap().with_relation_tuples("<", &[&[0, 1]]).unwrap();
        let alg = BoolAlg::new(2).unwrap();
        let up = boolean_ultrapower(&m, &alg, DEFAULT_ELEMENT_CAP).unwrap();
        let r = los_check(&up, &PrincipalFilter::ultrafilter_from_atom(&alg, 1).unwrap(), &FormulaFamily::at_rank(2)).unwrap();
        assert!(r.isomorphism_verified && r.elementary.elementary);
        // the quotient map is projection to coordinate 1
        for x in 0..up.len() {
            assert_eq!(r.isomorphism[r.quotient_map[x]], up.element(x)[1]);
        }
        let one = BoolAlg::trivial();
        let up1 = boolean_ultrapower(&m, &one, DEFAULT_ELEMENT_CAP).unwrap();
        let r1 = los_check(&up1, &PrincipalFilter::ultrafilter_from_atom(&one, 0).unwrap(), &FormulaFamily::at_rank(2)).unwrap();
        assert_eq!(r1.j, vec![0, 1]);
        assert!(r1.isomorphism_verified && r1.elementary.elementary);
    }
}
