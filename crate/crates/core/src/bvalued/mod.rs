//! Boolean-valued structures over finite algebras.
//!
//! Two representations are kept. A [`Bundle`] has one ordinary structure per atom
//! and elements that are atom-indexed tuples; truth is computed fiber by fiber. An
//! [`Abstract`] structure stores the Boolean values of atomic formulas directly.
//! Elements of either are addressed by index `0..len`.

mod amalgam;
mod compactness;
mod convert;
mod elementary;
mod eval;
mod full;
mod specialize;

pub use amalgam::{amalgamate_bounded, AmalgamResult};
pub use compactness::{compactness_check_and_synthesize, CompactnessResult, ValueConstraint};
pub use convert::{abstract_to_bundle, bundle_to_abstract, check_axioms};
pub(crate) use elementary::assignments;
pub use elementary::{check_elementary, ElementaryCounterexample, ElementaryReport, FormulaFamily};
pub use eval::{eval_bv, eval_coordinatewise, universal_value, CoordEngine, Mutation, RecursiveEngine};
pub use full::{fullness_check, FullnessCounterexample, FullnessReport};
pub use specialize::{check_specialization, check_specializations, specialize, Specialization};

use std::collections::HashSet;

use thiserror::Error;

use crate::algebra::{AlgebraError, BoolAlg, Elem};
use crate::finder::{tuple_at, FinderError, Structure};
use crate::logic::{LogicError, Signature};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BvError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Finder(#[from] FinderError),
    #[error("{fibers} fibers given for an algebra with {atoms} atoms")]
    FiberCountMismatch { fibers: usize, atoms: usize },
    #[error("fibers do not share one signature")]
    SignatureMismatch,
    #[error("invalid element tuple {0:?}")]
    InvalidTuple(Vec<usize>),
    #[error("structure has no elements")]
    NoElements,
    #[error("parameter {param} is not an element of a structure with {len} elements")]
    ForeignParameter { param: usize, len: usize },
    #[error("formula uses parameter #{0} but fewer were supplied")]
    MissingParameter(usize),
    #[error("axiom ({clause}) fails: {detail}")]
    AxiomViolation { clause: u8, detail: String },
    #[error("filter is not an ultrafilter")]
    NotUltrafilter,
    #[error("structures live over different algebras")]
    AlgebraMismatch,
    #[error("bad constraint: {0}")]
    BadConstraint(String),
    #[error("map is not elementary: {0}")]
    NotElementary(String),
    #[error("synthesized structure misses its bounds: {0}")]
    SynthesisFailed(String),
    #[error("bad table: {0}")]
    BadTable(String),
}

pub type Result<T, E = BvError> = std::result::Result<T, E>;

/// One ordinary structure per atom, with elements drawn from the product of fibers.
///
/// The element set is always closed under the coordinatewise interpretation of
/// constants and functions, so every fiber's projection is a substructure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bundle {
    alg: BoolAlg,
    sig: Signature,
    fibers: Vec<Structure>,
    elements: Vec<Vec<usize>>,
}

/// Atomic Boolean values stored in tables.
///
/// `eq` is `n × n`; `rels[r]` is indexed like a structure table over `n`
/// elements; `consts[c][a] = ||c = a||`; `funcs[f]` is indexed by the tuple
/// `(a_0, .., a_{k-1}, b)` and holds `||f(ā) = b||`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abstract {
    pub(crate) alg: BoolAlg,
    pub(crate) sig: Signature,
    pub(crate) len: usize,
    pub(crate) eq: Vec<Elem>,
    pub(crate) rels: Vec<Vec<Elem>>,
    pub(crate) consts: Vec<Vec<Elem>>,
    pub(crate) funcs: Vec<Vec<Elem>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BValuedStructure {
    Bundle(Bundle),
    Abstract(Abstract),
}

/// Every tuple of the product of `sizes`, first coordinate most significant.
pub fn product_tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &s in sizes {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..s).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Builds a bundle; `elements` defaults to the full product of the fibers.
pub fn make_bundle(alg: &BoolAlg, fibers: Vec<Structure>, elements: Option<Vec<Vec<usize>>>) -> Result<Bundle> {
    let n = alg.atom_count();
    if fibers.len() != n {
        return Err(BvError::FiberCountMismatch { fibers: fibers.len(), atoms: n });
    }
    let sig = fibers[0].signature().clone();
    if fibers.iter().any(|f| *f.signature() != sig) {
        return Err(BvError::SignatureMismatch);
    }
    let sizes: Vec<usize> = fibers.iter().map(|f| f.size()).collect();
    let given = elements.unwrap_or_else(|| product_tuples(&sizes));
    for t in &given {
        if t.len() != n || t.iter().zip(&sizes).any(|(a, s)| a >= s) {
            return Err(BvError::InvalidTuple(t.clone()));
        }
    }
    if given.is_empty() {
        return Err(BvError::NoElements);
    }
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut elements = Vec::new();
    for t in given {
        if seen.insert(t.clone()) {
            elements.push(t);
        }
    }
    close_under_signature(&sig, &fibers, &mut elements, &mut seen);
    Ok(Bundle { alg: alg.clone(), sig, fibers, elements })
}

/// Adds the coordinatewise values of constants and functions until closed.
fn close_under_signature(sig: &Signature, fibers: &[Structure], elements: &mut Vec<Vec<usize>>, seen: &mut HashSet<Vec<usize>>) {
    let mut add = |t: Vec<usize>, elements: &mut Vec<Vec<usize>>| {
        if seen.insert(t.clone()) {
            elements.push(t);
        }
    };
    for c in 0..sig.constants.len() {
        add(fibers.iter().map(|f| f.constant(c)).collect(), elements);
    }
    if sig.functions.is_empty() {
        return;
    }
    loop {
        let before = elements.len();
        for (f, (_, k)) in sig.functions.iter().enumerate() {
            let len = elements.len();
            for i in 0..len.pow(*k as u32) {
                let args: Vec<usize> = tuple_at(i, *k, len);
                let image: Vec<usize> = fibers
                    .iter()
                    .enumerate()
                    .map(|(e, m)| {
                        let coords: Vec<usize> = args.iter().map(|&a| elements[a][e]).collect();
                        m.apply(f, &coords)
                    })
                    .collect();
                add(image, elements);
            }
        }
        if elements.len() == before {
            break;
        }
    }
}

impl Bundle {
    pub fn algebra(&self) -> &BoolAlg {
        &self.alg
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn fibers(&self) -> &[Structure] {
        &self.fibers
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        self.elements.iter().position(|t| t == tuple)
    }

    /// Sorted coordinates of elements at atom `e`.
    pub fn projection(&self, e: usize) -> Vec<usize> {
        let mut p: Vec<usize> = self.elements.iter().map(|t| t[e]).collect();
        p.sort_unstable();
        p.dedup();
        p
    }

    pub fn is_full_product(&self) -> bool {
        self.elements.len() == self.fibers.iter().map(|f| f.size()).product::<usize>()
    }
}

impl Abstract {
    pub fn algebra(&self) -> &BoolAlg {
        &self.alg
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn eq_value(&self, a: usize, b: usize) -> Elem {
        self.eq[a * self.len + b]
    }

    pub fn relation_value(&self, r: usize, tuple: &[usize]) -> Elem {
        self.rels[r][crate::finder::tuple_index(tuple, self.len)]
    }

    pub fn constant_value(&self, c: usize, a: usize) -> Elem {
        self.consts[c][a]
    }

    pub fn function_value(&self, f: usize, args: &[usize], b: usize) -> Elem {
        self.funcs[f][crate::finder::tuple_index(args, self.len) * self.len + b]
    }

    /// A table with every value 0, except `||a = a|| = 1`.
    pub fn blank(alg: &BoolAlg, sig: &Signature, len: usize) -> Result<Abstract> {
        sig.validate()?;
        if len == 0 {
            return Err(BvError::NoElements);
        }
        let mut eq = vec![alg.zero(); len * len];
        for a in 0..len {
            eq[a * len + a] = alg.one();
        }
        Ok(Abstract {
            alg: alg.clone(),
            sig: sig.clone(),
            len,
            eq,
            rels: sig.relations.iter().map(|(_, k)| vec![alg.zero(); len.pow(*k as u32)]).collect(),
            consts: sig.constants.iter().map(|_| vec![alg.zero(); len]).collect(),
            funcs: sig.functions.iter().map(|(_, k)| vec![alg.zero(); len.pow(*k as u32 + 1)]).collect(),
        })
    }

    pub fn set_eq(&mut self, a: usize, b: usize, v: Elem) {
        self.eq[a * self.len + b] = v;
        self.eq[b * self.len + a] = v;
    }

    pub fn set_relation(&mut self, r: usize, tuple: &[usize], v: Elem) {
        let i = crate::finder::tuple_index(tuple, self.len);
        self.rels[r][i] = v;
    }

    pub fn set_constant(&mut self, c: usize, a: usize, v: Elem) {
        self.consts[c][a] = v;
    }

    pub fn set_function(&mut self, f: usize, args: &[usize], b: usize, v: Elem) {
        let i = crate::finder::tuple_index(args, self.len) * self.len + b;
        self.funcs[f][i] = v;
    }
}

impl BValuedStructure {
    pub fn algebra(&self) -> &BoolAlg {
        match self {
            BValuedStructure::Bundle(b) => &b.alg,
            BValuedStructure::Abstract(a) => &a.alg,
        }
    }

    pub fn signature(&self) -> &Signature {
        match self {
            BValuedStructure::Bundle(b) => &b.sig,
            BValuedStructure::Abstract(a) => &a.sig,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            BValuedStructure::Bundle(b) => b.len(),
            BValuedStructure::Abstract(a) => a.len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<Bundle> for BValuedStructure {
    fn from(b: Bundle) -> Self {
        BValuedStructure::Bundle(b)
    }
}

impl From<Abstract> for BValuedStructure {
    fn from(a: Abstract) -> Self {
        BValuedStructure::Abstract(a)
    }
}

pub(crate) fn check_params(params: &[usize], len: usize) -> Result<()> {
    match params.iter().find(|&&p| p >= len) {
        Some(&param) => Err(BvError::ForeignParameter { param, len }),
        None => Ok(()),
    }
}

/// Random instances for property checks and the verification suite.
pub mod gen {
    use super::*;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    /// `{R binary, c constant}`, the signature used by the evaluation checks.
    pub fn rc_sig() -> Signature {
        Signature::new().with_relation("R", 2).with_constant("c")
    }

    pub fn random_structure(rng: &mut ChaCha8Rng, sig: &Signature, max_size: usize) -> Structure {
        let size = rng.gen_range(1..=max_size);
        let mut m = Structure::new(sig, size).unwrap();
        for (r, (_, k)) in sig.relations.iter().enumerate() {
            for i in 0..size.pow(*k as u32) {
                m.set_relation(r, &tuple_at(i, *k, size), rng.gen_bool(0.5)).unwrap();
            }
        }
        for (f, (_, k)) in sig.functions.iter().enumerate() {
            for i in 0..size.pow(*k as u32) {
                m.set_function(f, &tuple_at(i, *k, size), rng.gen_range(0..size)).unwrap();
            }
        }
        for c in 0..sig.constants.len() {
            m.set_constant(c, rng.gen_range(0..size)).unwrap();
        }
        m
    }

    /// Random fibers and a random element set whose projections are onto.
    pub fn random_bundle(rng: &mut ChaCha8Rng, alg: &BoolAlg, sig: &Signature, max_size: usize) -> Bundle {
        let fibers: Vec<Structure> = (0..alg.atom_count()).map(|_| random_structure(rng, sig, max_size)).collect();
        let sizes: Vec<usize> = fibers.iter().map(|f| f.size()).collect();
        let all = product_tuples(&sizes);
        let mut elements: Vec<Vec<usize>> = all.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
        // one diagonal-ish element per fiber value keeps projections onto
        let widest = *sizes.iter().max().unwrap();
        for v in 0..widest {
            elements.push(sizes.iter().map(|&s| v.min(s - 1)).collect());
        }
        make_bundle(alg, fibers, Some(elements)).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_bundle_examples() {
        let sig = Signature::new().with_relation("<", 2);
        let m = Structure::new(&sig, 2).unwrap().with_relation_tuples("<", &[&[0, 1]]).unwrap();
        let p2 = BoolAlg::new(2).unwrap();
        let b = make_bundle(&p2, vec![m.clone(), m.clone()], None).unwrap();
        assert_eq!(b.len(), 4);
        assert!(b.is_full_product());
        let one = make_bundle(&BoolAlg::trivial(), vec![m.clone()], None).unwrap();
        assert_eq!(one.len(), 2);
        assert_eq!(
            make_bundle(&p2, vec![m.clone(), m.clone(), m.clone()], None),
            Err(BvError::FiberCountMismatch { fibers: 3, atoms: 2 })
        );
        assert_eq!(make_bundle(&p2, vec![m.clone(), m], Some(vec![vec![0, 2]])), Err(BvError::InvalidTuple(vec![0, 2])));
    }

    #[test]
    fn element_sets_close_under_constants_and_functions() {
        let sig = Signature::new().with_function("s", 1).with_constant("c");
        let mut m = Structure::new(&sig, 3).unwrap();
        for a in 0..3 {
            m.set_function(0, &[a], (a + 1) % 3).unwrap();
        }
        let p2 = BoolAlg::new(2).unwrap();
        let b = make_bundle(&p2, vec![m.clone(), m], Some(vec![vec![0, 1]])).unwrap();
        // (0,1) plus c = (0,0) and their successor orbits
        assert_eq!(b.len(), 6);
        assert_eq!(b.projection(0), vec![0, 1, 2]);
    }
}
