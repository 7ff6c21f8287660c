//! Boolean-valued evaluation.
//!
//! [`RecursiveEngine`] works from atomic tables only: complement, meet, and a join
//! over every element for `∃`. [`CoordEngine`] is specific to bundles: atom `e`
//! belongs to the value iff fiber `e` satisfies the formula with each parameter
//! replaced by its `e`-coordinate and quantifiers ranging over the element set's
//! `e`-projection. The two share no code beyond compilation.

use super::{bundle_to_abstract, check_params, Abstract, BValuedStructure, Bundle, BvError, Result};
use crate::algebra::Elem;
use crate::logic::{compile, CFormula, CTerm, Formula, Term};

/// Deliberate faults for exercising the suite. Not for real use.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mutation {
    #[default]
    None,
    /// Negation also toggles the last atom.
    NegationTogglesLastAtom,
}

pub struct RecursiveEngine {
    abs: Abstract,
    full: u64,
    mutation: Mutation,
    crisp_consts: Vec<Option<usize>>,
    /// `Some(table)` when every `||f(ā) = ·||` row is the equality row of one element.
    crisp_funcs: Vec<Option<Vec<usize>>>,
}

enum TermValue {
    /// `||t = b|| = ||a = b||`.
    Crisp(usize),
    /// `||t = b||` for every `b`.
    Fuzzy(Vec<u64>),
}

impl TermValue {
    fn support(&self, full: u64) -> Vec<(usize, u64)> {
        match self {
            TermValue::Crisp(a) => vec![(*a, full)],
            TermValue::Fuzzy(v) => v.iter().enumerate().filter(|(_, &w)| w != 0).map(|(b, &w)| (b, w)).collect(),
        }
    }
}

/// Calls `visit(tuple, weight)` for every combination drawn from `supports`,
/// where weight is the meet of the chosen weights. Zero weights are pruned.
fn combos(supports: &[Vec<(usize, u64)>], full: u64, visit: &mut dyn FnMut(&[usize], u64)) {
    fn go(supports: &[Vec<(usize, u64)>], i: usize, tuple: &mut Vec<usize>, w: u64, visit: &mut dyn FnMut(&[usize], u64)) {
        if i == supports.len() {
            visit(tuple, w);
            return;
        }
        for &(a, x) in &supports[i] {
            let w2 = w & x;
            if w2 != 0 {
                tuple.push(a);
                go(supports, i + 1, tuple, w2, visit);
                tuple.pop();
            }
        }
    }
    go(supports, 0, &mut Vec::new(), full, visit)
}

impl RecursiveEngine {
    pub fn new(m: &BValuedStructure) -> RecursiveEngine {
        match m {
            BValuedStructure::Bundle(b) => RecursiveEngine::from_abstract(bundle_to_abstract(b)),
            BValuedStructure::Abstract(a) => RecursiveEngine::from_abstract(a.clone()),
        }
    }

    pub fn from_abstract(abs: Abstract) -> RecursiveEngine {
        let full = abs.alg.one().bits();
        let n = abs.len;
        let row_is_eq = |row: &[Elem], a: usize| (0..n).all(|b| row[b] == abs.eq[a * n + b]);
        let crisp_consts = abs
            .consts
            .iter()
            .map(|row| (0..n).find(|&a| row[a].is_one()).filter(|&a| row_is_eq(row, a)))
            .collect();
        let crisp_funcs = abs
            .funcs
            .iter()
            .map(|table| {
                table
                    .chunks(n)
                    .map(|row| (0..n).find(|&b| row[b].is_one()).filter(|&b| row_is_eq(row, b)))
                    .collect::<Option<Vec<usize>>>()
            })
            .collect();
        RecursiveEngine { abs, full, mutation: Mutation::None, crisp_consts, crisp_funcs }
    }

    #[doc(hidden)]
    pub fn with_mutation(mut self, mutation: Mutation) -> RecursiveEngine {
        self.mutation = mutation;
        self
    }

    pub fn structure(&self) -> &Abstract {
        &self.abs
    }

    /// `||φ(params)||` for a formula whose only free symbols are parameters.
    pub fn eval(&self, phi: &Formula, params: &[usize]) -> Result<Elem> {
        let c = compile_sentence(phi, &self.abs.sig, params, self.abs.len)?;
        let mut env = vec![0; c.slots.max(1)];
        Ok(self.eval_compiled(&c.formula, &mut env, params))
    }

    pub fn eval_compiled(&self, phi: &CFormula, env: &mut [usize], params: &[usize]) -> Elem {
        self.abs.alg.from_bits(self.value(phi, env, params))
    }

    fn neg(&self, x: u64) -> u64 {
        let v = !x & self.full;
        match self.mutation {
            Mutation::None => v,
            Mutation::NegationTogglesLastAtom => v ^ (1u64 << (self.abs.alg.atom_count() - 1)),
        }
    }

    fn term(&self, t: &CTerm, env: &[usize], params: &[usize]) -> TermValue {
        let n = self.abs.len;
        match t {
            CTerm::Var(s) => TermValue::Crisp(env[*s]),
            CTerm::Param(k) => TermValue::Crisp(params[*k]),
            CTerm::Const(c) => match self.crisp_consts[*c] {
                Some(a) => TermValue::Crisp(a),
                None => TermValue::Fuzzy(self.abs.consts[*c].iter().map(|e| e.bits()).collect()),
            },
            CTerm::App(f, args) => {
                let vals: Vec<TermValue> = args.iter().map(|a| self.term(a, env, params)).collect();
                if let Some(table) = &self.crisp_funcs[*f] {
                    let crisp: Option<Vec<usize>> =
                        vals.iter().map(|v| if let TermValue::Crisp(a) = v { Some(*a) } else { None }).collect();
                    if let Some(args) = crisp {
                        return TermValue::Crisp(table[crate::finder::tuple_index(&args, n)]);
                    }
                }
                let supports: Vec<_> = vals.iter().map(|v| v.support(self.full)).collect();
                let mut out = vec![0u64; n];
                let table = &self.abs.funcs[*f];
                combos(&supports, self.full, &mut |tuple, w| {
                    let base = crate::finder::tuple_index(tuple, n) * n;
                    for (b, slot) in out.iter_mut().enumerate() {
                        *slot |= w & table[base + b].bits();
                    }
                });
                TermValue::Fuzzy(out)
            }
        }
    }

    fn value(&self, phi: &CFormula, env: &mut [usize], params: &[usize]) -> u64 {
        let n = self.abs.len;
        match phi {
            CFormula::True => self.full,
            CFormula::False => 0,
            CFormula::Eq(a, b) => {
                let (x, y) = (self.term(a, env, params), self.term(b, env, params));
                if let (TermValue::Crisp(p), TermValue::Crisp(q)) = (&x, &y) {
                    return self.abs.eq[p * n + q].bits();
                }
                let mut acc = 0;
                combos(&[x.support(self.full), y.support(self.full)], self.full, &mut |t, w| {
                    acc |= w & self.abs.eq[t[0] * n + t[1]].bits();
                });
                acc
            }
            CFormula::Rel(r, args) => {
                let supports: Vec<_> = args.iter().map(|a| self.term(a, env, params).support(self.full)).collect();
                let table = &self.abs.rels[*r];
                let mut acc = 0;
                combos(&supports, self.full, &mut |t, w| {
                    acc |= w & table[crate::finder::tuple_index(t, n)].bits();
                });
                acc
            }
            CFormula::Not(f) => self.neg(self.value(f, env, params)),
            CFormula::And(a, b) => {
                let x = self.value(a, env, params);
                if x == 0 {
                    0
                } else {
                    x & self.value(b, env, params)
                }
            }
            CFormula::Or(a, b) => self.value(a, env, params) | self.value(b, env, params),
            CFormula::Implies(a, b) => self.neg(self.value(a, env, params)) | self.value(b, env, params),
            CFormula::Exists(slot, f) => self.join_over(*slot, f, env, params, false),
            CFormula::Forall(slot, f) => self.neg(self.join_over(*slot, f, env, params, true)),
        }
    }

    /// `⋁_a ||f(a)||`, or `⋁_a ¬||f(a)||` when `negate`.
    fn join_over(&self, slot: usize, f: &CFormula, env: &mut [usize], params: &[usize], negate: bool) -> u64 {
        let saved = env[slot];
        let mut acc = 0;
        for a in 0..self.abs.len {
            env[slot] = a;
            let v = self.value(f, env, params);
            acc |= if negate { self.neg(v) } else { v };
            if acc == self.full {
                break;
            }
        }
        env[slot] = saved;
        acc
    }
}

pub struct CoordEngine<'a> {
    bundle: &'a Bundle,
    ranges: Vec<Vec<usize>>,
}

impl<'a> CoordEngine<'a> {
    pub fn new(bundle: &'a Bundle) -> CoordEngine<'a> {
        let ranges = (0..bundle.alg.atom_count()).map(|e| bundle.projection(e)).collect();
        CoordEngine { bundle, ranges }
    }

    pub fn eval(&self, phi: &Formula, params: &[usize]) -> Result<Elem> {
        let c = compile_sentence(phi, &self.bundle.sig, params, self.bundle.len())?;
        Ok(self.eval_compiled(&c.formula, &vec![0; c.slots.max(1)], params))
    }

    /// `env` and `params` hold element indices.
    pub fn eval_compiled(&self, phi: &CFormula, env: &[usize], params: &[usize]) -> Elem {
        let mut bits = 0u64;
        for (e, fiber) in self.bundle.fibers.iter().enumerate() {
            let mut env_e: Vec<usize> = env.iter().map(|&a| self.bundle.elements[a][e]).collect();
            let params_e: Vec<usize> = params.iter().map(|&a| self.bundle.elements[a][e]).collect();
            if fiber.eval_over(phi, &mut env_e, &params_e, Some(&self.ranges[e])) {
                bits |= 1 << e;
            }
        }
        self.bundle.alg.from_bits(bits)
    }
}

pub(crate) fn compile_sentence(
    phi: &Formula,
    sig: &crate::logic::Signature,
    params: &[usize],
    len: usize,
) -> Result<crate::logic::Compiled> {
    check_params(params, len)?;
    let c = compile(phi, sig, &[])?;
    if c.param_count > params.len() {
        return Err(BvError::MissingParameter(c.param_count - 1));
    }
    Ok(c)
}

/// `||φ(params)||_M` by the recursive engine.
pub fn eval_bv(m: &BValuedStructure, phi: &Formula, params: &[usize]) -> Result<Elem> {
    RecursiveEngine::new(m).eval(phi, params)
}

/// `||φ(params)||_M` fiber by fiber.
pub fn eval_coordinatewise(m: &Bundle, phi: &Formula, params: &[usize]) -> Result<Elem> {
    CoordEngine::new(m).eval(phi, params)
}

/// `||∀x φ(x)||` together with `||φ(b)||` for every element `b`.
pub fn universal_value(m: &BValuedStructure, var: &str, phi: &Formula, params: &[usize]) -> Result<(Elem, Vec<Elem>)> {
    let engine = RecursiveEngine::new(m);
    let all = engine.eval(&Formula::forall(var, phi.clone()), params)?;
    let open = phi.substitute(var, &Term::Param(params.len()))?;
    let mut extended = params.to_vec();
    extended.push(0);
    let mut each = Vec::with_capacity(m.len());
    for b in 0..m.len() {
        *extended.last_mut().unwrap() = b;
        each.push(engine.eval(&open, &extended)?);
    }
    Ok((all, each))
}

#[cfg(test)]
mod tests {
    use super::super::gen::{random_bundle, rc_sig};
    use super::super::{fullness_check, make_bundle};
    use super::*;
    use crate::algebra::BoolAlg;
    use crate::finder::Structure;
    use crate::logic::{enumerate_formulas, parse_with, EnumConfig, Signature};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eval_examples() {
        let sig = Signature::new().with_relation("<", 2);
        let m0 = Structure::new(&sig, 2).unwrap().with_relation_tuples("<", &[&[0, 1]]).unwrap();
        let m1 = Structure::new(&sig, 2).unwrap();
        let p2 = BoolAlg::new(2).unwrap();
        let b = make_bundle(&p2, vec![m0, m1], None).unwrap();
        let a = b.index_of(&[0, 0]).unwrap();
        let c = b.index_of(&[1, 1]).unwrap();
        let m = BValuedStructure::from(b.clone());
        let lt = parse_with("#0 < #1", &sig).unwrap();
        assert_eq!(eval_bv(&m, &lt, &[a, c]).unwrap(), p2.atom(0));
        assert_eq!(eval_coordinatewise(&b, &lt, &[a, c]).unwrap(), p2.atom(0));
        assert!(eval_bv(&m, &parse_with("#0 = #0", &sig).unwrap(), &[a]).unwrap().is_one());
        assert_eq!(eval_bv(&m, &lt, &[a, 9]), Err(BvError::ForeignParameter { param: 9, len: 4 }));
    }

    #[test]
    fn negation_is_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sig = rc_sig();
        let p3 = BoolAlg::new(3).unwrap();
        let formulas = enumerate_formulas(&sig, &EnumConfig::sentences(1, vec![0, 1], 3)).unwrap();
        for _ in 0..100 {
            let b = random_bundle(&mut rng, &p3, &sig, 3);
            let phi = formulas.choose(&mut rng).unwrap();
            let params = [rng.gen_range(0..b.len()), rng.gen_range(0..b.len())];
            let m = BValuedStructure::from(b);
            let v = eval_bv(&m, phi, &params).unwrap();
            let nv = eval_bv(&m, &Formula::not(phi.clone()), &params).unwrap();
            assert_eq!(nv, !v);
        }
    }

    #[test]
    fn mutation_breaks_negation() {
        let sig = rc_sig();
        let m = Structure::new(&sig, 1).unwrap();
        let b = make_bundle(&BoolAlg::new(2).unwrap(), vec![m.clone(), m], None).unwrap();
        let engine = RecursiveEngine::new(&b.into()).with_mutation(Mutation::NegationTogglesLastAtom);
        let v = engine.eval(&parse_with("!R(c,c)", &sig).unwrap(), &[]).unwrap();
        assert_eq!(v.to_vec(), vec![0]);
    }

    /// The engines share nothing but compilation, so agreement on every
    /// rank-2 formula over two parameters is a real cross-check.
    #[test]
    fn engines_agree_on_random_bundles() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let sigs = [rc_sig(), Signature::new().with_relation("P", 1).with_function("f", 1)];
        for sig in &sigs {
            let formulas = enumerate_formulas(sig, &EnumConfig::sentences(2, vec![0, 1], 4)).unwrap();
            for trial in 0..12 {
                let alg = BoolAlg::new(1 + trial % 3).unwrap();
                let b = random_bundle(&mut rng, &alg, sig, 3);
                let coord = CoordEngine::new(&b);
                let rec = RecursiveEngine::new(&b.clone().into());
                for phi in formulas.iter().step_by(3) {
                    let params = [rng.gen_range(0..b.len()), rng.gen_range(0..b.len())];
                    assert_eq!(rec.eval(phi, &params).unwrap(), coord.eval(phi, &params).unwrap(), "{phi}");
                }
            }
        }
    }

    #[test]
    fn universal_value_is_attained_minimum_on_full_structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let sig = rc_sig();
        let phis = enumerate_formulas(
            &sig,
            &EnumConfig { free_vars: vec!["x".into()], ..EnumConfig::sentences(1, vec![0], 3) },
        )
        .unwrap();
        for _ in 0..10 {
            let alg = BoolAlg::new(2).unwrap();
            let fibers = (0..2).map(|_| super::super::gen::random_structure(&mut rng, &sig, 3)).collect();
            let m: BValuedStructure = make_bundle(&alg, fibers, None).unwrap().into();
            assert!(fullness_check(&m, &super::super::FormulaFamily::at_rank(1)).unwrap().full);
            for phi in phis.iter().filter(|f| f.free_vars().contains("x")).step_by(5) {
                let (all, each) = universal_value(&m, "x", phi, &[0]).unwrap();
                assert!(each.iter().all(|&v| all.leq(v)));
                assert!(each.contains(&all), "{phi}");
            }
        }
    }
}
