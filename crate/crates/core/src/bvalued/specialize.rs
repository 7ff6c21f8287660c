//! Specialization at an ultrafilter: the quotient by `||a = b|| ∈ U`.

use serde::{Deserialize, Serialize};

use super::elementary::{assignments, FormulaFamily};
use super::{BValuedStructure, BvError, RecursiveEngine, Result};
use crate::algebra::PrincipalFilter;
use crate::finder::{tuple_at, Structure};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Specialization {
    pub atom: usize,
    pub structure: Structure,
    /// Element index of `M` ↦ element of `structure`.
    pub projection: Vec<usize>,
}

pub fn specialize(m: &BValuedStructure, u: &PrincipalFilter) -> Result<Specialization> {
    let e = u.ultrafilter_atom().ok_or(BvError::NotUltrafilter)?;
    if u.generator().atom_count() != m.algebra().atom_count() {
        return Err(BvError::AlgebraMismatch);
    }
    match m {
        BValuedStructure::Bundle(b) => {
            let keep = b.projection(e);
            let structure = b.fibers()[e].restrict(&keep)?;
            let projection = b.elements().iter().map(|t| keep.binary_search(&t[e]).expect("projection covers")).collect();
            Ok(Specialization { atom: e, structure, projection })
        }
        BValuedStructure::Abstract(abs) => {
            let n = abs.len;
            let mut projection = vec![usize::MAX; n];
            let mut reps = Vec::new();
            for a in 0..n {
                if projection[a] == usize::MAX {
                    for b in a..n {
                        if abs.eq_value(a, b).contains_atom(e) {
                            projection[b] = reps.len();
                        }
                    }
                    reps.push(a);
                }
            }
            let k = reps.len();
            let mut s = Structure::new(&abs.sig, k)?;
            let unvalued = |what: &str| BvError::AxiomViolation { clause: 3, detail: format!("{what} has no value at atom {e}") };
            for (r, (_, arity)) in abs.sig.relations.iter().enumerate() {
                for i in 0..k.pow(*arity as u32) {
                    let t = tuple_at(i, *arity, k);
                    let orig: Vec<usize> = t.iter().map(|&j| reps[j]).collect();
                    s.set_relation(r, &t, abs.relation_value(r, &orig).contains_atom(e))?;
                }
            }
            for (c, name) in abs.sig.constants.iter().enumerate() {
                let a = (0..n).find(|&a| abs.constant_value(c, a).contains_atom(e)).ok_or_else(|| unvalued(name))?;
                s.set_constant(c, projection[a])?;
            }
            for (f, (name, arity)) in abs.sig.functions.iter().enumerate() {
                for i in 0..k.pow(*arity as u32) {
                    let t = tuple_at(i, *arity, k);
                    let orig: Vec<usize> = t.iter().map(|&j| reps[j]).collect();
                    let b = (0..n).find(|&b| abs.function_value(f, &orig, b).contains_atom(e)).ok_or_else(|| unvalued(name))?;
                    s.set_function(f, &t, projection[b])?;
                }
            }
            Ok(Specialization { atom: e, structure: s, projection })
        }
    }
}

/// First `(formula, params)` where `e ∈ ||φ(ā)||` and `spec ⊨ φ(πā)` disagree.
pub fn check_specialization(m: &BValuedStructure, spec: &Specialization, family: &FormulaFamily) -> Result<Option<(String, Vec<usize>)>> {
    Ok(check_specializations(m, std::slice::from_ref(spec), family)?.map(|(_, phi, ps)| (phi, ps)))
}

/// As [`check_specialization`] for several ultrafilters at once, evaluating
/// each instance once. A failure names the atom.
pub fn check_specializations(m: &BValuedStructure, specs: &[Specialization], family: &FormulaFamily) -> Result<Option<(usize, String, Vec<usize>)>> {
    let engine = RecursiveEngine::new(m);
    let pool: Vec<usize> = (0..m.len()).collect();
    let mut projected = Vec::new();
    for phi in family.sentences(m.signature())? {
        let c = crate::logic::compile(&phi, m.signature(), &[])?;
        let mut env = vec![0; c.slots.max(1)];
        for ps in assignments(&phi, family.params, &pool) {
            let value = engine.eval_compiled(&c.formula, &mut env, &ps);
            for spec in specs {
                projected.clear();
                projected.extend(ps.iter().map(|&a| spec.projection[a]));
                if value.contains_atom(spec.atom) != spec.structure.eval(&c.formula, &mut env, &projected) {
                    return Ok(Some((spec.atom, phi.to_string(), ps)));
                }
            }
        }
    }
    Ok(None)
}
