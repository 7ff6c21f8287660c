//! Value constraints decided atom by atom.
//!
//! Over a finite algebra, a full structure meeting `F0 ≤ ||γ(τ)|| ≤ F1` exists iff
//! for each atom `e` the theory plus `{γ : e ≤ F0(γ)}` plus `{¬γ : e ≰ F1(γ)}` has a
//! model, with the parameters read as new constants. The bounded version asks
//! the finder for each atom.

use super::{make_bundle, product_tuples, Bundle, BvError, RecursiveEngine, Result};
use crate::algebra::{BoolAlg, Elem};
use crate::finder::{find_model, FindResult, FinderTask, Structure};
use crate::logic::{Formula, Signature, Term, Theory};

/// Constraints on formulas over parameters `X`; `#k` in a formula stands for `names[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueConstraint {
    pub names: Vec<String>,
    pub gamma: Vec<Formula>,
    pub lower: Vec<Elem>,
    pub upper: Vec<Elem>,
}

impl ValueConstraint {
    pub fn validate(&self, alg: &BoolAlg) -> Result<()> {
        if self.gamma.len() != self.lower.len() || self.gamma.len() != self.upper.len() {
            return Err(BvError::BadConstraint("Γ, F0 and F1 differ in length".into()));
        }
        for (i, phi) in self.gamma.iter().enumerate() {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if !alg.owns(lo) || !alg.owns(hi) {
                return Err(BvError::AlgebraMismatch);
            }
            if !lo.leq(hi) {
                return Err(BvError::BadConstraint(format!("F0 ≰ F1 at {phi}")));
            }
            if !phi.free_vars().is_empty() {
                return Err(BvError::BadConstraint(format!("{phi} has free variables")));
            }
            if let Some(&k) = phi.params().iter().find(|&&k| k >= self.names.len()) {
                return Err(BvError::BadConstraint(format!("#{k} names no parameter")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompactnessResult {
    Synthesized {
        bundle: Bundle,
        /// Element of `bundle` assigned to each parameter.
        tau: Vec<usize>,
    },
    /// The task at this atom has no model within the bound.
    NoStructure { atom: usize },
    /// Some tasks ran out of budget and none was refuted.
    Unknown { atoms: Vec<usize> },
}

pub fn compactness_check_and_synthesize(
    alg: &BoolAlg,
    sig: &Signature,
    vc: &ValueConstraint,
    theory: &Theory,
    bound: usize,
    budget: u64,
) -> Result<CompactnessResult> {
    vc.validate(alg)?;
    let expanded = sig.extend_constants(&vc.names).map_err(|e| BvError::BadConstraint(e.to_string()))?;
    let as_constant = |phi: &Formula| phi.map_params(&|k| Term::Const(vc.names[k].clone()));
    let mut models: Vec<Structure> = Vec::new();
    let mut unknown = Vec::new();
    for e in 0..alg.atom_count() {
        let mut task = FinderTask::new(expanded.clone(), bound).with_axioms(theory.clone());
        task.budget = budget;
        for (i, phi) in vc.gamma.iter().enumerate() {
            if vc.lower[i].contains_atom(e) {
                task.positive.push(as_constant(phi));
            }
            if !vc.upper[i].contains_atom(e) {
                task.negative.push(as_constant(phi));
            }
        }
        match find_model(&task)? {
            FindResult::Found(m) => models.push(m),
            FindResult::NoModel => return Ok(CompactnessResult::NoStructure { atom: e }),
            FindResult::Unknown { .. } => unknown.push(e),
        }
    }
    if !unknown.is_empty() {
        return Ok(CompactnessResult::Unknown { atoms: unknown });
    }

    let fibers = models.iter().map(|m| m.reduct(sig)).collect::<std::result::Result<Vec<_>, _>>()?;
    let sizes: Vec<usize> = fibers.iter().map(|f| f.size()).collect();
    let bundle = make_bundle(alg, fibers, Some(product_tuples(&sizes)))?;
    let first = sig.constants.len();
    let tau: Vec<usize> = (0..vc.names.len())
        .map(|k| {
            let t: Vec<usize> = models.iter().map(|m| m.constant(first + k)).collect();
            bundle.index_of(&t).expect("full product")
        })
        .collect();
    let engine = RecursiveEngine::new(&bundle.clone().into());
    for (i, phi) in vc.gamma.iter().enumerate() {
        let v = engine.eval(phi, &tau)?;
        if !vc.lower[i].leq(v) || !v.leq(vc.upper[i]) {
            return Err(BvError::SynthesisFailed(format!("{phi} has value {v}")));
        }
    }
    Ok(CompactnessResult::Synthesized { bundle, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finder::DEFAULT_NODE_BUDGET;
    use crate::logic::{enumerate_formulas, parse_with, EnumConfig};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p_sig() -> Signature {
        Signature::new().with_relation("P", 1)
    }

    fn run(vc: &ValueConstraint, alg: &BoolAlg) -> Result<CompactnessResult> {
        compactness_check_and_synthesize(alg, &p_sig(), vc, &Theory::empty(), 3, DEFAULT_NODE_BUDGET)
    }

    #[test]
    fn single_atom_value_is_realized() {
        let p2 = BoolAlg::new(2).unwrap();
        let phi = parse_with("P(#0)", &p_sig()).unwrap();
        let vc = ValueConstraint { names: vec!["a".into()], gamma: vec![phi], lower: vec![p2.atom(0)], upper: vec![p2.atom(0)] };
        let CompactnessResult::Synthesized { bundle, tau } = run(&vc, &p2).unwrap() else { panic!() };
        let t = &bundle.elements()[tau[0]];
        assert!(bundle.fibers()[0].relation_holds(0, &[t[0]]));
        assert!(!bundle.fibers()[1].relation_holds(0, &[t[1]]));
    }

    #[test]
    fn contradiction_has_no_structure() {
        let p2 = BoolAlg::new(2).unwrap();
        let gamma = vec![parse_with("P(#0)", &p_sig()).unwrap(), parse_with("!P(#0)", &p_sig()).unwrap()];
        let vc = ValueConstraint { names: vec!["a".into()], gamma, lower: vec![p2.one(); 2], upper: vec![p2.one(); 2] };
        assert_eq!(run(&vc, &p2).unwrap(), CompactnessResult::NoStructure { atom: 0 });
    }

    #[test]
    fn inverted_bounds_are_rejected() {
        let p2 = BoolAlg::new(2).unwrap();
        let vc = ValueConstraint {
            names: vec!["a".into()],
            gamma: vec![parse_with("P(#0)", &p_sig()).unwrap()],
            lower: vec![p2.one()],
            upper: vec![p2.atom(0)],
        };
        assert!(matches!(run(&vc, &p2), Err(BvError::BadConstraint(_))));
    }

    /// Decided instances: synthesis succeeds exactly when every atom's task has a
    /// model, and the synthesized values then sit between the bounds.
    #[test]
    fn decided_instances_synthesize_iff_solvable() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let sig = Signature::new().with_relation("R", 2);
        let pool = enumerate_formulas(&sig, &EnumConfig::sentences(1, vec![0, 1], 3)).unwrap();
        let alg = BoolAlg::new(2).unwrap();
        let elems: Vec<Elem> = alg.elements().collect();
        for _ in 0..40 {
            let k = rng.gen_range(1..=3);
            let gamma: Vec<Formula> = pool.choose_multiple(&mut rng, k).cloned().collect();
            let lower: Vec<Elem> = (0..k).map(|_| *elems.choose(&mut rng).unwrap()).collect();
            let upper: Vec<Elem> = lower.iter().map(|&l| l | *elems.choose(&mut rng).unwrap()).collect();
            let vc = ValueConstraint { names: vec!["a".into(), "b".into()], gamma, lower, upper };
            let res = compactness_check_and_synthesize(&alg, &sig, &vc, &Theory::empty(), 2, DEFAULT_NODE_BUDGET).unwrap();
            let solvable = (0..2).all(|e| {
                let sig2 = sig.extend_constants(&vc.names).unwrap();
                let mut task = FinderTask::new(sig2, 2);
                for (i, phi) in vc.gamma.iter().enumerate() {
                    let phi = phi.map_params(&|k| Term::Const(vc.names[k].clone()));
                    if vc.lower[i].contains_atom(e) {
                        task.positive.push(phi.clone());
                    }
                    if !vc.upper[i].contains_atom(e) {
                        task.negative.push(phi);
                    }
                }
                find_model(&task).unwrap().is_found()
            });
            match res {
                CompactnessResult::Synthesized { bundle, tau } => {
                    assert!(solvable);
                    let engine = RecursiveEngine::new(&bundle.into());
                    for (i, phi) in vc.gamma.iter().enumerate() {
                        let v = engine.eval(phi, &tau).unwrap();
                        assert!(vc.lower[i].leq(v) && v.leq(vc.upper[i]));
                    }
                }
                CompactnessResult::NoStructure { .. } => assert!(!solvable),
                CompactnessResult::Unknown { .. } => panic!("tiny tasks are decided"),
            }
        }
    }
}
