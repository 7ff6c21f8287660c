//! Rank-bounded fullness: every `||∃x φ(x)||` is attained by one element.

use serde::{Deserialize, Serialize};

use super::elementary::{assignments, FormulaFamily};
use super::{BValuedStructure, RecursiveEngine, Result};
use crate::logic::compile;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullnessCounterexample {
    /// `φ(x)`, with `x` free.
    pub formula: String,
    pub params: Vec<usize>,
    pub exists_value: Vec<usize>,
    /// The value of some element whose value has the most atoms.
    pub best_value: Vec<usize>,
    pub best_element: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullnessReport {
    pub full: bool,
    pub rank: usize,
    pub formulas_checked: usize,
    pub counterexample: Option<FullnessCounterexample>,
}

pub fn fullness_check(m: &BValuedStructure, family: &FormulaFamily) -> Result<FullnessReport> {
    let engine = RecursiveEngine::new(m);
    let sig = m.signature();
    let pool: Vec<usize> = (0..m.len()).collect();
    let formulas = family.with_free(sig, "x")?;
    for (i, phi) in formulas.iter().enumerate() {
        let c = compile(phi, sig, &["x".to_string()])?;
        let mut env = vec![0; c.slots.max(1)];
        for ps in assignments(phi, family.params, &pool) {
            let values: Vec<_> = pool
                .iter()
                .map(|&a| {
                    env[0] = a;
                    engine.eval_compiled(&c.formula, &mut env, &ps)
                })
                .collect();
            let join = values.iter().fold(m.algebra().zero(), |acc, &v| acc | v);
            if !values.contains(&join) {
                let best = (0..values.len()).max_by_key(|&a| (values[a].count(), std::cmp::Reverse(a))).unwrap_or(0);
                let cx = FullnessCounterexample {
                    formula: phi.to_string(),
                    params: ps,
                    exists_value: join.to_vec(),
                    best_value: values[best].to_vec(),
                    best_element: best,
                };
                return Ok(FullnessReport { full: false, rank: family.rank, formulas_checked: i + 1, counterexample: Some(cx) });
            }
        }
    }
    Ok(FullnessReport { full: true, rank: family.rank, formulas_checked: formulas.len(), counterexample: None })
}
