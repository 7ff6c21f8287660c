//! Rank-bounded elementary map checking.

use serde::{Deserialize, Serialize};

use super::{check_params, BValuedStructure, BvError, RecursiveEngine, Result};
use crate::logic::{enumerate_formulas, EnumConfig, Formula, LogicError, Signature, Term};

/// Which formulas a rank-bounded check sweeps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaFamily {
    pub rank: usize,
    /// Parameters `#0 .. #params-1` may occur.
    pub params: usize,
    pub max_size: usize,
    pub max_count: usize,
}

impl Default for FormulaFamily {
    fn default() -> Self {
        FormulaFamily { rank: 2, params: 2, max_size: 4, max_count: 2_000_000 }
    }
}

impl FormulaFamily {
    pub fn at_rank(rank: usize) -> FormulaFamily {
        FormulaFamily { rank, ..Default::default() }
    }

    fn config(&self, params: usize) -> EnumConfig {
        EnumConfig { max_count: self.max_count, ..EnumConfig::sentences(self.rank, (0..params).collect(), self.max_size) }
    }

    pub fn sentences(&self, sig: &Signature) -> Result<Vec<Formula>, LogicError> {
        enumerate_formulas(sig, &self.config(self.params))
    }

    /// Formulas whose free variables lie in `{var}`.
    pub fn with_free(&self, sig: &Signature, var: &str) -> Result<Vec<Formula>, LogicError> {
        let cfg = EnumConfig { free_vars: vec![var.to_string()], ..self.config(self.params) };
        enumerate_formulas(sig, &cfg)
    }
}

/// Every assignment of `params` parameter slots drawn from `pool` that differs
/// only on the parameters `phi` mentions; other slots get `pool[0]`.
pub(crate) fn assignments(phi: &Formula, params: usize, pool: &[usize]) -> Vec<Vec<usize>> {
    let used: Vec<usize> = phi.params().into_iter().filter(|&k| k < params).collect();
    if pool.is_empty() {
        return if used.is_empty() { vec![vec![0; params]] } else { Vec::new() };
    }
    let mut out = Vec::new();
    let mut digits = vec![0usize; used.len()];
    loop {
        let mut v = vec![pool[0]; params];
        for (&k, &d) in used.iter().zip(&digits) {
            v[k] = pool[d];
        }
        out.push(v);
        let mut i = digits.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < pool.len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryCounterexample {
    pub formula: String,
    /// Source elements assigned to `#0, #1, ..`.
    pub params: Vec<usize>,
    pub source_value: Vec<usize>,
    pub target_value: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryReport {
    pub elementary: bool,
    pub rank: usize,
    pub formulas_checked: usize,
    pub counterexample: Option<ElementaryCounterexample>,
}

/// Checks `||φ(ā)||_M = ||φ(f(ā))||_N` for the family, `ā` from the domain of `map`.
pub fn check_elementary(map: &[(usize, usize)], m: &BValuedStructure, n: &BValuedStructure, family: &FormulaFamily) -> Result<ElementaryReport> {
    if m.algebra().atom_count() != n.algebra().atom_count() {
        return Err(BvError::AlgebraMismatch);
    }
    if m.signature() != n.signature() {
        return Err(BvError::SignatureMismatch);
    }
    let (dom, img): (Vec<usize>, Vec<usize>) = map.iter().copied().unzip();
    check_params(&dom, m.len())?;
    check_params(&img, n.len())?;
    let (em, en) = (RecursiveEngine::new(m), RecursiveEngine::new(n));
    let image = |params: &[usize]| -> Vec<usize> {
        params.iter().map(|&a| map.iter().find(|(x, _)| *x == a).map(|&(_, y)| y).unwrap_or(0)).collect()
    };
    let report = |checked: usize, cx: Option<ElementaryCounterexample>| ElementaryReport { elementary: cx.is_none(), rank: family.rank, formulas_checked: checked, counterexample: cx };

    // injectivity, stated separately so it is checked whatever the family
    let eq = Formula::eq(Term::Param(0), Term::Param(1));
    for (i, &(a, x)) in map.iter().enumerate() {
        for &(b, y) in &map[i + 1..] {
            let (sv, tv) = (em.eval(&eq, &[a, b])?, en.eval(&eq, &[x, y])?);
            if sv != tv {
                let cx = ElementaryCounterexample { formula: eq.to_string(), params: vec![a, b], source_value: sv.to_vec(), target_value: tv.to_vec() };
                return Ok(report(0, Some(cx)));
            }
        }
    }

    let params = if dom.is_empty() { 0 } else { family.params };
    let formulas = enumerate_formulas(m.signature(), &family.config(params))?;
    for (i, phi) in formulas.iter().enumerate() {
        for ps in assignments(phi, params, &dom) {
            let sv = em.eval(phi, &ps)?;
            let tv = en.eval(phi, &image(&ps))?;
            if sv != tv {
                let cx = ElementaryCounterexample { formula: phi.to_string(), params: ps, source_value: sv.to_vec(), target_value: tv.to_vec() };
                return Ok(report(i + 1, Some(cx)));
            }
        }
    }
    Ok(report(formulas.len(), None))
}
