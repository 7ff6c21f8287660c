//! Formulas resolved against a signature, with variables mapped to numbered slots.
//!
//! Free variables occupy slots `0..free.len()` in the order given to [`compile`];
//! each quantifier binds the next slot above those in scope.

use super::{Formula, LogicError, Result, Signature, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CTerm {
    Var(usize),
    Const(usize),
    Param(usize),
    App(usize, Vec<CTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CFormula {
    True,
    False,
    Eq(CTerm, CTerm),
    Rel(usize, Vec<CTerm>),
    Not(Box<CFormula>),
    And(Box<CFormula>, Box<CFormula>),
    Or(Box<CFormula>, Box<CFormula>),
    Implies(Box<CFormula>, Box<CFormula>),
    Exists(usize, Box<CFormula>),
    Forall(usize, Box<CFormula>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compiled {
    pub formula: CFormula,
    /// Variable slots needed, free ones included.
    pub slots: usize,
    pub free: Vec<String>,
    /// One more than the largest parameter index, 0 without parameters.
    pub param_count: usize,
}

impl Compiled {
    /// A zeroed environment of the right size with the free slots set.
    pub fn env(&self, free_values: &[usize]) -> Vec<usize> {
        let mut env = vec![0; self.slots.max(1)];
        env[..free_values.len()].copy_from_slice(free_values);
        env
    }
}

pub fn compile(phi: &Formula, sig: &Signature, free: &[String]) -> Result<Compiled> {
    let mut scope: Vec<String> = free.to_vec();
    let mut slots = scope.len();
    let formula = go(phi, sig, &mut scope, &mut slots)?;
    let param_count = phi.params().last().map_or(0, |k| k + 1);
    Ok(Compiled { formula, slots, free: free.to_vec(), param_count })
}

/// Compiles a formula whose free variables are exactly the sorted free-variable set.
pub fn compile_auto(phi: &Formula, sig: &Signature) -> Result<Compiled> {
    let free: Vec<String> = phi.free_vars().into_iter().collect();
    compile(phi, sig, &free)
}

fn term(t: &Term, sig: &Signature, scope: &[String]) -> Result<CTerm> {
    Ok(match t {
        Term::Var(v) => CTerm::Var(
            scope
                .iter()
                .rposition(|s| s == v)
                .ok_or_else(|| LogicError::UnboundVariable(v.clone()))?,
        ),
        Term::Const(c) => CTerm::Const(sig.constant(c).ok_or_else(|| LogicError::UnknownSymbol(c.clone()))?),
        Term::Param(k) => CTerm::Param(*k),
        Term::App(f, args) => {
            let i = sig.function(f).ok_or_else(|| LogicError::UnknownSymbol(f.clone()))?;
            if sig.functions[i].1 != args.len() {
                return Err(LogicError::Arity { symbol: f.clone(), expected: sig.functions[i].1, got: args.len() });
            }
            CTerm::App(i, args.iter().map(|a| term(a, sig, scope)).collect::<Result<_>>()?)
        }
    })
}

fn go(phi: &Formula, sig: &Signature, scope: &mut Vec<String>, slots: &mut usize) -> Result<CFormula> {
    Ok(match phi {
        Formula::True => CFormula::True,
        Formula::False => CFormula::False,
        Formula::Eq(a, b) => CFormula::Eq(term(a, sig, scope)?, term(b, sig, scope)?),
        Formula::Rel(r, args) => {
            let i = sig.relation(r).ok_or_else(|| LogicError::UnknownSymbol(r.clone()))?;
            if sig.relations[i].1 != args.len() {
                return Err(LogicError::Arity { symbol: r.clone(), expected: sig.relations[i].1, got: args.len() });
            }
            CFormula::Rel(i, args.iter().map(|a| term(a, sig, scope)).collect::<Result<_>>()?)
        }
        Formula::Not(f) => CFormula::Not(Box::new(go(f, sig, scope, slots)?)),
        Formula::And(a, b) => CFormula::And(Box::new(go(a, sig, scope, slots)?), Box::new(go(b, sig, scope, slots)?)),
        Formula::Or(a, b) => CFormula::Or(Box::new(go(a, sig, scope, slots)?), Box::new(go(b, sig, scope, slots)?)),
        Formula::Implies(a, b) => {
            CFormula::Implies(Box::new(go(a, sig, scope, slots)?), Box::new(go(b, sig, scope, slots)?))
        }
        Formula::Exists(v, f) | Formula::Forall(v, f) => {
            let slot = scope.len();
            scope.push(v.clone());
            *slots = (*slots).max(scope.len());
            let body = go(f, sig, scope, slots);
            scope.pop();
            let body = Box::new(body?);
            match phi {
                Formula::Exists(..) => CFormula::Exists(slot, body),
                _ => CFormula::Forall(slot, body),
            }
        }
    })
}
