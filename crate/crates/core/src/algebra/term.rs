//! Terms in the language of Boolean algebras `(0, 1, ∧, ∨, ¬)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BoolAlg, Elem};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeTerm {
    Var(usize),
    Zero,
    One,
    Not(Box<LatticeTerm>),
    Meet(Box<LatticeTerm>, Box<LatticeTerm>),
    Join(Box<LatticeTerm>, Box<LatticeTerm>),
}

impl LatticeTerm {
    pub fn var(i: usize) -> LatticeTerm {
        LatticeTerm::Var(i)
    }

    pub fn not(t: LatticeTerm) -> LatticeTerm {
        LatticeTerm::Not(Box::new(t))
    }

    pub fn meet(a: LatticeTerm, b: LatticeTerm) -> LatticeTerm {
        LatticeTerm::Meet(Box::new(a), Box::new(b))
    }

    pub fn join(a: LatticeTerm, b: LatticeTerm) -> LatticeTerm {
        LatticeTerm::Join(Box::new(a), Box::new(b))
    }

    /// Evaluates with `x_i ↦ args[i]`. Panics on an unbound variable.
    pub fn eval(&self, alg: &BoolAlg, args: &[Elem]) -> Elem {
        match self {
            LatticeTerm::Var(i) => args[*i],
            LatticeTerm::Zero => alg.zero(),
            LatticeTerm::One => alg.one(),
            LatticeTerm::Not(t) => !t.eval(alg, args),
            LatticeTerm::Meet(a, b) => a.eval(alg, args) & b.eval(alg, args),
            LatticeTerm::Join(a, b) => a.eval(alg, args) | b.eval(alg, args),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            LatticeTerm::Var(_) | LatticeTerm::Zero | LatticeTerm::One => 0,
            LatticeTerm::Not(t) => 1 + t.depth(),
            LatticeTerm::Meet(a, b) | LatticeTerm::Join(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            LatticeTerm::Var(i) => Some(*i),
            LatticeTerm::Zero | LatticeTerm::One => None,
            LatticeTerm::Not(t) => t.max_var(),
            LatticeTerm::Meet(a, b) | LatticeTerm::Join(a, b) => a.max_var().max(b.max_var()),
        }
    }
}

impl fmt::Display for LatticeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeTerm::Var(i) => write!(f, "x{i}"),
            LatticeTerm::Zero => write!(f, "0"),
            LatticeTerm::One => write!(f, "1"),
            LatticeTerm::Not(t) => write!(f, "¬{t}"),
            LatticeTerm::Meet(a, b) => write!(f, "({a} ∧ {b})"),
            LatticeTerm::Join(a, b) => write!(f, "({a} ∨ {b})"),
        }
    }
}
