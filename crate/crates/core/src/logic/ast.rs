use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{LogicError, Result};

/// A finite first-order signature. Symbol order is significant: structures
/// store their tables in this order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    #[serde(default)]
    pub relations: Vec<(String, usize)>,
    #[serde(default)]
    pub functions: Vec<(String, usize)>,
    #[serde(default)]
    pub constants: Vec<String>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn with_relation(mut self, name: &str, arity: usize) -> Signature {
        self.relations.push((name.to_string(), arity));
        self
    }

    pub fn with_function(mut self, name: &str, arity: usize) -> Signature {
        self.functions.push((name.to_string(), arity));
        self
    }

    pub fn with_constant(mut self, name: &str) -> Signature {
        self.constants.push(name.to_string());
        self
    }

    pub fn relation(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|(n, _)| n == name)
    }

    pub fn function(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|(n, _)| n == name)
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|n| n == name)
    }

    pub fn symbol_count(&self) -> usize {
        self.relations.len() + self.functions.len() + self.constants.len()
    }

    /// Names unique across all symbol kinds and arities at least 1.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        let names = self
            .relations
            .iter()
            .chain(&self.functions)
            .map(|(n, _)| n)
            .chain(&self.constants);
        for n in names {
            if !seen.insert(n.as_str()) {
                return Err(LogicError::BadSignature(format!("symbol {n} declared twice")));
            }
        }
        if let Some((n, _)) = self.relations.iter().chain(&self.functions).find(|(_, a)| *a == 0) {
            return Err(LogicError::BadSignature(format!("symbol {n} has arity 0")));
        }
        Ok(())
    }

    /// `self` extended by fresh constants, failing on a name clash.
    pub fn extend_constants<S: AsRef<str>>(&self, names: &[S]) -> Result<Signature> {
        let mut sig = self.clone();
        for n in names {
            sig.constants.push(n.as_ref().to_string());
        }
        sig.validate()?;
        Ok(sig)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    Var(String),
    Const(String),
    /// A reference to the `k`-th parameter (a domain element), printed `#k`.
    Param(usize),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Const(_) | Term::Param(_) => {}
        }
    }

    fn collect_params(&self, out: &mut BTreeSet<usize>) {
        match self {
            Term::Param(k) => {
                out.insert(*k);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_params(out)),
            Term::Var(_) | Term::Const(_) => {}
        }
    }

    fn subst_var(&self, var: &str, by: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => by.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.subst_var(var, by)).collect()),
            t => t.clone(),
        }
    }

    fn subst_map(&self, map: &[(String, Term)]) -> Term {
        match self {
            Term::Var(v) => map.iter().find(|(x, _)| x == v).map_or_else(|| self.clone(), |(_, t)| t.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.subst_map(map)).collect()),
            t => t.clone(),
        }
    }

    fn map_params(&self, f: &impl Fn(usize) -> Term) -> Term {
        match self {
            Term::Param(k) => f(*k),
            Term::App(g, args) => Term::App(g.clone(), args.iter().map(|a| a.map_params(f)).collect()),
            t => t.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Rel(String, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    /// Evaluated as `¬∃x¬φ`.
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn rel(name: &str, args: Vec<Term>) -> Formula {
        Formula::Rel(name.to_string(), args)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, f: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(f))
    }

    pub fn forall(v: &str, f: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(f))
    }

    /// `∃v_0 .. ∃v_{n-1} φ`, outermost first.
    pub fn exists_many<S: AsRef<str>>(vars: &[S], f: Formula) -> Formula {
        vars.iter().rev().fold(f, |acc, v| Formula::exists(v.as_ref(), acc))
    }

    /// `⋀Γ` as a left-nested conjunction in the given order; `true` for empty `Γ`.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::True,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut terms = |ts: &[&Term], bound: &Vec<String>| {
            let mut vs = BTreeSet::new();
            ts.iter().for_each(|t| t.collect_vars(&mut vs));
            out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => terms(&[a, b], bound),
            Formula::Rel(_, args) => terms(&args.iter().collect::<Vec<_>>(), bound),
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Parameter indices occurring anywhere.
    pub fn params(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.collect_params(&mut out));
        out
    }

    fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                f(a);
                f(b);
            }
            Formula::Rel(_, args) => args.iter().for_each(&mut *f),
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit_terms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
        }
    }

    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_rank().max(b.quantifier_rank())
            }
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.quantifier_rank(),
        }
    }

    /// Number of formula nodes; atoms count 1.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => 1,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Replaces free occurrences of `var` by `by`.
    ///
    /// Fails with `Capture` when `by` mentions a variable that would become bound.
    pub fn substitute(&self, var: &str, by: &Term) -> Result<Formula> {
        let mut by_vars = BTreeSet::new();
        by.collect_vars(&mut by_vars);
        self.subst(var, by, &by_vars)
    }

    fn subst(&self, var: &str, by: &Term, by_vars: &BTreeSet<String>) -> Result<Formula> {
        Ok(match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Eq(a, b) => Formula::Eq(a.subst_var(var, by), b.subst_var(var, by)),
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|a| a.subst_var(var, by)).collect()),
            Formula::Not(f) => Formula::not(f.subst(var, by, by_vars)?),
            Formula::And(a, b) => Formula::and(a.subst(var, by, by_vars)?, b.subst(var, by, by_vars)?),
            Formula::Or(a, b) => Formula::or(a.subst(var, by, by_vars)?, b.subst(var, by, by_vars)?),
            Formula::Implies(a, b) => Formula::implies(a.subst(var, by, by_vars)?, b.subst(var, by, by_vars)?),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let body = if v == var {
                    (**f).clone()
                } else {
                    if by_vars.contains(v) && f.free_vars().contains(var) {
                        return Err(LogicError::Capture { var: var.to_string(), binder: v.clone() });
                    }
                    f.subst(var, by, by_vars)?
                };
                match self {
                    Formula::Exists(..) => Formula::Exists(v.clone(), Box::new(body)),
                    _ => Formula::Forall(v.clone(), Box::new(body)),
                }
            }
        })
    }

    /// Simultaneous substitution of variables by terms.
    pub fn substitute_all(&self, map: &[(String, Term)]) -> Result<Formula> {
        let mut by_vars = BTreeSet::new();
        map.iter().for_each(|(_, t)| t.collect_vars(&mut by_vars));
        self.subst_many(map, &by_vars)
    }

    fn subst_many(&self, map: &[(String, Term)], by_vars: &BTreeSet<String>) -> Result<Formula> {
        let term = |t: &Term| t.subst_map(map);
        Ok(match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Eq(a, b) => Formula::Eq(term(a), term(b)),
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(term).collect()),
            Formula::Not(f) => Formula::not(f.subst_many(map, by_vars)?),
            Formula::And(a, b) => Formula::and(a.subst_many(map, by_vars)?, b.subst_many(map, by_vars)?),
            Formula::Or(a, b) => Formula::or(a.subst_many(map, by_vars)?, b.subst_many(map, by_vars)?),
            Formula::Implies(a, b) => Formula::implies(a.subst_many(map, by_vars)?, b.subst_many(map, by_vars)?),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let inner: Vec<(String, Term)> = map.iter().filter(|(x, _)| x != v).cloned().collect();
                if by_vars.contains(v) {
                    let free = f.free_vars();
                    if let Some((x, _)) = inner.iter().find(|(x, _)| free.contains(x)) {
                        return Err(LogicError::Capture { var: x.clone(), binder: v.clone() });
                    }
                }
                let body = Box::new(f.subst_many(&inner, by_vars)?);
                match self {
                    Formula::Exists(..) => Formula::Exists(v.clone(), body),
                    _ => Formula::Forall(v.clone(), body),
                }
            }
        })
    }

    /// Applies `f` to every parameter leaf.
    pub fn map_params(&self, f: &impl Fn(usize) -> Term) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Eq(a, b) => Formula::Eq(a.map_params(f), b.map_params(f)),
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|a| a.map_params(f)).collect()),
            Formula::Not(g) => Formula::not(g.map_params(f)),
            Formula::And(a, b) => Formula::and(a.map_params(f), b.map_params(f)),
            Formula::Or(a, b) => Formula::or(a.map_params(f), b.map_params(f)),
            Formula::Implies(a, b) => Formula::implies(a.map_params(f), b.map_params(f)),
            Formula::Exists(v, g) => Formula::Exists(v.clone(), Box::new(g.map_params(f))),
            Formula::Forall(v, g) => Formula::Forall(v.clone(), Box::new(g.map_params(f))),
        }
    }

    /// Replaces parameter `#k` by `by`.
    pub fn substitute_param(&self, k: usize, by: &Term) -> Formula {
        self.map_params(&|j| if j == k { by.clone() } else { Term::Param(j) })
    }

    /// Checks every symbol against `sig` with matching arity.
    pub fn check_signature(&self, sig: &Signature) -> Result<()> {
        fn term(t: &Term, sig: &Signature) -> Result<()> {
            match t {
                Term::Var(_) | Term::Param(_) => Ok(()),
                Term::Const(c) => sig.constant(c).map(|_| ()).ok_or_else(|| LogicError::UnknownSymbol(c.clone())),
                Term::App(f, args) => {
                    let i = sig.function(f).ok_or_else(|| LogicError::UnknownSymbol(f.clone()))?;
                    let arity = sig.functions[i].1;
                    if arity != args.len() {
                        return Err(LogicError::Arity { symbol: f.clone(), expected: arity, got: args.len() });
                    }
                    args.iter().try_for_each(|a| term(a, sig))
                }
            }
        }
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::Eq(a, b) => {
                term(a, sig)?;
                term(b, sig)
            }
            Formula::Rel(r, args) => {
                let i = sig.relation(r).ok_or_else(|| LogicError::UnknownSymbol(r.clone()))?;
                let arity = sig.relations[i].1;
                if arity != args.len() {
                    return Err(LogicError::Arity { symbol: r.clone(), expected: arity, got: args.len() });
                }
                args.iter().try_for_each(|a| term(a, sig))
            }
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.check_signature(sig),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.check_signature(sig)?;
                b.check_signature(sig)
            }
        }
    }
}

/// A finite list of sentences standing in for a theory.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theory {
    axioms: Vec<Formula>,
}

impl Theory {
    pub fn new(axioms: Vec<Formula>) -> Result<Theory> {
        if let Some(f) = axioms.iter().find(|f| !f.is_closed()) {
            return Err(LogicError::NotSentence(f.to_string()));
        }
        Ok(Theory { axioms })
    }

    pub fn empty() -> Theory {
        Theory::default()
    }

    pub fn axioms(&self) -> &[Formula] {
        &self.axioms
    }
}

// Printing: `->` binds loosest (right-assoc), then `|`, `&` (left-assoc), then `!`
// and atoms. Quantifier bodies extend to the right, so a quantifier is
// parenthesized whenever it is an operand.

const P_IMP: u8 = 1;
const P_OR: u8 = 2;
const P_AND: u8 = 3;
const P_UNARY: u8 = 4;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => write!(f, "{v}"),
            Term::Param(k) => write!(f, "#{k}"),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn write_formula(phi: &Formula, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = match phi {
        Formula::Implies(..) => P_IMP,
        Formula::Or(..) => P_OR,
        Formula::And(..) => P_AND,
        Formula::Exists(..) | Formula::Forall(..) => 0,
        _ => P_UNARY,
    };
    let paren = prec < ctx;
    if paren {
        write!(f, "(")?;
    }
    match phi {
        Formula::True => write!(f, "true")?,
        Formula::False => write!(f, "false")?,
        Formula::Eq(a, b) => write!(f, "{a} = {b}")?,
        Formula::Rel(r, args) if r == "<" && args.len() == 2 => write!(f, "{} < {}", args[0], args[1])?,
        Formula::Rel(r, args) => write!(f, "{}", Term::App(r.clone(), args.clone()))?,
        Formula::Not(g) => {
            write!(f, "!")?;
            write_formula(g, P_UNARY, f)?;
        }
        Formula::And(a, b) => {
            write_formula(a, P_AND, f)?;
            write!(f, " & ")?;
            write_formula(b, P_UNARY, f)?;
        }
        Formula::Or(a, b) => {
            write_formula(a, P_OR, f)?;
            write!(f, " | ")?;
            write_formula(b, P_AND, f)?;
        }
        Formula::Implies(a, b) => {
            write_formula(a, P_OR, f)?;
            write!(f, " -> ")?;
            write_formula(b, P_IMP, f)?;
        }
        Formula::Exists(v, g) => {
            write!(f, "exists {v}. ")?;
            write_formula(g, 0, f)?;
        }
        Formula::Forall(v, g) => {
            write!(f, "forall {v}. ")?;
            write_formula(g, 0, f)?;
        }
    }
    if paren {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, 0, f)
    }
}
