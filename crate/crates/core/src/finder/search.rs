//! Backtracking search for finite models.
//!
//! Cells are assigned in a fixed order: constants, then function table entries,
//! then relation table entries, each table in tuple order. Values are tried in
//! increasing order (`false` before `true`), so the first model found is the
//! lexicographically least one under that cell order. Constants follow the
//! least-number heuristic: constant `i` takes a value at most one above the
//! largest value used by constants `0..i`. After every assignment each
//! constraint is evaluated in three-valued (Kleene) logic and the branch is cut
//! as soon as one is decided the wrong way.

use super::{FinderError, Result, Structure};
use crate::logic::{compile, CFormula, CTerm, Formula, Signature, Theory};

pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinderTask {
    pub signature: Signature,
    pub axioms: Theory,
    /// Sentences required true.
    pub positive: Vec<Formula>,
    /// Sentences required false.
    pub negative: Vec<Formula>,
    /// Largest domain size tried.
    pub bound: usize,
    pub budget: u64,
}

impl FinderTask {
    pub fn new(signature: Signature, bound: usize) -> FinderTask {
        FinderTask {
            signature,
            axioms: Theory::empty(),
            positive: Vec::new(),
            negative: Vec::new(),
            bound,
            budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn with_axioms(mut self, axioms: Theory) -> FinderTask {
        self.axioms = axioms;
        self
    }

    pub fn require(mut self, phi: Formula) -> FinderTask {
        self.positive.push(phi);
        self
    }

    pub fn forbid(mut self, phi: Formula) -> FinderTask {
        self.negative.push(phi);
        self
    }

    /// `(sentence, wanted truth value)` for every constraint, axioms first.
    pub fn constraints(&self) -> impl Iterator<Item = (&Formula, bool)> {
        self.axioms
            .axioms()
            .iter()
            .chain(&self.positive)
            .map(|f| (f, true))
            .chain(self.negative.iter().map(|f| (f, false)))
    }

    /// Whether `m` meets every constraint.
    pub fn is_model(&self, m: &Structure) -> Result<bool> {
        for (phi, want) in self.constraints() {
            if m.satisfies(phi, &[], &[])? != want {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FindResult {
    Found(Structure),
    /// Every domain size up to the bound was exhausted.
    NoModel,
    /// The node budget ran out first.
    Unknown { nodes: u64 },
}

impl FindResult {
    pub fn model(&self) -> Option<&Structure> {
        match self {
            FindResult::Found(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, FindResult::Found(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, FindResult::Unknown { .. })
    }
}

const UNSET: u8 = u8::MAX;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tri {
    F,
    T,
    U,
}

#[derive(Clone, Copy)]
enum Cell {
    Const(usize),
    Func(usize, usize),
    Rel(usize, usize),
}

struct Partial {
    size: usize,
    consts: Vec<u8>,
    funcs: Vec<Vec<u8>>,
    rels: Vec<Vec<u8>>,
}

impl Partial {
    fn term(&self, t: &CTerm, env: &[usize]) -> Option<usize> {
        match t {
            CTerm::Var(s) => Some(env[*s]),
            CTerm::Const(c) => (self.consts[*c] != UNSET).then(|| self.consts[*c] as usize),
            CTerm::Param(_) => unreachable!("finder constraints are sentences"),
            CTerm::App(f, args) => {
                let mut idx = 0;
                for a in args {
                    idx = idx * self.size + self.term(a, env)?;
                }
                let v = self.funcs[*f][idx];
                (v != UNSET).then_some(v as usize)
            }
        }
    }

    fn eval(&self, phi: &CFormula, env: &mut [usize]) -> Tri {
        match phi {
            CFormula::True => Tri::T,
            CFormula::False => Tri::F,
            CFormula::Eq(a, b) => match (self.term(a, env), self.term(b, env)) {
                (Some(x), Some(y)) => tri(x == y),
                _ => Tri::U,
            },
            CFormula::Rel(r, args) => {
                let mut idx = 0;
                for a in args {
                    match self.term(a, env) {
                        Some(v) => idx = idx * self.size + v,
                        None => return Tri::U,
                    }
                }
                match self.rels[*r][idx] {
                    UNSET => Tri::U,
                    v => tri(v == 1),
                }
            }
            CFormula::Not(f) => not(self.eval(f, env)),
            CFormula::And(a, b) => and(self.eval(a, env), || self.eval(b, env)),
            CFormula::Or(a, b) => not(and(not(self.eval(a, env)), || not(self.eval(b, env)))),
            CFormula::Implies(a, b) => not(and(self.eval(a, env), || not(self.eval(b, env)))),
            CFormula::Exists(slot, f) => not(self.forall(*slot, f, env, true)),
            CFormula::Forall(slot, f) => self.forall(*slot, f, env, false),
        }
    }

    /// `∀x f` (or `∀x ¬f` when `negate`).
    fn forall(&self, slot: usize, f: &CFormula, env: &mut [usize], negate: bool) -> Tri {
        let saved = env[slot];
        let mut acc = Tri::T;
        for x in 0..self.size {
            env[slot] = x;
            let v = self.eval(f, env);
            let v = if negate { not(v) } else { v };
            if v == Tri::F {
                acc = Tri::F;
                break;
            }
            if v == Tri::U {
                acc = Tri::U;
            }
        }
        env[slot] = saved;
        acc
    }
}

fn tri(b: bool) -> Tri {
    if b {
        Tri::T
    } else {
        Tri::F
    }
}

fn not(t: Tri) -> Tri {
    match t {
        Tri::T => Tri::F,
        Tri::F => Tri::T,
        Tri::U => Tri::U,
    }
}

fn and(a: Tri, b: impl FnOnce() -> Tri) -> Tri {
    if a == Tri::F {
        return Tri::F;
    }
    match (a, b()) {
        (_, Tri::F) => Tri::F,
        (Tri::T, Tri::T) => Tri::T,
        _ => Tri::U,
    }
}

struct Search<'a> {
    partial: Partial,
    cells: Vec<Cell>,
    constraints: &'a [(CFormula, bool, usize)],
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn consistent(&self) -> bool {
        let mut env = Vec::new();
        self.constraints.iter().all(|(phi, want, slots)| {
            env.clear();
            env.resize((*slots).max(1), 0);
            let v = self.partial.eval(phi, &mut env);
            v == Tri::U || v == tri(*want)
        })
    }

    /// `Some(true)` on a model, `Some(false)` when exhausted, `None` on budget.
    fn run(&mut self, pos: usize, max_const: Option<usize>) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        if !self.consistent() {
            return Some(false);
        }
        if pos == self.cells.len() {
            return Some(true);
        }
        let size = self.partial.size;
        match self.cells[pos] {
            Cell::Const(c) => {
                let limit = max_const.map_or(0, |m| m + 1).min(size - 1);
                for v in 0..=limit {
                    self.partial.consts[c] = v as u8;
                    let next_max = Some(max_const.map_or(v, |m| m.max(v)));
                    if self.run(pos + 1, next_max)? {
                        return Some(true);
                    }
                }
                self.partial.consts[c] = UNSET;
            }
            Cell::Func(f, i) => {
                for v in 0..size {
                    self.partial.funcs[f][i] = v as u8;
                    if self.run(pos + 1, max_const)? {
                        return Some(true);
                    }
                }
                self.partial.funcs[f][i] = UNSET;
            }
            Cell::Rel(r, i) => {
                for v in 0..2u8 {
                    self.partial.rels[r][i] = v;
                    if self.run(pos + 1, max_const)? {
                        return Some(true);
                    }
                }
                self.partial.rels[r][i] = UNSET;
            }
        }
        Some(false)
    }
}

/// Searches domain sizes `1..=bound` in order.
pub fn find_model(task: &FinderTask) -> Result<FindResult> {
    if task.bound == 0 || task.bound >= UNSET as usize {
        return Err(FinderError::BadBound);
    }
    let sig = &task.signature;
    sig.validate()?;
    let mut constraints = Vec::new();
    for (phi, want) in task.constraints() {
        if !phi.is_closed() || !phi.params().is_empty() {
            return Err(FinderError::NotSentence(phi.to_string()));
        }
        let c = compile(phi, sig, &[])?;
        constraints.push((c.formula, want, c.slots));
    }
    let mut nodes = 0;
    for size in 1..=task.bound {
        let mut cells: Vec<Cell> = (0..sig.constants.len()).map(Cell::Const).collect();
        for (f, (_, k)) in sig.functions.iter().enumerate() {
            cells.extend((0..size.pow(*k as u32)).map(|i| Cell::Func(f, i)));
        }
        for (r, (_, k)) in sig.relations.iter().enumerate() {
            cells.extend((0..size.pow(*k as u32)).map(|i| Cell::Rel(r, i)));
        }
        let partial = Partial {
            size,
            consts: vec![UNSET; sig.constants.len()],
            funcs: sig.functions.iter().map(|(_, k)| vec![UNSET; size.pow(*k as u32)]).collect(),
            rels: sig.relations.iter().map(|(_, k)| vec![UNSET; size.pow(*k as u32)]).collect(),
        };
        let mut search = Search { partial, cells, constraints: &constraints, nodes, budget: task.budget };
        let outcome = search.run(0, None);
        nodes = search.nodes;
        match outcome {
            None => return Ok(FindResult::Unknown { nodes }),
            Some(false) => continue,
            Some(true) => {
                let p = search.partial;
                let mut m = Structure::new(sig, size)?;
                {
                    let (rels, funcs, consts) = m.tables_mut();
                    for (dst, src) in rels.iter_mut().zip(&p.rels) {
                        *dst = src.iter().map(|&v| v == 1).collect();
                    }
                    for (dst, src) in funcs.iter_mut().zip(&p.funcs) {
                        *dst = src.iter().map(|&v| v as usize).collect();
                    }
                    *consts = p.consts.iter().map(|&v| v as usize).collect();
                }
                if !task.is_model(&m)? {
                    return Err(FinderError::Unsound);
                }
                return Ok(FindResult::Found(m));
            }
        }
    }
    Ok(FindResult::NoModel)
}
