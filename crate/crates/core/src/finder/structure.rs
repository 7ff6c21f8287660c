use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{FinderError, Result};
use crate::logic::{compile, CFormula, CTerm, Formula, Signature};

/// An ordinary finite structure with domain `{0, .., size-1}`.
///
/// Tables are dense and stored in signature order; a tuple `(a_0, .., a_{k-1})`
/// sits at position `Σ a_i · size^(k-1-i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Structure {
    sig: Signature,
    size: usize,
    relations: Vec<Vec<bool>>,
    functions: Vec<Vec<usize>>,
    constants: Vec<usize>,
}

pub(crate) fn tuple_index(tuple: &[usize], size: usize) -> usize {
    tuple.iter().fold(0, |acc, &a| acc * size + a)
}

pub(crate) fn tuple_at(mut index: usize, arity: usize, size: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = index % size;
        index /= size;
    }
    out
}

impl Structure {
    /// All relations empty, all functions and constants at 0.
    pub fn new(sig: &Signature, size: usize) -> Result<Structure> {
        if size == 0 {
            return Err(FinderError::EmptyDomain);
        }
        sig.validate()?;
        Ok(Structure {
            sig: sig.clone(),
            size,
            relations: sig.relations.iter().map(|(_, k)| vec![false; size.pow(*k as u32)]).collect(),
            functions: sig.functions.iter().map(|(_, k)| vec![0; size.pow(*k as u32)]).collect(),
            constants: vec![0; sig.constants.len()],
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn check_tuple(&self, tuple: &[usize]) -> Result<()> {
        match tuple.iter().find(|&&a| a >= self.size) {
            Some(&a) => Err(FinderError::OutOfDomain { value: a, size: self.size }),
            None => Ok(()),
        }
    }

    pub fn set_relation(&mut self, r: usize, tuple: &[usize], value: bool) -> Result<()> {
        self.check_tuple(tuple)?;
        assert_eq!(tuple.len(), self.sig.relations[r].1, "arity");
        let i = tuple_index(tuple, self.size);
        self.relations[r][i] = value;
        Ok(())
    }

    pub fn set_function(&mut self, f: usize, tuple: &[usize], value: usize) -> Result<()> {
        self.check_tuple(tuple)?;
        self.check_tuple(&[value])?;
        assert_eq!(tuple.len(), self.sig.functions[f].1, "arity");
        let i = tuple_index(tuple, self.size);
        self.functions[f][i] = value;
        Ok(())
    }

    pub fn set_constant(&mut self, c: usize, value: usize) -> Result<()> {
        self.check_tuple(&[value])?;
        self.constants[c] = value;
        Ok(())
    }

    /// Builder by symbol name; panics on unknown names.
    pub fn with_relation_tuples(mut self, name: &str, tuples: &[&[usize]]) -> Result<Structure> {
        let r = self.sig.relation(name).unwrap_or_else(|| panic!("no relation {name}"));
        for t in tuples {
            self.set_relation(r, t, true)?;
        }
        Ok(self)
    }

    pub fn with_constant_value(mut self, name: &str, value: usize) -> Result<Structure> {
        let c = self.sig.constant(name).unwrap_or_else(|| panic!("no constant {name}"));
        self.set_constant(c, value)?;
        Ok(self)
    }

    pub fn relation_holds(&self, r: usize, tuple: &[usize]) -> bool {
        self.relations[r][tuple_index(tuple, self.size)]
    }

    pub fn apply(&self, f: usize, tuple: &[usize]) -> usize {
        self.functions[f][tuple_index(tuple, self.size)]
    }

    pub fn constant(&self, c: usize) -> usize {
        self.constants[c]
    }

    pub fn relation_table(&self, r: usize) -> &[bool] {
        &self.relations[r]
    }

    pub fn function_table(&self, f: usize) -> &[usize] {
        &self.functions[f]
    }

    pub fn constants(&self) -> &[usize] {
        &self.constants
    }

    pub fn eval_term(&self, t: &CTerm, env: &[usize], params: &[usize]) -> usize {
        match t {
            CTerm::Var(s) => env[*s],
            CTerm::Const(c) => self.constants[*c],
            CTerm::Param(k) => params[*k],
            CTerm::App(f, args) => {
                let mut idx = 0;
                for a in args {
                    idx = idx * self.size + self.eval_term(a, env, params);
                }
                self.functions[*f][idx]
            }
        }
    }

    /// Tarskian truth with quantifiers over the whole domain.
    pub fn eval(&self, phi: &CFormula, env: &mut [usize], params: &[usize]) -> bool {
        self.eval_over(phi, env, params, None)
    }

    /// Tarskian truth with quantifiers over `range` (the whole domain when `None`).
    pub fn eval_over(&self, phi: &CFormula, env: &mut [usize], params: &[usize], range: Option<&[usize]>) -> bool {
        match phi {
            CFormula::True => true,
            CFormula::False => false,
            CFormula::Eq(a, b) => self.eval_term(a, env, params) == self.eval_term(b, env, params),
            CFormula::Rel(r, args) => {
                let mut idx = 0;
                for a in args {
                    idx = idx * self.size + self.eval_term(a, env, params);
                }
                self.relations[*r][idx]
            }
            CFormula::Not(f) => !self.eval_over(f, env, params, range),
            CFormula::And(a, b) => self.eval_over(a, env, params, range) && self.eval_over(b, env, params, range),
            CFormula::Or(a, b) => self.eval_over(a, env, params, range) || self.eval_over(b, env, params, range),
            CFormula::Implies(a, b) => !self.eval_over(a, env, params, range) || self.eval_over(b, env, params, range),
            CFormula::Exists(slot, f) => self.some_witness(*slot, f, env, params, range, true),
            CFormula::Forall(slot, f) => !self.some_witness(*slot, f, env, params, range, false),
        }
    }

    /// Whether some `x` in range makes `f` evaluate to `want`.
    fn some_witness(&self, slot: usize, f: &CFormula, env: &mut [usize], params: &[usize], range: Option<&[usize]>, want: bool) -> bool {
        let saved = env[slot];
        let mut found = false;
        let try_value = |x: usize, env: &mut [usize]| {
            env[slot] = x;
            self.eval_over(f, env, params, range) == want
        };
        match range {
            Some(r) => {
                for &x in r {
                    if try_value(x, env) {
                        found = true;
                        break;
                    }
                }
            }
            None => {
                for x in 0..self.size {
                    if try_value(x, env) {
                        found = true;
                        break;
                    }
                }
            }
        }
        env[slot] = saved;
        found
    }

    /// `M ⊨ φ[params]` for a formula whose free variables are bound by `assignment`.
    pub fn satisfies(&self, phi: &Formula, assignment: &[(String, usize)], params: &[usize]) -> Result<bool> {
        let names: Vec<String> = assignment.iter().map(|(v, _)| v.clone()).collect();
        let c = compile(phi, &self.sig, &names)?;
        if c.param_count > params.len() {
            return Err(FinderError::UnboundParameter(c.param_count - 1));
        }
        self.check_tuple(params)?;
        let values: Vec<usize> = assignment.iter().map(|(_, a)| *a).collect();
        self.check_tuple(&values)?;
        let mut env = c.env(&values);
        Ok(self.eval(&c.formula, &mut env, params))
    }

    /// The substructure on `keep` (which must contain the constants and be closed
    /// under the functions), renumbered in the order of `keep`.
    pub fn restrict(&self, keep: &[usize]) -> Result<Structure> {
        let mut pos = vec![usize::MAX; self.size];
        for (i, &a) in keep.iter().enumerate() {
            self.check_tuple(&[a])?;
            pos[a] = i;
        }
        let m = keep.len();
        let mut out = Structure::new(&self.sig, m)?;
        for (c, &v) in self.constants.iter().enumerate() {
            if pos[v] == usize::MAX {
                return Err(FinderError::NotClosed(format!("constant {} lies outside", self.sig.constants[c])));
            }
            out.constants[c] = pos[v];
        }
        for (r, (_, k)) in self.sig.relations.iter().enumerate() {
            for i in 0..m.pow(*k as u32) {
                let t: Vec<usize> = tuple_at(i, *k, m).into_iter().map(|j| keep[j]).collect();
                out.relations[r][i] = self.relation_holds(r, &t);
            }
        }
        for (f, (name, k)) in self.sig.functions.iter().enumerate() {
            for i in 0..m.pow(*k as u32) {
                let t: Vec<usize> = tuple_at(i, *k, m).into_iter().map(|j| keep[j]).collect();
                let v = self.apply(f, &t);
                if pos[v] == usize::MAX {
                    return Err(FinderError::NotClosed(format!("function {name} leaves the subset")));
                }
                out.functions[f][i] = pos[v];
            }
        }
        Ok(out)
    }

    /// The reduct to a sub-signature whose symbols all occur in `self`'s signature.
    pub fn reduct(&self, sig: &Signature) -> Result<Structure> {
        let mut out = Structure::new(sig, self.size)?;
        for (r, (name, _)) in sig.relations.iter().enumerate() {
            let src = self.sig.relation(name).ok_or_else(|| FinderError::Logic(crate::logic::LogicError::UnknownSymbol(name.clone())))?;
            out.relations[r] = self.relations[src].clone();
        }
        for (f, (name, _)) in sig.functions.iter().enumerate() {
            let src = self.sig.function(name).ok_or_else(|| FinderError::Logic(crate::logic::LogicError::UnknownSymbol(name.clone())))?;
            out.functions[f] = self.functions[src].clone();
        }
        for (c, name) in sig.constants.iter().enumerate() {
            let src = self.sig.constant(name).ok_or_else(|| FinderError::Logic(crate::logic::LogicError::UnknownSymbol(name.clone())))?;
            out.constants[c] = self.constants[src];
        }
        Ok(out)
    }

    /// The image under a permutation `perm` of the domain (`a ↦ perm[a]`).
    pub fn permute(&self, perm: &[usize]) -> Structure {
        let mut out = Structure::new(&self.sig, self.size).expect("same signature");
        for (c, &v) in self.constants.iter().enumerate() {
            out.constants[c] = perm[v];
        }
        for (r, (_, k)) in self.sig.relations.iter().enumerate() {
            for i in 0..self.relations[r].len() {
                let t: Vec<usize> = tuple_at(i, *k, self.size).into_iter().map(|a| perm[a]).collect();
                out.relations[r][tuple_index(&t, self.size)] = self.relations[r][i];
            }
        }
        for (f, (_, k)) in self.sig.functions.iter().enumerate() {
            for i in 0..self.functions[f].len() {
                let t: Vec<usize> = tuple_at(i, *k, self.size).into_iter().map(|a| perm[a]).collect();
                out.functions[f][tuple_index(&t, self.size)] = perm[self.functions[f][i]];
            }
        }
        out
    }

    /// Whether `map` (a bijection of domains) is an isomorphism onto `other`.
    pub fn is_isomorphism(&self, other: &Structure, map: &[usize]) -> bool {
        if self.sig != other.sig || self.size != other.size || map.len() != self.size {
            return false;
        }
        let mut seen = vec![false; self.size];
        for &m in map {
            if m >= self.size || std::mem::replace(&mut seen[m], true) {
                return false;
            }
        }
        &self.permute(map) == other
    }

    /// Some isomorphism onto `other`, by trying every bijection.
    pub fn find_isomorphism(&self, other: &Structure) -> Option<Vec<usize>> {
        if self.sig != other.sig || self.size != other.size || self.size > 8 {
            return None;
        }
        let mut perm: Vec<usize> = (0..self.size).collect();
        loop {
            if self.is_isomorphism(other, &perm) {
                return Some(perm);
            }
            if !next_permutation(&mut perm) {
                return None;
            }
        }
    }

    pub(crate) fn tables_mut(&mut self) -> (&mut Vec<Vec<bool>>, &mut Vec<Vec<usize>>, &mut Vec<usize>) {
        (&mut self.relations, &mut self.functions, &mut self.constants)
    }
}

pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[derive(Serialize, Deserialize)]
struct StructureJson {
    signature: Signature,
    size: usize,
    #[serde(default)]
    relations: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(default)]
    functions: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    constants: BTreeMap<String, usize>,
}

impl Serialize for Structure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let relations = self
            .sig
            .relations
            .iter()
            .enumerate()
            .map(|(r, (name, k))| {
                let tuples = (0..self.relations[r].len())
                    .filter(|&i| self.relations[r][i])
                    .map(|i| tuple_at(i, *k, self.size))
                    .collect();
                (name.clone(), tuples)
            })
            .collect();
        let functions = self
            .sig
            .functions
            .iter()
            .enumerate()
            .map(|(f, (name, _))| (name.clone(), self.functions[f].clone()))
            .collect();
        let constants = self.sig.constants.iter().cloned().zip(self.constants.iter().copied()).collect();
        StructureJson { signature: self.sig.clone(), size: self.size, relations, functions, constants }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let j = StructureJson::deserialize(d)?;
        let mut m = Structure::new(&j.signature, j.size).map_err(D::Error::custom)?;
        for (name, tuples) in &j.relations {
            let r = j.signature.relation(name).ok_or_else(|| D::Error::custom(format!("unknown relation {name}")))?;
            for t in tuples {
                if t.len() != j.signature.relations[r].1 {
                    return Err(D::Error::custom(format!("tuple of wrong arity for {name}")));
                }
                m.set_relation(r, t, true).map_err(D::Error::custom)?;
            }
        }
        for (name, table) in &j.functions {
            let f = j.signature.function(name).ok_or_else(|| D::Error::custom(format!("unknown function {name}")))?;
            if table.len() != m.functions[f].len() {
                return Err(D::Error::custom(format!("function {name} needs {} entries", m.functions[f].len())));
            }
            if let Some(v) = table.iter().find(|&&v| v >= j.size) {
                return Err(D::Error::custom(format!("value {v} outside the domain")));
            }
            m.functions[f] = table.clone();
        }
        if j.functions.len() != j.signature.functions.len() {
            return Err(D::Error::custom("every function needs a table"));
        }
        for (name, &v) in &j.constants {
            let c = j.signature.constant(name).ok_or_else(|| D::Error::custom(format!("unknown constant {name}")))?;
            m.set_constant(c, v).map_err(D::Error::custom)?;
        }
        if j.constants.len() != j.signature.constants.len() {
            return Err(D::Error::custom("every constant needs a value"));
        }
        Ok(m)
    }
}
