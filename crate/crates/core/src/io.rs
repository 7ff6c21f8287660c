//! JSON file formats.
//!
//! Every format is decoded from a [`serde_json::Value`] by hand so that a bad
//! field is reported with its JSON pointer. Encoders produce values whose
//! objects have sorted keys; [`canonical`] prints them, and decoding followed
//! by encoding reproduces a canonical file byte for byte.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::algebra::{Antichain, BoolAlg, Elem, IndexedAntichain, PrincipalFilter, MAX_ATOMS};
use crate::bvalued::{check_axioms, make_bundle, Abstract, BValuedStructure, Bundle, ValueConstraint};
use crate::dist::{Distribution, FormulaSequence, PartialType};
use crate::finder::{FinderTask, Structure, DEFAULT_NODE_BUDGET};
use crate::index::{IndexSet, MAX_INDEX};
use crate::logic::{parse_with, Formula, Signature, Theory};
use crate::transfer::{hom_from_atom_map, AlgebraHom, GoodPairState};

/// A well-formed JSON document with a bad field.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{}: {message}", if pointer.is_empty() { "/" } else { pointer.as_str() })]
pub struct FormatError {
    /// RFC 6901 pointer to the offending value; empty for the document root.
    pub pointer: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Syntax(String),
    #[error(transparent)]
    Format(#[from] FormatError),
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

pub fn read_json(path: &Path) -> Result<Value, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| IoError::Syntax(e.to_string()))
}

/// Pretty-printed with sorted keys and a trailing newline.
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

pub fn write_json(path: &Path, v: &Value) -> Result<(), IoError> {
    std::fs::write(path, canonical(v)).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

/// A value together with its location in the document.
#[derive(Clone, Copy)]
pub struct Node<'a> {
    value: &'a Value,
    path: &'a Pointer<'a>,
}

/// Pointer segments as a linked list, so descending never copies the path.
pub enum Pointer<'a> {
    Root,
    Child(&'a Pointer<'a>, String),
}

impl Pointer<'_> {
    fn render(&self) -> String {
        match self {
            Pointer::Root => String::new(),
            Pointer::Child(parent, seg) => format!("{}/{}", parent.render(), seg.replace('~', "~0").replace('/', "~1")),
        }
    }
}

impl<'a> Node<'a> {
    pub fn root(value: &'a Value) -> Node<'a> {
        Node { value, path: &Pointer::Root }
    }

    pub fn pointer(&self) -> String {
        self.path.render()
    }

    pub fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(FormatError { pointer: self.pointer(), message: message.into() })
    }

    pub fn value(&self) -> &'a Value {
        self.value
    }

    fn object(&self) -> Result<&'a Map<String, Value>> {
        match self.value {
            Value::Object(m) => Ok(m),
            _ => self.err("expected an object"),
        }
    }

    fn array(&self) -> Result<&'a Vec<Value>> {
        match self.value {
            Value::Array(a) => Ok(a),
            _ => self.err("expected an array"),
        }
    }

    pub fn usize(&self) -> Result<usize> {
        match self.value.as_u64() {
            Some(n) => Ok(n as usize),
            None => self.err("expected a nonnegative integer"),
        }
    }

    pub fn str(&self) -> Result<&'a str> {
        match self.value.as_str() {
            Some(s) => Ok(s),
            None => self.err("expected a string"),
        }
    }

    /// Runs `f` on a child; the child's pointer lives only for the call.
    pub fn field<T>(&self, name: &str, f: impl FnOnce(Node) -> Result<T>) -> Result<T> {
        match self.object()?.get(name) {
            Some(v) => f(Node { value: v, path: &Pointer::Child(self.path, name.to_string()) }),
            None => self.err(format!("missing field \"{name}\"")),
        }
    }

    pub fn opt_field<T>(&self, name: &str, f: impl FnOnce(Node) -> Result<T>) -> Result<Option<T>> {
        match self.object()?.get(name) {
            Some(Value::Null) | None => Ok(None),
            Some(v) => f(Node { value: v, path: &Pointer::Child(self.path, name.to_string()) }).map(Some),
        }
    }

    pub fn items<T>(&self, mut f: impl FnMut(usize, Node) -> Result<T>) -> Result<Vec<T>> {
        let items = self.array()?;
        let mut out = Vec::with_capacity(items.len());
        for (i, v) in items.iter().enumerate() {
            out.push(f(i, Node { value: v, path: &Pointer::Child(self.path, i.to_string()) })?);
        }
        Ok(out)
    }

    pub fn entries<T>(&self, mut f: impl FnMut(&str, Node) -> Result<T>) -> Result<Vec<T>> {
        let mut out = Vec::new();
        for (k, v) in self.object()? {
            out.push(f(k, Node { value: v, path: &Pointer::Child(self.path, k.clone()) })?);
        }
        Ok(out)
    }

    /// Rejects keys outside `allowed`, so typos do not pass silently.
    pub fn only(&self, allowed: &[&str]) -> Result<()> {
        for k in self.object()?.keys() {
            if !allowed.contains(&k.as_str()) {
                return Node { value: &self.object()?[k], path: &Pointer::Child(self.path, k.clone()) }.err("unknown field");
            }
        }
        Ok(())
    }

    pub fn serde<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.value.clone()).or_else(|e| self.err(e.to_string()))
    }
}

/// Decodes a whole document with `f`.
pub fn decode<T>(v: &Value, f: impl FnOnce(Node) -> Result<T>) -> Result<T> {
    f(Node::root(v))
}

pub fn load<T>(path: &Path, f: impl FnOnce(Node) -> Result<T>) -> Result<T, IoError> {
    let v = read_json(path)?;
    Ok(decode(&v, f)?)
}

// ---- algebras and elements

pub fn algebra_from(n: Node) -> Result<BoolAlg> {
    n.only(&["atoms", "labels"])?;
    let atoms = n.field("atoms", |a| {
        let k = a.usize()?;
        if k == 0 || k > MAX_ATOMS {
            return a.err(format!("atom count must lie in 1..={MAX_ATOMS}"));
        }
        Ok(k)
    })?;
    match n.opt_field("labels", |l| l.items(|_, s| s.str().map(str::to_string)))? {
        None => Ok(BoolAlg::new(atoms).expect("count checked")),
        Some(labels) => {
            if labels.len() != atoms {
                return n.field("labels", |l| l.err(format!("{} labels for {atoms} atoms", labels.len())));
            }
            BoolAlg::with_labels(labels).or_else(|e| n.field("labels", |l| l.err(e.to_string())))
        }
    }
}

pub fn algebra_to(alg: &BoolAlg) -> Value {
    serde_json::to_value(alg).expect("algebras serialize")
}

/// A strictly increasing array of atom indices.
pub fn elem_from(n: Node, alg: &BoolAlg) -> Result<Elem> {
    let atoms = n.items(|_, a| {
        let i = a.usize()?;
        if i >= alg.atom_count() {
            return a.err(format!("atom {i} out of range for P({})", alg.atom_count()));
        }
        Ok(i)
    })?;
    if atoms.windows(2).any(|w| w[0] >= w[1]) {
        return n.err("atoms must be strictly increasing");
    }
    Ok(alg.elem(&atoms).expect("atoms checked"))
}

pub fn nonzero_elem_from(n: Node, alg: &BoolAlg) -> Result<Elem> {
    let e = elem_from(n, alg)?;
    if e.is_zero() {
        return n.err("element must be nonzero");
    }
    Ok(e)
}

pub fn elem_to(e: Elem) -> Value {
    json!(e.to_vec())
}

pub fn filter_from(n: Node, alg: &BoolAlg) -> Result<PrincipalFilter> {
    n.only(&["generator"])?;
    let g = n.field("generator", |g| nonzero_elem_from(g, alg))?;
    Ok(PrincipalFilter::principal(alg, g).expect("generator is nonzero"))
}

pub fn filter_to(f: &PrincipalFilter) -> Value {
    json!({ "generator": elem_to(f.generator()) })
}

pub fn antichain_from(n: Node, alg: &BoolAlg) -> Result<Antichain> {
    let members = n.items(|_, m| nonzero_elem_from(m, alg))?;
    Antichain::new(alg, members).or_else(|e| n.err(e.to_string()))
}

pub fn antichain_to(a: &Antichain) -> Value {
    Value::Array(a.members().iter().map(|&e| elem_to(e)).collect())
}

pub fn index_key_from(key: &str, n: Node, k: usize) -> Result<IndexSet> {
    match IndexSet::parse_key(key) {
        Some(s) if s.is_subset(IndexSet::full(k)) => Ok(s),
        Some(_) => n.err(format!("index set {{{key}}} is not a subset of an index of size {k}")),
        None => n.err(format!("\"{key}\" is not an index-set key")),
    }
}

/// An object from index-set keys to pairwise disjoint elements.
pub fn indexed_antichain_from(n: Node, alg: &BoolAlg, k: usize) -> Result<IndexedAntichain> {
    let entries = n.entries(|key, v| Ok((index_key_from(key, v, k)?, nonzero_elem_from(v, alg)?)))?;
    IndexedAntichain::new(alg, k, entries).or_else(|e| n.err(e.to_string()))
}

pub fn indexed_antichain_to(d: &IndexedAntichain) -> Value {
    Value::Object(d.entries().iter().map(|(s, e)| (s.key(), elem_to(*e))).collect())
}

// ---- formulas

pub fn signature_from(n: Node) -> Result<Signature> {
    let sig: Signature = n.serde()?;
    sig.validate().or_else(|e| n.err(e.to_string()))?;
    Ok(sig)
}

pub fn formula_from(n: Node, sig: &Signature) -> Result<Formula> {
    parse_with(n.str()?, sig).or_else(|e| n.err(e.to_string()))
}

pub fn theory_from(n: Node, sig: &Signature) -> Result<Theory> {
    let axioms = n.items(|_, a| formula_from(a, sig))?;
    Theory::new(axioms).or_else(|e| n.err(e.to_string()))
}

fn texts(fs: &[Formula]) -> Value {
    Value::Array(fs.iter().map(|f| Value::String(f.to_string())).collect())
}

/// `{"signature", "bound", "budget"?, "axioms"?, "require"?, "forbid"?}`.
pub fn finder_task_from(n: Node) -> Result<FinderTask> {
    n.only(&["signature", "bound", "budget", "axioms", "require", "forbid"])?;
    let sig = n.field("signature", signature_from)?;
    let bound = n.field("bound", |b| match b.usize()? {
        k @ 1..=254 => Ok(k),
        _ => b.err("bound must lie in 1..=254"),
    })?;
    let mut task = FinderTask::new(sig.clone(), bound);
    if let Some(b) = n.opt_field("budget", |b| b.usize())? {
        task.budget = b as u64;
    }
    if let Some(t) = n.opt_field("axioms", |a| theory_from(a, &sig))? {
        task = task.with_axioms(t);
    }
    for phi in n.opt_field("require", |r| r.items(|_, f| formula_from(f, &sig)))?.unwrap_or_default() {
        task = task.require(phi);
    }
    for phi in n.opt_field("forbid", |r| r.items(|_, f| formula_from(f, &sig)))?.unwrap_or_default() {
        task = task.forbid(phi);
    }
    Ok(task)
}

pub fn finder_task_to(t: &FinderTask) -> Value {
    json!({
        "signature": t.signature,
        "bound": t.bound,
        "budget": t.budget,
        "axioms": texts(t.axioms.axioms()),
        "require": texts(&t.positive),
        "forbid": texts(&t.negative),
    })
}

// ---- structures

pub fn structure_from(n: Node) -> Result<Structure> {
    n.serde()
}

pub fn structure_to(m: &Structure) -> Value {
    serde_json::to_value(m).expect("structures serialize")
}

/// `{"algebra", "fibers": [structure; atoms], "elements"?: [[fiber value; atoms]]}`.
pub fn bundle_from(n: Node) -> Result<Bundle> {
    n.only(&["kind", "algebra", "fibers", "elements"])?;
    let alg = n.field("algebra", algebra_from)?;
    let fibers = n.field("fibers", |f| f.items(|_, s| structure_from(s)))?;
    if fibers.len() != alg.atom_count() {
        return n.field("fibers", |f| f.err(format!("{} fibers for {} atoms", fibers.len(), alg.atom_count())));
    }
    let elements = n.opt_field("elements", |e| {
        e.items(|_, t| {
            let tuple = t.items(|_, x| x.usize())?;
            if tuple.len() != fibers.len() {
                return t.err("element needs one value per atom");
            }
            if let Some(i) = (0..tuple.len()).find(|&i| tuple[i] >= fibers[i].size()) {
                return t.err(format!("value {} outside fiber {i}", tuple[i]));
            }
            Ok(tuple)
        })
    })?;
    make_bundle(&alg, fibers, elements).or_else(|e| n.err(e.to_string()))
}

pub fn bundle_to(b: &Bundle) -> Value {
    json!({
        "kind": "bundle",
        "algebra": algebra_to(b.algebra()),
        "fibers": b.fibers().iter().map(structure_to).collect::<Vec<_>>(),
        "elements": b.elements(),
    })
}

/// Tables of Boolean values in structure-table order; see [`Abstract`].
pub fn abstract_from(n: Node) -> Result<Abstract> {
    n.only(&["kind", "algebra", "signature", "size", "eq", "relations", "constants", "functions"])?;
    let alg = n.field("algebra", algebra_from)?;
    let sig = n.field("signature", signature_from)?;
    let len = n.field("size", |s| match s.usize()? {
        0 => s.err("size must be positive"),
        k => Ok(k),
    })?;
    let mut abs = Abstract::blank(&alg, &sig, len).or_else(|e| n.err(e.to_string()))?;
    let table = |t: Node, expected: usize| -> Result<Vec<Elem>> {
        let v = t.items(|_, e| elem_from(e, &alg))?;
        if v.len() != expected {
            return t.err(format!("table needs {expected} entries, found {}", v.len()));
        }
        Ok(v)
    };
    abs.eq = n.field("eq", |t| table(t, len * len))?;
    let named = |field: &str, names: Vec<(String, usize)>| -> Result<Vec<Vec<Elem>>> {
        let given = n.opt_field(field, |o| o.entries(|k, t| Ok((k.to_string(), t.pointer()))))?.unwrap_or_default();
        if let Some((k, _)) = given.iter().find(|(k, _)| !names.iter().any(|(m, _)| m == k)) {
            return n.field(field, |o| o.field(k, |t| t.err("not in the signature")));
        }
        names
            .iter()
            .map(|(name, size)| n.field(field, |o| o.field(name, |t| table(t, *size))))
            .collect()
    };
    abs.rels = named("relations", sig.relations.iter().map(|(r, k)| (r.clone(), len.pow(*k as u32))).collect())?;
    abs.consts = named("constants", sig.constants.iter().map(|c| (c.clone(), len)).collect())?;
    abs.funcs = named("functions", sig.functions.iter().map(|(f, k)| (f.clone(), len.pow(*k as u32 + 1))).collect())?;
    check_axioms(&abs).or_else(|e| n.err(e.to_string()))?;
    Ok(abs)
}

pub fn abstract_to(a: &Abstract) -> Value {
    let tab = |v: &[Elem]| Value::Array(v.iter().map(|&e| elem_to(e)).collect());
    let named = |names: Vec<&String>, tables: &[Vec<Elem>]| -> Value { Value::Object(names.into_iter().zip(tables).map(|(n, t)| (n.clone(), tab(t))).collect()) };
    json!({
        "kind": "abstract",
        "algebra": algebra_to(&a.alg),
        "signature": a.sig,
        "size": a.len,
        "eq": tab(&a.eq),
        "relations": named(a.sig.relations.iter().map(|(n, _)| n).collect(), &a.rels),
        "constants": named(a.sig.constants.iter().collect(), &a.consts),
        "functions": named(a.sig.functions.iter().map(|(n, _)| n).collect(), &a.funcs),
    })
}

/// A bundle or abstract table, chosen by `"kind"`.
pub fn bvalued_from(n: Node) -> Result<BValuedStructure> {
    match n.field("kind", |k| k.str().map(str::to_string))?.as_str() {
        "bundle" => bundle_from(n).map(Into::into),
        "abstract" => abstract_from(n).map(Into::into),
        other => n.field("kind", |k| k.err(format!("unknown kind \"{other}\", expected \"bundle\" or \"abstract\""))),
    }
}

pub fn bvalued_to(m: &BValuedStructure) -> Value {
    match m {
        BValuedStructure::Bundle(b) => bundle_to(b),
        BValuedStructure::Abstract(a) => abstract_to(a),
    }
}

// ---- distributions, types, sequences

/// `{"algebra", "index": [0, .., k-1], "values": {"": [..], "0": [..], "0,1": [..], ..}}`.
pub fn distribution_from(n: Node) -> Result<Distribution> {
    n.only(&["algebra", "index", "values"])?;
    let alg = n.field("algebra", algebra_from)?;
    let k = n.field("index", |ix| {
        let v = ix.items(|_, i| i.usize())?;
        if v.iter().enumerate().any(|(p, &i)| p != i) {
            return ix.err("index must be [0, 1, .., k-1]");
        }
        if v.len() > MAX_INDEX {
            return ix.err(format!("index larger than {MAX_INDEX}"));
        }
        Ok(v.len())
    })?;
    n.field("values", |vals| {
        let mut table: Vec<Option<Elem>> = vec![None; 1 << k];
        vals.entries(|key, v| {
            let s = index_key_from(key, v, k)?;
            table[s.position()] = Some(nonzero_elem_from(v, &alg)?);
            Ok(())
        })?;
        if let Some(s) = IndexSet::all(k).find(|s| table[s.position()].is_none()) {
            return vals.err(format!("missing value for {{{}}}", s.key()));
        }
        let table: Vec<Elem> = table.into_iter().map(|v| v.expect("checked")).collect();
        let at = |s: IndexSet, msg: String| vals.field(&s.key(), |v| v.err(msg));
        if !table[0].is_one() {
            return at(IndexSet::EMPTY, "the value at the empty set must be 1".into());
        }
        for s in IndexSet::all(k) {
            if let Some(i) = s.iter().find(|&i| !table[s.position()].leq(table[s.without(i).position()])) {
                return at(s, format!("not below the value at {{{}}}", s.without(i).key()));
            }
        }
        Ok(Distribution::new(&alg, k, table).expect("validated"))
    })
}

pub fn distribution_to(d: &Distribution) -> Value {
    json!({
        "algebra": algebra_to(d.algebra()),
        "index": (0..d.index_size()).collect::<Vec<_>>(),
        "values": Value::Object(d.index().subsets().map(|s| (s.key(), elem_to(d.get(s)))).collect()),
    })
}

/// `{"vars", "formulas", "params"}`, formulas over `sig` with `#k` naming `params[k]`.
pub fn partial_type_from(n: Node, sig: &Signature) -> Result<PartialType> {
    n.only(&["vars", "formulas", "params"])?;
    let vars = n.field("vars", |v| v.items(|_, s| s.str().map(str::to_string)))?;
    let formulas = n.field("formulas", |f| f.items(|_, t| formula_from(t, sig)))?;
    let params = n.field("params", |p| p.items(|_, x| x.usize()))?;
    PartialType::new(vars, formulas, params).or_else(|e| n.err(e.to_string()))
}

pub fn partial_type_to(p: &PartialType) -> Value {
    json!({ "vars": p.vars, "formulas": texts(&p.formulas), "params": p.params })
}

/// `{"signature", "vars", "formulas", "theory"?}`: a sequence and the theory it is read in.
pub fn sequence_from(n: Node) -> Result<(FormulaSequence, Theory)> {
    n.only(&["signature", "vars", "formulas", "theory"])?;
    let sig = n.field("signature", signature_from)?;
    let vars = n.field("vars", |v| v.items(|_, s| s.str().map(str::to_string)))?;
    let formulas = n.field("formulas", |f| f.items(|_, t| formula_from(t, &sig)))?;
    let theory = n.opt_field("theory", |t| theory_from(t, &sig))?.unwrap_or_default();
    let seq = FormulaSequence::new(sig, vars, formulas).or_else(|e| n.err(e.to_string()))?;
    Ok((seq, theory))
}

pub fn sequence_to(seq: &FormulaSequence, theory: &Theory) -> Value {
    json!({
        "signature": seq.signature,
        "vars": seq.vars,
        "formulas": texts(&seq.formulas),
        "theory": texts(theory.axioms()),
    })
}

/// `{"algebra", "signature", "names", "gamma", "lower", "upper", "theory"?, "bound"?, "budget"?}`.
pub struct ConstraintFile {
    pub algebra: BoolAlg,
    pub signature: Signature,
    pub constraint: ValueConstraint,
    pub theory: Theory,
    pub bound: usize,
    pub budget: u64,
}

pub fn constraint_from(n: Node) -> Result<ConstraintFile> {
    n.only(&["algebra", "signature", "names", "gamma", "lower", "upper", "theory", "bound", "budget"])?;
    let algebra = n.field("algebra", algebra_from)?;
    let signature = n.field("signature", signature_from)?;
    let names = n.field("names", |v| v.items(|_, s| s.str().map(str::to_string)))?;
    let gamma = n.field("gamma", |f| f.items(|_, t| formula_from(t, &signature)))?;
    let lower = n.field("lower", |l| l.items(|_, e| elem_from(e, &algebra)))?;
    let upper = n.field("upper", |u| u.items(|_, e| elem_from(e, &algebra)))?;
    let theory = n.opt_field("theory", |t| theory_from(t, &signature))?.unwrap_or_default();
    let bound = n.opt_field("bound", |b| b.usize())?.unwrap_or(3);
    let budget = n.opt_field("budget", |b| b.usize())?.map_or(DEFAULT_NODE_BUDGET, |b| b as u64);
    let constraint = ValueConstraint { names, gamma, lower, upper };
    constraint.validate(&algebra).or_else(|e| n.err(e.to_string()))?;
    Ok(ConstraintFile { algebra, signature, constraint, theory, bound, budget })
}

pub fn constraint_to(c: &ConstraintFile) -> Value {
    let v = &c.constraint;
    json!({
        "algebra": algebra_to(&c.algebra),
        "signature": c.signature,
        "names": v.names,
        "gamma": texts(&v.gamma),
        "lower": v.lower.iter().map(|&e| elem_to(e)).collect::<Vec<_>>(),
        "upper": v.upper.iter().map(|&e| elem_to(e)).collect::<Vec<_>>(),
        "theory": texts(c.theory.axioms()),
        "bound": c.bound,
        "budget": c.budget,
    })
}

// ---- homomorphisms and good pairs

/// `{"source", "target", "atom_map": {target atom: source atom}}`; the map must be injective.
pub fn hom_from(n: Node) -> Result<AlgebraHom> {
    n.only(&["source", "target", "atom_map"])?;
    let source = n.field("source", algebra_from)?;
    let target = n.field("target", algebra_from)?;
    let g = n.field("atom_map", |m| {
        let mut g: Vec<Option<usize>> = vec![None; target.atom_count()];
        m.entries(|key, v| {
            let y = match key.parse::<usize>() {
                Ok(y) if y < target.atom_count() => y,
                _ => return v.err(format!("\"{key}\" is not an atom of the target")),
            };
            let x = v.usize()?;
            if x >= source.atom_count() {
                return v.err(format!("atom {x} out of range for the source"));
            }
            if let Some(other) = g.iter().position(|&s| s == Some(x)) {
                return v.err(format!("source atom {x} is already the image of target atom {other}"));
            }
            g[y] = Some(x);
            Ok(())
        })?;
        match g.iter().position(Option::is_none) {
            Some(y) => m.err(format!("target atom {y} is unmapped")),
            None => Ok(g.into_iter().map(|x| x.expect("checked")).collect::<Vec<_>>()),
        }
    })?;
    hom_from_atom_map(&source, &target, &g, true).or_else(|e| n.err(e.to_string()))
}

pub fn hom_to(j: &AlgebraHom) -> Value {
    json!({
        "source": algebra_to(j.source()),
        "target": algebra_to(j.target()),
        "atom_map": Value::Object(j.atom_map().iter().enumerate().map(|(y, &x)| (y.to_string(), json!(x))).collect()),
    })
}

/// `{"source", "target", "designated": [[e0, e1]], "reserve": [antichain], "filter"}`.
pub fn good_pair_from(n: Node) -> Result<GoodPairState> {
    n.only(&["source", "target", "designated", "reserve", "filter"])?;
    let source = n.field("source", algebra_from)?;
    let target = n.field("target", algebra_from)?;
    let designated = n.field("designated", |d| {
        d.items(|_, p| {
            let pair = p.items(|i, e| elem_from(e, if i == 0 { &source } else { &target }))?;
            match pair[..] {
                [a, b] => Ok((a, b)),
                _ => p.err("expected a pair"),
            }
        })
    })?;
    let reserve = n.field("reserve", |r| r.items(|_, a| antichain_from(a, &source)))?;
    let filter = n.field("filter", |f| filter_from(f, &source))?;
    GoodPairState::new(&source, &target, designated, reserve, filter).or_else(|e| n.err(e.to_string()))
}

pub fn good_pair_to(s: &GoodPairState) -> Value {
    json!({
        "source": algebra_to(&s.source),
        "target": algebra_to(&s.target),
        "designated": s.designated.iter().map(|(a, b)| json!([elem_to(*a), elem_to(*b)])).collect::<Vec<_>>(),
        "reserve": s.reserve.iter().map(antichain_to).collect::<Vec<_>>(),
        "filter": filter_to(&s.filter),
    })
}

/// Input of one refinement step: `{"distribution", "antichain", "filter"}`.
pub fn step_from(n: Node) -> Result<(Distribution, IndexedAntichain, PrincipalFilter)> {
    n.only(&["distribution", "antichain", "filter"])?;
    let a = n.field("distribution", distribution_from)?;
    let d = n.field("antichain", |c| indexed_antichain_from(c, a.algebra(), a.index_size()))?;
    let e = n.field("filter", |f| filter_from(f, a.algebra()))?;
    Ok((a, d, e))
}

pub fn step_to(a: &Distribution, d: &IndexedAntichain, e: &PrincipalFilter) -> Value {
    json!({ "distribution": distribution_to(a), "antichain": indexed_antichain_to(d), "filter": filter_to(e) })
}
