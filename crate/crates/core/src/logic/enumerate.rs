//! Bounded enumeration of formulas, used by every "for all formulas of rank ≤ r" check.
//!
//! Atoms are relation applications over the term pool (variables, then constants,
//! then parameters, then depth-one function terms) and equalities `s = t` between
//! distinct pool terms with `s` listed first. Formulas are closed under `¬`, `∧`,
//! `∃v` and `∀v` for `v` in the variable pool. Size counts formula nodes, with
//! atoms of size 1. The stream is ordered by size, then by construction order.

use std::collections::HashSet;

use super::{Formula, LogicError, Result, Signature, Term};

/// Largest quantifier rank the enumerator accepts.
pub const MAX_ENUM_RANK: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumConfig {
    pub rank: usize,
    /// Variables allowed to occur free in the output.
    pub free_vars: Vec<String>,
    /// Extra variables available only under a quantifier.
    pub bound_vars: Vec<String>,
    pub params: Vec<usize>,
    pub max_size: usize,
    /// Cap on the number of formulas built (intermediate ones included).
    pub max_count: usize,
}

impl EnumConfig {
    /// Sentences of rank ≤ `rank` over the given parameters, with `rank` bound variables `v0, v1, ..`.
    pub fn sentences(rank: usize, params: Vec<usize>, max_size: usize) -> EnumConfig {
        EnumConfig {
            rank,
            free_vars: Vec::new(),
            bound_vars: (0..rank).map(|i| format!("v{i}")).collect(),
            params,
            max_size,
            max_count: 2_000_000,
        }
    }
}

pub fn term_pool(sig: &Signature, vars: &[String], params: &[usize]) -> Vec<Term> {
    let mut base: Vec<Term> = vars.iter().map(|v| Term::Var(v.clone())).collect();
    base.extend(sig.constants.iter().map(|c| Term::Const(c.clone())));
    base.extend(params.iter().map(|&k| Term::Param(k)));
    let mut pool = base.clone();
    for (f, arity) in &sig.functions {
        for args in tuples(&base, *arity) {
            pool.push(Term::App(f.clone(), args));
        }
    }
    pool
}

/// All `k`-tuples over `items`, last position fastest.
fn tuples<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                items.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect();
    }
    out
}

pub fn atoms(sig: &Signature, pool: &[Term]) -> Vec<Formula> {
    let mut out = Vec::new();
    for (r, arity) in &sig.relations {
        for args in tuples(pool, *arity) {
            out.push(Formula::Rel(r.clone(), args));
        }
    }
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            out.push(Formula::Eq(pool[i].clone(), pool[j].clone()));
        }
    }
    out
}

pub fn enumerate_formulas(sig: &Signature, cfg: &EnumConfig) -> Result<Vec<Formula>> {
    if cfg.rank > MAX_ENUM_RANK {
        return Err(LogicError::CapExceeded(format!("rank {} above the cap {MAX_ENUM_RANK}", cfg.rank)));
    }
    let mut vars = cfg.free_vars.clone();
    for v in &cfg.bound_vars {
        if !vars.contains(v) {
            vars.push(v.clone());
        }
    }
    let pool = term_pool(sig, &vars, &cfg.params);
    let base = atoms(sig, &pool);

    // levels[s] holds (formula, rank) pairs of size s.
    let mut levels: Vec<Vec<(Formula, usize)>> = vec![Vec::new()];
    let mut built = 0usize;
    let mut push = |level: &mut Vec<(Formula, usize)>, f: Formula, r: usize| -> Result<()> {
        built += 1;
        if built > cfg.max_count {
            return Err(LogicError::CapExceeded(format!("more than {} formulas", cfg.max_count)));
        }
        level.push((f, r));
        Ok(())
    };
    for size in 1..=cfg.max_size {
        let mut level = Vec::new();
        if size == 1 {
            for a in &base {
                push(&mut level, a.clone(), 0)?;
            }
        } else {
            for (f, r) in &levels[size - 1] {
                push(&mut level, Formula::not(f.clone()), *r)?;
            }
            for left in 1..size - 1 {
                let right = size - 1 - left;
                for (a, ra) in &levels[left] {
                    for (b, rb) in &levels[right] {
                        push(&mut level, Formula::and(a.clone(), b.clone()), (*ra).max(*rb))?;
                    }
                }
            }
            for v in &vars {
                for (f, r) in &levels[size - 1] {
                    if *r < cfg.rank {
                        push(&mut level, Formula::exists(v, f.clone()), r + 1)?;
                    }
                }
                for (f, r) in &levels[size - 1] {
                    if *r < cfg.rank {
                        push(&mut level, Formula::forall(v, f.clone()), r + 1)?;
                    }
                }
            }
        }
        levels.push(level);
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for level in levels {
        for (f, _) in level {
            if f.free_vars().iter().all(|v| cfg.free_vars.contains(v)) && seen.insert(f.to_string()) {
                out.push(f);
            }
        }
    }
    Ok(out)
}
