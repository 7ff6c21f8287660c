//! Criteria 1-4: evaluation, specialization, ultrapowers, compactness.

use rand::seq::{index::sample, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::oracle::structures_up_to;
use super::{err, par_map, Ctx, Outcome, Tally};
use crate::algebra::{BoolAlg, Elem, PrincipalFilter};
use crate::bvalued::gen::{random_bundle, rc_sig};
use crate::bvalued::{
    assignments, bundle_to_abstract, check_specializations, compactness_check_and_synthesize, fullness_check, specialize, BValuedStructure, Bundle,
    CompactnessResult, CoordEngine, FormulaFamily, RecursiveEngine, ValueConstraint,
};
use crate::finder::Structure;
use crate::io;
use crate::logic::{compile, enumerate_formulas, EnumConfig, Formula, Signature, Term, Theory};
use crate::ultrapower::{boolean_ultrapower, check_pre_los, los_check, DEFAULT_ELEMENT_CAP};

const BUNDLES_PER_ALGEBRA: usize = 50;

/// The random bundles shared by criteria 1 and 2.
fn bundle_family(ctx: &Ctx) -> Vec<Bundle> {
    let mut rng = ctx.shared_rng(1);
    let sig = rc_sig();
    let mut out = Vec::new();
    for n in 1..=ctx.atoms(3) {
        let alg = BoolAlg::new(n).expect("small");
        for _ in 0..BUNDLES_PER_ALGEBRA {
            out.push(random_bundle(&mut rng, &alg, &sig, ctx.fibers(3)));
        }
    }
    out
}

fn family(ctx: &Ctx) -> FormulaFamily {
    FormulaFamily { rank: ctx.rank(2), params: 2, max_size: 4, max_count: 2_000_000 }
}

fn mutant_args(ctx: &Ctx) -> Vec<String> {
    match ctx.cfg.mutant {
        super::Mutant::None => vec![],
        super::Mutant::Negation => vec!["--mutant".into(), "negation".into()],
    }
}

fn join(ps: &[usize]) -> String {
    ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
}

pub(crate) fn dual_evaluation(ctx: &Ctx, t: &mut Tally) -> Outcome {
    let sig = rc_sig();
    let formulas = family(ctx).sentences(&sig).map_err(err("enumerate"))?;
    let compiled = formulas.iter().map(|f| compile(f, &sig, &[])).collect::<Result<Vec<_>, _>>().map_err(err("compile"))?;
    let bundles = bundle_family(ctx);
    // parameter pools: up to three elements per bundle
    let mut rng = ctx.rng(0);
    let pools: Vec<Vec<usize>> = bundles.iter().map(|b| sample(&mut rng, b.len(), b.len().min(3)).into_vec()).collect();
    let work: Vec<(&Bundle, &Vec<usize>)> = bundles.iter().zip(&pools).collect();
    let mutation = ctx.cfg.mutant.mutation();
    let results = par_map(&work, |(b, pool)| {
        let rec = RecursiveEngine::new(&(*b).clone().into()).with_mutation(mutation);
        let coord = CoordEngine::new(b);
        let mut n = 0u64;
        for (phi, c) in formulas.iter().zip(&compiled) {
            let mut env = vec![0; c.slots.max(1)];
            for ps in assignments(phi, 2, pool) {
                let v = rec.eval_compiled(&c.formula, &mut env, &ps);
                let w = coord.eval_compiled(&c.formula, &env, &ps);
                n += 1;
                if v != w {
                    return Err((phi.to_string(), ps, v, w));
                }
            }
        }
        Ok(n)
    });
    t.note("bundles", bundles.len());
    t.note("formulas", formulas.len());
    let mut evaluations = 0;
    for ((b, _), r) in work.iter().zip(results) {
        match r {
            Ok(n) => {
                t.passed(1);
                evaluations += n;
            }
            Err((phi, ps, v, w)) => {
                let mut replay = vec!["eval".to_string(), "@structure".into(), phi.clone(), "--params".into(), join(&ps), "--compare".into()];
                replay.extend(mutant_args(ctx));
                return t.ensure(false, || {
                    json!({
                        "structure": io::bundle_to(b),
                        "formula": phi,
                        "params": ps,
                        "recursive": v.to_vec(),
                        "coordinatewise": w.to_vec(),
                        "replay": replay,
                    })
                });
            }
        }
    }
    t.note("evaluations", evaluations);
    Ok(())
}

pub(crate) fn specialization(ctx: &Ctx, t: &mut Tally) -> Outcome {
    let fam = family(ctx);
    let bundles = bundle_family(ctx);
    let results = par_map(&bundles, |b| -> Result<u64, Value> {
        let alg = b.algebra();
        let mut n = 0;
        for m in [BValuedStructure::from(b.clone()), bundle_to_abstract(b).into()] {
            let specs = (0..alg.atom_count())
                .map(|e| specialize(&m, &PrincipalFilter::ultrafilter_from_atom(alg, e).expect("atom in range")))
                .collect::<Result<Vec<_>, _>>()
                .map_err(err("specialize"))?;
            if let Some((e, formula, params)) = check_specializations(&m, &specs, &fam).map_err(err("check"))? {
                return Err(json!({
                    "structure": io::bvalued_to(&m),
                    "atom": e,
                    "formula": formula,
                    "params": params,
                    "replay": ["specialize", "@structure", "--atom", e.to_string(), "--rank", fam.rank.to_string()],
                }));
            }
            n += specs.len() as u64;
        }
        Ok(n)
    });
    t.note("bundles", bundles.len());
    t.note("representations", ["bundle", "abstract"]);
    for r in results {
        t.passed(r?);
    }
    Ok(())
}

fn rc_structure(rng: &mut ChaCha8Rng, size: usize) -> Structure {
    let mut m = Structure::new(&rc_sig(), size).expect("nonempty");
    for a in 0..size {
        for b in 0..size {
            m.set_relation(0, &[a, b], rng.gen_bool(0.5)).expect("in range");
        }
    }
    m.set_constant(0, rng.gen_range(0..size)).expect("in range");
    m
}

/// `iso` maps the quotient bijectively onto `m`, preserving `R` and `c`.
fn is_rc_isomorphism(q: &Structure, m: &Structure, iso: &[usize]) -> bool {
    let n = m.size();
    let mut seen = vec![false; n];
    if q.size() != n || iso.len() != n || iso.iter().any(|&x| x >= n || std::mem::replace(&mut seen[x], true)) {
        return false;
    }
    (0..n).all(|a| (0..n).all(|b| q.relation_holds(0, &[a, b]) == m.relation_holds(0, &[iso[a], iso[b]]))) && iso[q.constant(0)] == m.constant(0)
}

pub(crate) fn ultrapower(ctx: &Ctx, t: &mut Tally) -> Outcome {
    let mut rng = ctx.rng(0);
    let fam = FormulaFamily { params: 1, ..family(ctx) };
    let mut cases = Vec::new();
    for size in 1..=ctx.fibers(3) {
        for n in 1..=ctx.atoms(2) {
            for _ in 0..4 {
                cases.push((rc_structure(&mut rng, size), n));
            }
        }
    }
    t.note("structures", cases.len());
    let results = par_map(&cases, |(m, n)| -> Result<u64, Value> {
        let alg = BoolAlg::new(*n).expect("small");
        let replay = json!(["ultrapower", "check", "@structure", "--atoms", n.to_string(), "--rank", fam.rank.to_string()]);
        let cx = |what: &str, detail: Value| json!({ "structure": io::structure_to(m), "atoms": n, "failed": what, "detail": detail, "replay": replay });
        let up = boolean_ultrapower(m, &alg, DEFAULT_ELEMENT_CAP).map_err(err("ultrapower"))?;
        let full = fullness_check(&up.as_structure(), &fam).map_err(err("fullness"))?;
        if !full.full {
            return Err(cx("fullness", json!(full)));
        }
        let pre = check_pre_los(&up, &fam).map_err(err("pre-los"))?;
        if !pre.elementary {
            return Err(cx("pre-los elementary", json!(pre)));
        }
        for e in 0..*n {
            let u = PrincipalFilter::ultrafilter_from_atom(&alg, e).expect("atom in range");
            let los = los_check(&up, &u, &fam).map_err(err("los"))?;
            let quotient = specialize(&up.as_structure(), &u).map_err(err("specialize"))?.structure;
            if !los.elementary.elementary || !los.isomorphism_verified || !is_rc_isomorphism(&quotient, m, &los.isomorphism) {
                return Err(cx("los embedding", json!(los)));
            }
        }
        Ok(2 + *n as u64)
    });
    for r in results {
        t.passed(r?);
    }
    Ok(())
}

pub(crate) fn compactness(ctx: &Ctx, t: &mut Tally) -> Outcome {
    let sig = Signature::new().with_relation("R", 2);
    let names = vec!["a".to_string(), "b".to_string()];
    let expanded = sig.extend_constants(&names).map_err(err("signature"))?;
    let bound = ctx.bound(3);
    let pool = enumerate_formulas(&sig, &EnumConfig::sentences(1, vec![0, 1], 3)).map_err(err("enumerate"))?;
    // truth of every pool formula in every small structure, parameters read as constants
    let structures = structures_up_to(&expanded, bound);
    let as_const = |phi: &Formula| phi.map_params(&|k| Term::Const(names[k].clone()));
    let compiled = pool.iter().map(|phi| compile(&as_const(phi), &expanded, &[])).collect::<Result<Vec<_>, _>>().map_err(err("compile"))?;
    let truth: Vec<Vec<bool>> = par_map(&compiled, |c| {
        let mut env = vec![0; c.slots.max(1)];
        structures.iter().map(|m| m.eval(&c.formula, &mut env, &[])).collect()
    });
    t.note("pool", pool.len());
    t.note("oracle_structures", structures.len());
    let mut rng = ctx.rng(0);
    let mut instances = Vec::new();
    for _ in 0..200 {
        let n = rng.gen_range(2..=3).min(ctx.atoms(3));
        let alg = BoolAlg::new(n).expect("small");
        let elems: Vec<Elem> = alg.elements().collect();
        let k = rng.gen_range(1..=4);
        let picks: Vec<usize> = (0..k).map(|_| rng.gen_range(0..pool.len())).collect();
        let lower: Vec<Elem> = (0..k).map(|_| *elems.choose(&mut rng).expect("nonempty")).collect();
        let upper: Vec<Elem> = lower.iter().map(|&l| l | *elems.choose(&mut rng).expect("nonempty")).collect();
        instances.push((alg, picks, lower, upper));
    }
    let budget = ctx.cfg.budget;
    let results = par_map(&instances, |(alg, picks, lower, upper)| -> Result<Option<u64>, Value> {
        let vc = ValueConstraint { names: names.clone(), gamma: picks.iter().map(|&i| pool[i].clone()).collect(), lower: lower.clone(), upper: upper.clone() };
        let solvable: Vec<bool> = (0..alg.atom_count())
            .map(|e| {
                (0..structures.len()).any(|s| {
                    picks.iter().enumerate().all(|(i, &f)| (!lower[i].contains_atom(e) || truth[f][s]) && (upper[i].contains_atom(e) || !truth[f][s]))
                })
            })
            .collect();
        let cx = |what: &str| {
            json!({
                "algebra": io::algebra_to(alg),
                "gamma": vc.gamma.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                "lower": lower.iter().map(|e| e.to_vec()).collect::<Vec<_>>(),
                "upper": upper.iter().map(|e| e.to_vec()).collect::<Vec<_>>(),
                "oracle_solvable": solvable,
                "failed": what,
            })
        };
        match compactness_check_and_synthesize(alg, &sig, &vc, &Theory::empty(), bound, budget).map_err(err("synthesize"))? {
            CompactnessResult::Unknown { .. } => Ok(None),
            CompactnessResult::NoStructure { atom } => {
                if solvable[atom] {
                    return Err(cx("finder reported no structure at a solvable atom"));
                }
                Ok(Some(0))
            }
            CompactnessResult::Synthesized { bundle, tau } => {
                if !solvable.iter().all(|&s| s) {
                    return Err(cx("synthesized although some atom is unsolvable"));
                }
                let coord = CoordEngine::new(&bundle);
                for (i, phi) in vc.gamma.iter().enumerate() {
                    let v = coord.eval(phi, &tau).map_err(err("evaluate"))?;
                    if !lower[i].leq(v) || !v.leq(upper[i]) {
                        return Err(cx("synthesized value outside its bounds"));
                    }
                }
                Ok(Some(1))
            }
        }
    });
    for r in results {
        match r? {
            None => t.unknown(),
            Some(s) => {
                t.bump(if s == 1 { "synthesized" } else { "no_structure" });
                t.passed(1);
            }
        }
    }
    Ok(())
}
