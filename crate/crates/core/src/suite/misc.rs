//! Criteria 9, 11 and 12: transfer along homomorphisms, regular sequences,
//! and the parser plus run-to-run determinism.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::dist::{order_bundle, random_type};
use super::{err, run, Ctx, Outcome, SuiteConfig, Tally};
use crate::algebra::{regular_report, regular_sequence_from_antichain, BoolAlg, Elem, IndexedAntichain, PrincipalFilter};
use crate::bvalued::BValuedStructure;
use crate::dist::{find_multiplicative_refinement, los_map_of_type, DistError, Distribution, FormulaSequence, Verdict};
use crate::index::IndexSet;
use crate::io;
use crate::logic::{parse, parse_theory, parse_with, Formula, Signature, Term};
use crate::transfer::{
    hom_from_atom_map, los_transfer_check, pull_back_mult_refinement, pull_back_mult_refinement_with, pullback_distribution, pullback_distribution_with, pushforward,
    AlgebraHom, TransferError,
};

const LINEAR: [&str; 3] = ["forall x. !x < x", "forall x, y, z. (x < y & y < z -> x < z)", "forall x, y. (x < y | x = y | y < x)"];

fn is_refinement_in(b: &Distribution, a: &Distribution, u: &PrincipalFilter) -> bool {
    let alg = b.algebra();
    b.index().subsets().all(|s| b.get(s) == s.iter().fold(alg.one(), |acc, i| acc & b.singleton(i)) && b.get(s).leq(a.get(s)) && u.contains(b.get(s)))
}

/// `j(a)` recomputed from the atom map: target atom `y` lies below `j(a)` when `g(y)` lies below `a`.
fn image(j: &AlgebraHom, a: Elem) -> u64 {
    j.atom_map().iter().enumerate().filter(|(_, &x)| a.contains_atom(x)).fold(0, |acc, (y, _)| acc | 1 << y)
}

fn hom_json(j: &AlgebraHom) -> Value {
    io::hom_to(j)
}

pub(crate) fn separation(ctx: &Ctx, t: &mut Tally) -> Outcome {
    let mut rng = ctx.rng(0);
    let bound = ctx.bound(3);
    let sig = Signature::new().with_relation("<", 2);
    let theory = parse_theory(&LINEAR, &sig).expect("fixed axioms parse");
    let mut done = 0;
    let mut attempts = 0;
    while done < 200 && attempts < 20_000 {
        attempts += 1;
        let m = rng.gen_range(1..=ctx.atoms(4));
        let k = rng.gen_range(1..=m.min(ctx.atoms(3)));
        let (src, tgt) = (BoolAlg::new(m).expect("small"), BoolAlg::new(k).expect("small"));
        let g = sample(&mut rng, m, k).into_vec();
        let j = hom_from_atom_map(&src, &tgt, &g, true).map_err(err("hom"))?;
        t.ensure(j.check_homomorphism(), || json!({ "hom": hom_json(&j), "failed": "homomorphism laws" }))?;
        let bundle = order_bundle(&mut rng, &src, ctx.fibers(3));
        let size = rng.gen_range(ctx.index(1)..=ctx.index(3));
        let p = random_type(&mut rng, &bundle, size);
        let host: BValuedStructure = bundle.clone().into();
        let a0 = match los_map_of_type(&host, &p) {
            Ok(a) => a,
            Err(DistError::EmptyJoin(_)) => {
                t.bump("skipped_not_a_type");
                continue;
            }
            Err(e) => return Err(err("los map")(e)),
        };
        let a1 = match pushforward(&j, &a0) {
            Ok(a) => a,
            Err(TransferError::ZeroImage(_)) => {
                t.bump("skipped_zero_image");
                continue;
            }
            Err(e) => return Err(err("pushforward")(e)),
        };
        let cx = |what: &str| json!({ "hom": hom_json(&j), "a0": io::distribution_to(&a0), "type": io::partial_type_to(&p), "failed": what });
        t.ensure(a0.index().subsets().all(|s| a1.get(s).bits() == image(&j, a0.get(s))), || cx("pushforward values"))?;
        // round trips through the source
        let back = pullback_distribution(&j, &a1).map_err(err("pullback"))?;
        t.ensure(back.is_distribution() && pushforward(&j, &back).ok().as_ref() == Some(&a1), || cx("pullback round trip"))?;
        let off_range = src.one().bits() & !j.range().bits();
        let lifts: Vec<Elem> = a1.values().iter().map(|&v| src.from_bits(j.min_preimage(v).bits() | (rng.gen::<u64>() & off_range))).collect();
        let noisy = pullback_distribution_with(&j, &a1, &lifts).map_err(err("noisy pullback"))?;
        t.ensure(noisy.is_distribution() && pushforward(&j, &noisy).ok().as_ref() == Some(&a1), || cx("noisy pullback round trip"))?;
        // an ultrafilter on the target below A0(I)
        let top = a0.get(a0.index());
        let ys: Vec<usize> = (0..k).filter(|&y| top.contains_atom(g[y])).collect();
        if ys.is_empty() {
            t.bump("skipped_no_ultrafilter");
            continue;
        }
        let y = ys[rng.gen_range(0..ys.len())];
        let u1 = PrincipalFilter::ultrafilter_from_atom(&tgt, y).expect("atom");
        let u0 = j.preimage_filter(&u1);
        t.ensure(u0.generator() == src.atom(g[y]), || cx("preimage ultrafilter"))?;
        // refinements move forward
        let b0 = find_multiplicative_refinement(&a0, &u0, false).map_err(err("source refinement"))?;
        let b1 = pushforward(&j, &b0).map_err(err("push refinement"))?;
        t.ensure(is_refinement_in(&b1, &a1, &u1), || cx("forward refinement"))?;
        // and backward
        let c1 = find_multiplicative_refinement(&a1, &u1, false).map_err(err("target refinement"))?;
        let c0 = pull_back_mult_refinement(&j, &a0, &u1, &c1).map_err(err("pull refinement"))?;
        t.ensure(is_refinement_in(&c0, &a0, &u0), || cx("backward refinement"))?;
        let lifts: Vec<Elem> = (0..c1.index_size()).map(|i| src.from_bits(j.min_preimage(c1.singleton(i)).bits() | (rng.gen::<u64>() & off_range))).collect();
        let c0n = pull_back_mult_refinement_with(&j, &a0, &u1, &c1, &lifts).map_err(err("noisy pull refinement"))?;
        t.ensure(is_refinement_in(&c0n, &a0, &u0), || cx("noisy backward refinement"))?;
        // the Łoś criterion on both sides, for the type and for a perturbed table
        let seq = FormulaSequence::from_type(&sig, &p).map_err(err("sequence"))?;
        let drop = rng.gen_range(0..m);
        let perturbed = Distribution::from_fn(&src, a0.index_size(), |s| {
            let v = a0.get(s);
            if s.is_empty() || v.count() == 1 {
                v
            } else {
                src.from_bits(v.bits() & !(1 << drop))
            }
        })
        .map_err(err("perturb"))?;
        for a in [&a0, &perturbed] {
            if !a.is_distribution() || pushforward(&j, a).is_err() {
                continue;
            }
            let rep = los_transfer_check(&j, a, &seq, &theory, bound, ctx.cfg.budget).map_err(err("los transfer"))?;
            if rep.source == Verdict::Unknown || rep.target == Verdict::Unknown {
                t.unknown();
                continue;
            }
            if rep.unseen_source_failure.is_some() && rep.target == Verdict::Yes {
                t.bump("source_failure_outside_range");
                continue;
            }
            t.ensure(rep.agree, || json!({ "hom": hom_json(&j), "a0": io::distribution_to(a), "sequence": io::sequence_to(&seq, &theory), "report": rep }))?;
            t.bump(if rep.source == Verdict::Yes { "los_yes" } else { "los_no" });
        }
        done += 1;
    }
    t.note("instances", done);
    t.ensure(done == 200 || ctx.cfg.is_capped(), || json!({ "error": "too few instances", "found": done, "attempts": attempts }))
}

/// Brute force: every nonzero `b` has a nonzero `c ≤ b` deciding each member.
fn deciding_dense(alg: &BoolAlg, seq: &[Elem]) -> bool {
    let full = alg.one().bits();
    (1..=full).filter(|b| b & !full == 0).all(|b| {
        let mut c = b;
        loop {
            if c != 0 && seq.iter().all(|x| c & x.bits() == 0 || c & !x.bits() == 0) {
                return true;
            }
            if c == 0 {
                return false;
            }
            c = (c - 1) & b;
        }
    })
}

pub(crate) fn regular_sequences(ctx: &Ctx, t: &mut Tally) -> Outcome {
    let mut rng = ctx.rng(0);
    for n in 0..=ctx.index(3) {
        for degree in 1..=2 {
            let labels: Vec<IndexSet> = IndexSet::all(n).filter(|s| !s.is_empty() && s.len() <= degree).collect();
            for variant in 0..8 {
                let with_empty = variant % 2 == 1;
                let extras = rng.gen_range(0..=2);
                let mut sizes: Vec<usize> = labels.iter().map(|_| rng.gen_range(1..=2)).collect();
                let empty_size = if with_empty { 1 } else { 0 };
                if sizes.iter().sum::<usize>() + empty_size + extras > ctx.atoms(10).max(labels.len() + empty_size + extras) {
                    sizes.iter_mut().for_each(|s| *s = 1);
                }
                let total = sizes.iter().sum::<usize>() + empty_size + extras;
                let alg = BoolAlg::new(total.max(1)).map_err(err("algebra"))?;
                let mut next = 0;
                let mut block = |size: usize| {
                    let b = ((1u64 << size) - 1) << next;
                    next += size;
                    alg.from_bits(b)
                };
                let mut entries: Vec<(IndexSet, Elem)> = labels.iter().zip(&sizes).map(|(&s, &z)| (s, block(z))).collect();
                if with_empty {
                    entries.push((IndexSet::EMPTY, block(1)));
                }
                let c = IndexedAntichain::new(&alg, n, entries.clone()).map_err(err("antichain"))?;
                let (seq, report) = regular_sequence_from_antichain(&alg, &c, degree).map_err(err("regular sequence"))?;
                let cx = |what: &str| json!({ "algebra": io::algebra_to(&alg), "antichain": io::indexed_antichain_to(&c), "degree": degree, "failed": what });
                let expected: Vec<u64> = (0..n).map(|i| entries.iter().filter(|(s, _)| s.contains(i)).fold(0, |acc, (_, e)| acc | e.bits())).collect();
                t.ensure(seq.iter().map(|e| e.bits()).eq(expected), || cx("members"))?;
                let small_meets = IndexSet::all(n).filter(|s| s.len() <= degree).all(|s| s.iter().fold(alg.one(), |acc, i| acc & seq[i]) != alg.zero());
                t.ensure(small_meets, || cx("meets of at most k members"))?;
                let cover = (0..alg.atom_count()).all(|e| seq.iter().filter(|x| x.contains_atom(e)).count() <= degree);
                t.ensure(cover, || cx("degree bound"))?;
                t.ensure(deciding_dense(&alg, &seq), || cx("deciding elements"))?;
                t.ensure(report.is_regular(), || cx("library report"))?;
                // too many members above one atom is caught
                if n > degree {
                    let crowded = vec![alg.one(); n];
                    t.ensure(!regular_report(&alg, &crowded, degree).is_regular(), || cx("crowded sequence accepted"))?;
                }
            }
        }
    }
    Ok(())
}

const VARS: [&str; 3] = ["x", "y", "z"];

fn random_term(rng: &mut ChaCha8Rng, bound: &[String], depth: usize) -> Term {
    match rng.gen_range(0..if depth == 0 { 3 } else { 5 }) {
        0 if !bound.is_empty() => Term::Var(bound[rng.gen_range(0..bound.len())].clone()),
        0 | 1 => Term::Const(["c", "d"][rng.gen_range(0..2)].into()),
        2 => Term::Param(rng.gen_range(0..3)),
        3 => Term::App("f".into(), vec![random_term(rng, bound, depth - 1)]),
        _ => Term::App("g".into(), vec![random_term(rng, bound, depth - 1), random_term(rng, bound, depth - 1)]),
    }
}

fn random_formula(rng: &mut ChaCha8Rng, bound: &mut Vec<String>, depth: usize) -> Formula {
    let term = |rng: &mut ChaCha8Rng| random_term(rng, bound, 2);
    if depth == 0 {
        return match rng.gen_range(0..5) {
            0 => Formula::Eq(term(rng), term(rng)),
            1 => Formula::Rel("R".into(), vec![term(rng), term(rng)]),
            2 => Formula::Rel("<".into(), vec![term(rng), term(rng)]),
            3 => Formula::Rel("P".into(), vec![term(rng)]),
            _ => [Formula::True, Formula::False][rng.gen_range(0..2)].clone(),
        };
    }
    let sub = |rng: &mut ChaCha8Rng, bound: &mut Vec<String>| {
        let d = rng.gen_range(0..depth);
        Box::new(random_formula(rng, bound, d))
    };
    match rng.gen_range(0..7) {
        0 => Formula::Not(sub(rng, bound)),
        1 => Formula::And(sub(rng, bound), sub(rng, bound)),
        2 => Formula::Or(sub(rng, bound), sub(rng, bound)),
        3 => Formula::Implies(sub(rng, bound), sub(rng, bound)),
        q => {
            let v = VARS[rng.gen_range(0..VARS.len())].to_string();
            bound.push(v.clone());
            let body = sub(rng, bound);
            bound.pop();
            if q % 2 == 0 {
                Formula::Exists(v, body)
            } else {
                Formula::Forall(v, body)
            }
        }
    }
}

pub(crate) fn parser_and_determinism(ctx: &Ctx, t: &mut Tally) -> Outcome {
    let mut rng = ctx.rng(0);
    let sig = Signature::new().with_relation("R", 2).with_relation("<", 2).with_relation("P", 1).with_function("f", 1).with_function("g", 2).with_constant("c").with_constant("d");
    for _ in 0..1000 {
        let phi = random_formula(&mut rng, &mut Vec::new(), 4);
        let text = phi.to_string();
        let cx = |what: &str| json!({ "formula": text, "debug": format!("{phi:?}"), "failed": what });
        let back = parse(&text).map_err(|e| cx(&e.to_string()))?;
        t.ensure(back == phi, || cx("reparse differs"))?;
        let checked = parse_with(&text, &sig).map_err(|e| cx(&e.to_string()))?;
        t.ensure(checked == phi && checked.to_string() == text, || cx("signature-checked reparse differs"))?;
    }
    // a fixed-seed sub-run twice, byte for byte
    let sub = SuiteConfig { only: vec![7, 11], ..ctx.cfg.clone() };
    let first = run(&sub, false).map_err(err("sub-run"))?;
    let second = run(&sub, false).map_err(err("sub-run"))?;
    let (a, b) = (io::canonical(&first.to_json()), io::canonical(&second.to_json()));
    t.ensure(a == b, || json!({ "failed": "sub-run output differs", "first": a, "second": b }))?;
    t.note("sub_run_bytes", a.len());
    Ok(())
}
