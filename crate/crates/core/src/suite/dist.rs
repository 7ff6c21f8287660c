//! Criteria 5-8 and 10: types and refinements, goodness, witness sets,
//! refinement steps, and the Łoś criterion against its definition.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index::sample, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::oracle::{down_sets, structures_up_to};
use super::{err, par_map, Ctx, Outcome, Tally};
use crate::algebra::{BoolAlg, Elem, IndexedAntichain, PrincipalFilter};
use crate::bvalued::{make_bundle, BValuedStructure, Bundle, CoordEngine, RecursiveEngine};
use crate::dist::{
    enumerate_distributions, find_multiplicative_refinement, goodness_witness_sets, is_good, is_los_map, is_possibility, los_map_of_type,
    realization_to_mult_refinement, realize_from_mult_refinement, DistError, Distribution, FormulaSequence, PartialType, Verdict,
};
use crate::finder::Structure;
use crate::index::IndexSet;
use crate::io;
use crate::logic::{compile, parse_theory, parse_with, Signature, Term, Theory};
use crate::transfer::{refinement_step, TransferError};

pub(crate) fn order(n: usize) -> Structure {
    let sig = Signature::new().with_relation("<", 2);
    let mut s = Structure::new(&sig, n).expect("nonempty");
    for a in 0..n {
        for b in a + 1..n {
            s.set_relation(0, &[a, b], true).expect("in range");
        }
    }
    s
}

pub(crate) const TYPE_POOL: [&str; 6] = ["#0 < x", "x < #1", "#1 < x", "x < #0", "!x = #0", "!x = #1"];

/// A full-product bundle of finite linear orders.
pub(crate) fn order_bundle(rng: &mut ChaCha8Rng, alg: &BoolAlg, max_fiber: usize) -> Bundle {
    let lo = 2.min(max_fiber);
    let fibers = (0..alg.atom_count()).map(|_| order(rng.gen_range(lo..=max_fiber))).collect();
    make_bundle(alg, fibers, None).expect("full product")
}

/// A random type in `x` over two random parameters.
pub(crate) fn random_type(rng: &mut ChaCha8Rng, m: &Bundle, k: usize) -> PartialType {
    let sig = m.signature();
    let formulas = sample(rng, TYPE_POOL.len(), k).into_iter().map(|i| parse_with(TYPE_POOL[i], sig).expect("pool parses")).collect();
    let params = vec![rng.gen_range(0..m.len()), rng.gen_range(0..m.len())];
    PartialType::new(vec!["x".into()], formulas, params).expect("well formed")
}

/// `||φ_i(b)||` for each formula, by the coordinatewise engine.
fn coord_values(m: &Bundle, p: &PartialType, b: usize) -> Result<Vec<Elem>, Value> {
    let coord = CoordEngine::new(m);
    let slot = Term::Param(p.params.len());
    let mut params = p.params.clone();
    params.push(b);
    p.formulas.iter().map(|phi| coord.eval(&phi.substitute("x", &slot).map_err(err("substitute"))?, &params).map_err(err("evaluate"))).collect()
}

fn type_json(m: &Bundle, p: &PartialType) -> Value {
    json!({ "structure": io::bundle_to(m), "type": io::partial_type_to(p) })
}

pub(crate) fn type_round_trip(ctx: &Ctx, t: &mut Tally) -> Outcome {
    let mut rng = ctx.rng(0);
    let mut done = 0;
    let mut attempts = 0;
    while done < 100 && attempts < 10_000 {
        attempts += 1;
        let alg = BoolAlg::new(rng.gen_range(1..=ctx.atoms(3))).expect("small");
        let m = order_bundle(&mut rng, &alg, ctx.fibers(4));
        let k = rng.gen_range(ctx.index(1)..=ctx.index(3));
        let p = random_type(&mut rng, &m, k);
        let host: BValuedStructure = m.clone().into();
        let los = match los_map_of_type(&host, &p) {
            Ok(l) => l,
            Err(DistError::EmptyJoin(_)) => {
                t.bump("skipped_not_a_type");
                continue;
            }
            Err(e) => return Err(err("los map")(e)),
        };
        let e = rng.gen_range(0..alg.atom_count());
        let u = PrincipalFilter::ultrafilter_from_atom(&alg, e).expect("atom in range");
        let mut realizers = Vec::new();
        for b in 0..m.len() {
            if coord_values(&m, &p, b)?.iter().all(|v| v.contains_atom(e)) {
                realizers.push(b);
            }
        }
        let Some(&b) = realizers.choose(&mut rng) else {
            t.bump("skipped_unrealized");
            continue;
        };
        let cx = |hop: &str, detail: Value| json!({ "instance": type_json(&m, &p), "ultrafilter_atom": e, "realizer": b, "hop": hop, "detail": detail });
        // realization to refinement
        let r = realization_to_mult_refinement(&host, &p, &[b], &u).map_err(err("realization to refinement"))?;
        let vals = coord_values(&m, &p, b)?;
        let expected = Distribution::multiplicative(&alg, &vals).map_err(err("meets"))?;
        t.ensure(r == expected && r.refines(&los).unwrap_or(false) && r.is_in_filter(&u), || cx("refinement", json!({ "got": io::distribution_to(&r) })))?;
        // refinement to realization
        let real = realize_from_mult_refinement(&m, &p, &r, &u).map_err(err("refinement to realization"))?;
        let back = coord_values(&m, &p, real.elements[0])?;
        let gen = u.generator();
        let realizes = back.iter().enumerate().all(|(i, v)| u.contains(*v) && (r.singleton(i) & gen).leq(*v));
        t.ensure(realizes, || cx("realization", json!({ "elements": real.elements, "values": back.iter().map(|v| v.to_vec()).collect::<Vec<_>>() })))?;
        // and once more to a refinement
        let r2 = realization_to_mult_refinement(&host, &p, &real.elements, &u).map_err(err("second refinement"))?;
        t.ensure(r2.is_multiplicative() && r2.refines(&los).unwrap_or(false) && r2.is_in_filter(&u), || cx("second refinement", io::distribution_to(&r2)))?;
        done += 1;
    }
    t.note("instances", done);
    t.ensure(done == 100 || ctx.cfg.is_capped(), || json!({ "error": "too few type instances", "found": done, "attempts": attempts }))
}

/// Distributions in `f` over `k` indices, counted over all tables.
fn brute_count(alg: &BoolAlg, f: &PrincipalFilter, k: usize) -> usize {
    let allowed: Vec<Elem> = alg.elements().filter(|&v| f.contains(v)).collect();
    let cells = (1usize << k) - 1;
    let mut digits = vec![0usize; cells];
    let mut count = 0;
    loop {
        let value = |s: usize| if s == 0 { alg.one() } else { allowed[digits[s - 1]] };
        let monotone = (1..1usize << k).all(|s| (0..k).filter(|i| s >> i & 1 == 1).all(|i| value(s).leq(value(s & !(1 << i)))));
        count += monotone as usize;
        let mut i = 0;
        loop {
            if i == cells {
                return count;
            }
            digits[i] += 1;
            if digits[i] < allowed.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

pub(crate) fn goodness(ctx: &Ctx, t: &mut Tally) -> Outcome {
    let mut total = 0usize;
    for n in 1..=ctx.atoms(3) {
        let alg = BoolAlg::new(n).expect("small");
        for k in 0..=ctx.index(3) {
            for f in PrincipalFilter::all(&alg) {
                let cx = |what: &str| json!({ "algebra": io::algebra_to(&alg), "index_size": k, "filter": io::filter_to(&f), "failed": what });
                let report = is_good(&f, &alg, k, 1 << 20).map_err(err("is_good"))?;
                t.ensure(report.good && report.witnesses_verified == report.distributions, || cx("library report"))?;
                t.ensure(report.distributions == brute_count(&alg, &f, k), || cx("distribution count"))?;
                for a in enumerate_distributions(&alg, k, Some(&f), 1 << 20).map_err(err("enumerate"))? {
                    let w = find_multiplicative_refinement(&a, &f, false).map_err(err("refine"))?;
                    let ok = a.index().subsets().all(|s| {
                        let meet = s.iter().fold(alg.one(), |acc, i| acc & w.singleton(i));
                        w.get(s) == meet && w.get(s).leq(a.get(s)) && f.contains(w.get(s))
                    });
                    t.ensure(ok, || json!({ "distribution": io::distribution_to(&a), "witness": io::distribution_to(&w), "filter": io::filter_to(&f) }))?;
                    total += 1;
                }
            }
        }
    }
    t.note("witnesses_verified", total);
    Ok(())
}

pub(crate) fn witness_sets(ctx: &Ctx, t: &mut Tally) -> Outcome {
    const DEDEKIND: [usize; 5] = [2, 3, 6, 20, 168];
    let mut counts = BTreeMap::new();
    for (k, &expected) in DEDEKIND.iter().enumerate().take(ctx.index(4) + 1) {
        let families = down_sets(k);
        t.ensure(families.len() == expected, || json!({ "index_size": k, "down_sets": families.len(), "expected": expected }))?;
        counts.insert(k.to_string(), families.len());
        let s = IndexSet::full(k);
        for j in &families {
            let sets = goodness_witness_sets(s, j).map_err(err("witness sets"))?;
            let by_index: BTreeMap<usize, &BTreeSet<usize>> = sets.iter().map(|(i, a)| (*i, a)).collect();
            for sub in s.subsets().filter(|x| !x.is_empty()) {
                let mut members = sub.iter().map(|i| by_index[&i]);
                let first = members.next().expect("nonempty").clone();
                let common = members.fold(first, |acc, a| acc.intersection(a).copied().collect());
                t.ensure(common.is_empty() != j.contains(&sub), || {
                    json!({ "s": s.key(), "family": j.iter().map(|x| x.key()).collect::<Vec<_>>(), "t": sub.key(), "sets": sets })
                })?;
            }
        }
    }
    t.note("down_sets", counts);
    Ok(())
}

pub(crate) fn refinement_step_check(ctx: &Ctx, t: &mut Tally) -> Outcome {
    let mut rng = ctx.rng(0);
    let max_atoms = ctx.atoms(8);
    let kmax = ctx.index(3).min(max_atoms.ilog2() as usize);
    for _ in 0..1000 {
        let k = rng.gen_range(0..=kmax);
        let labels: Vec<IndexSet> = IndexSet::all(k).collect();
        let n = rng.gen_range(labels.len()..=max_atoms);
        let alg = BoolAlg::new(n).expect("small");
        let full = alg.one().bits();
        let mut atoms: Vec<usize> = (0..n).collect();
        atoms.shuffle(&mut rng);
        let mut blocks: Vec<u64> = (0..labels.len()).map(|m| 1 << atoms[m]).collect();
        for &a in &atoms[labels.len()..] {
            let r = rng.gen_range(0..=labels.len());
            if r < labels.len() {
                blocks[r] |= 1 << a;
            }
        }
        let d = IndexedAntichain::new(&alg, k, labels.iter().zip(&blocks).map(|(&s, &b)| (s, alg.from_bits(b))).collect()).map_err(err("antichain"))?;
        let top = d.get(IndexSet::full(k)).expect("every subset labeled");
        // compatible instances share an atom of d_I with every value and the filter
        let compatible = rng.gen_bool(0.75);
        let p = if compatible { top.atoms().next().expect("nonzero") } else { rng.gen_range(0..n) };
        let noise: Vec<u64> = (0..labels.len()).map(|_| (rng.gen::<u64>() & full) | 1 << p).collect();
        let a = Distribution::from_fn(&alg, k, |s| s.subsets().filter(|x| !x.is_empty()).fold(alg.one(), |acc, x| acc & alg.from_bits(noise[x.position()])))
            .map_err(err("distribution"))?;
        let gen = a.get(a.index()) & alg.from_bits((rng.gen::<u64>() & full) | 1 << p);
        let e = PrincipalFilter::principal(&alg, gen).map_err(err("filter"))?;
        let expected = |s: IndexSet| if s.is_empty() { alg.one() } else { labels.iter().filter(|x| s.is_subset(**x)).fold(alg.zero(), |acc, &x| acc | (a.get(x) & d.get(x).expect("labeled"))) };
        let cx = |what: &str| json!({ "step": io::step_to(&a, &d, &e), "failed": what });
        match refinement_step(&e, &d, &a) {
            Ok((b, e2)) => {
                let meets = a.index().subsets().all(|s| b.get(s) == s.iter().fold(alg.one(), |acc, i| acc & b.singleton(i)));
                t.ensure(a.index().subsets().all(|s| b.get(s) == expected(s)), || cx("values"))?;
                t.ensure(meets, || cx("multiplicative"))?;
                t.ensure(a.index().subsets().filter(|s| !s.is_empty()).all(|s| b.get(s).leq(a.get(s))), || cx("refines off the empty set"))?;
                let all = b.values().iter().fold(gen, |acc, &v| acc & v);
                t.ensure(!all.is_zero() && e2.generator() == all, || cx("finite intersection property"))?;
                t.bump(if compatible { "compatible" } else { "incompatible_ok" });
            }
            Err(TransferError::NoFip { index, .. }) => {
                let zero = (gen & expected(index)).is_zero() || a.index().subsets().fold(gen, |acc, s| acc & expected(s)).is_zero();
                t.ensure(!compatible && zero, || cx("reported no common lower bound"))?;
                t.bump("incompatible_nofip");
            }
            Err(other) => return Err(cx(&other.to_string())),
        }
    }
    Ok(())
}

/// A sequence, its theory, and a label for the report.
fn tiny_instances(max_index: usize) -> Vec<(String, FormulaSequence, Theory)> {
    let eq = Signature::new();
    let lt = Signature::new().with_relation("<", 2);
    let specs: [(&Signature, [&str; 2], Vec<&str>, &str); 7] = [
        (&eq, ["x = y0", "x = y1"], vec![], "eq"),
        (&eq, ["x = y0", "x = y1"], vec!["forall x, y. x = y"], "eq/one-element"),
        (&eq, ["!x = y0", "!x = y1"], vec!["forall x, y, z. (x = y | x = z | y = z)"], "neq/at-most-two"),
        (&eq, ["!x = y0", "x = y1"], vec!["exists x, y. !x = y"], "mixed/two-elements"),
        (&lt, ["y0 < x", "x < y1"], vec![], "between"),
        (&lt, ["y0 < x", "x < y1"], vec!["forall x. !x < x", "forall x, y, z. (x < y & y < z -> x < z)", "forall x, y. (x < y | x = y | y < x)"], "between/linear"),
        (&lt, ["y0 < x", "y1 < x"], vec!["forall x. !x < x", "forall x, y. (x < y -> !y < x)"], "above/asymmetric"),
    ];
    let mut out = Vec::new();
    for (sig, formulas, theory, name) in specs {
        for len in 0..=max_index.min(2) {
            let fs = formulas[..len].iter().map(|f| parse_with(f, sig).expect("fixed formulas parse")).collect();
            let seq = FormulaSequence::new(sig.clone(), vec!["x".into()], fs).expect("disjoint parameters");
            out.push((format!("{name}/{len}"), seq, parse_theory(&theory, sig).expect("fixed theory parses")));
        }
    }
    out
}

/// Every table over `k` indices with nonzero values and 1 at the empty set.
fn all_tables(alg: &BoolAlg, k: usize) -> Vec<Distribution> {
    let nonzero: Vec<Elem> = alg.elements().filter(|v| !v.is_zero()).collect();
    let cells = (1usize << k) - 1;
    let mut out = Vec::new();
    let mut digits = vec![0usize; cells];
    loop {
        let values = std::iter::once(alg.one()).chain(digits.iter().map(|&d| nonzero[d])).collect();
        out.push(Distribution::from_table(alg, k, values).expect("table has the right size"));
        let mut i = 0;
        loop {
            if i == cells {
                return out;
            }
            digits[i] += 1;
            if digits[i] < nonzero.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

fn is_monotone(a: &Distribution) -> bool {
    a.index().subsets().all(|s| s.iter().all(|i| a.get(s).leq(a.get(s.without(i)))))
}

/// For each realizable membership pattern (bitmask over subsets of `I`), one
/// model of the theory of size at most `bound` realizing it.
fn pattern_witnesses(seq: &FormulaSequence, theory: &Theory, bound: usize) -> Result<BTreeMap<u64, Structure>, Value> {
    let sig = seq.expanded_signature().map_err(err("signature"))?;
    let axioms = theory.axioms().iter().map(|f| compile(f, &sig, &[])).collect::<Result<Vec<_>, _>>().map_err(err("compile"))?;
    let k = seq.len();
    let closed = IndexSet::all(k).map(|s| compile(&seq.closed(s).map_err(err("closed"))?, &sig, &[]).map_err(err("compile"))).collect::<Result<Vec<_>, _>>()?;
    let mut out = BTreeMap::new();
    for m in structures_up_to(&sig, bound) {
        let mut holds = |c: &crate::logic::Compiled| m.eval(&c.formula, &mut vec![0; c.slots.max(1)], &[]);
        if !axioms.iter().all(&mut holds) {
            continue;
        }
        let pattern = closed.iter().enumerate().fold(0u64, |acc, (s, c)| if holds(c) { acc | 1 << s } else { acc });
        out.entry(pattern).or_insert(m);
    }
    Ok(out)
}

/// The definition: some bundle of small models, one per atom, whose existential
/// values are exactly `a`. The bundle is built and evaluated when found.
fn los_by_definition(a: &Distribution, seq: &FormulaSequence, witnesses: &BTreeMap<u64, Structure>) -> Result<bool, Value> {
    if !is_monotone(a) || !a.get(IndexSet::EMPTY).is_one() {
        return Ok(false);
    }
    let alg = a.algebra();
    let mut fibers = Vec::new();
    for e in 0..alg.atom_count() {
        let pattern = a.index().subsets().filter(|&s| a.get(s).contains_atom(e)).fold(0u64, |acc, s| acc | 1 << s.position());
        match witnesses.get(&pattern) {
            Some(m) => fibers.push(m.clone()),
            None => return Ok(false),
        }
    }
    let bundle = make_bundle(alg, fibers, None).map_err(err("witness bundle"))?;
    let engine = RecursiveEngine::new(&bundle.into());
    for s in a.index().subsets() {
        let v = engine.eval(&seq.closed(s).map_err(err("closed"))?, &[]).map_err(err("evaluate"))?;
        if v != a.get(s) {
            return Err(json!({ "error": "witness bundle misses the table", "index": s.key(), "value": v.to_vec() }));
        }
    }
    Ok(true)
}

pub(crate) fn criterion_vs_definition(ctx: &Ctx, t: &mut Tally) -> Outcome {
    let bound = ctx.bound(3);
    let budget = ctx.cfg.budget;
    let instances = tiny_instances(ctx.index(2));
    let mut work = Vec::new();
    for (name, seq, theory) in &instances {
        for n in 1..=ctx.atoms(2) {
            work.push((name, seq, theory, n));
        }
    }
    let results = par_map(&work, |(name, seq, theory, n)| -> Result<(u64, u64, u64, u64), Value> {
        let alg = BoolAlg::new(*n).expect("small");
        let witnesses = pattern_witnesses(seq, theory, bound)?;
        let tables = all_tables(&alg, seq.len());
        let los: Vec<bool> = tables.iter().map(|a| los_by_definition(a, seq, &witnesses)).collect::<Result<_, _>>()?;
        let (mut checks, mut unknown, mut yes_los, mut yes_poss) = (0, 0, 0, 0);
        for a in &tables {
            let cx = |what: &str, oracle: bool| {
                json!({ "instance": name, "sequence": io::sequence_to(seq, theory), "table": a.values().iter().map(|v| v.to_vec()).collect::<Vec<_>>(), "atoms": n, "failed": what, "definition": oracle })
            };
            let def_los = los_by_definition(a, seq, &witnesses)?;
            // a possibility conservatively refines some Łoś map
            let def_poss = is_monotone(a)
                && tables.iter().zip(&los).any(|(l, &is_los)| is_los && a.index().subsets().all(|s| a.get(s) == s.iter().fold(l.get(s), |acc, i| acc & a.singleton(i))));
            for (verdict, def, what) in [(is_los_map(a, seq, theory, bound, budget), def_los, "los map"), (is_possibility(a, seq, theory, bound, budget), def_poss, "possibility")] {
                match verdict.map_err(err("criterion"))? {
                    Verdict::Unknown => unknown += 1,
                    v => {
                        if (v == Verdict::Yes) != def {
                            return Err(cx(what, def));
                        }
                        checks += 1;
                    }
                }
            }
            yes_los += def_los as u64;
            yes_poss += def_poss as u64;
        }
        Ok((checks, unknown, yes_los, yes_poss))
    });
    let (mut los, mut poss) = (0, 0);
    for r in results {
        let (c, u, l, p) = r?;
        t.passed(c);
        for _ in 0..u {
            t.unknown();
        }
        los += l;
        poss += p;
    }
    t.note("instances", work.len());
    t.note("los_maps", los);
    t.note("possibilities", poss);
    Ok(())
}
