//! Bundle ↔ abstract conversion and the equality-schema axiom check.

use super::{make_bundle, specialize, Abstract, BValuedStructure, Bundle, BvError, Result};
use crate::algebra::PrincipalFilter;
use crate::finder::{tuple_at, tuple_index};

/// Tabulates every atomic value of a bundle.
pub fn bundle_to_abstract(b: &Bundle) -> Abstract {
    let n = b.len();
    let mut abs = Abstract::blank(&b.alg, &b.sig, n).expect("bundle signature and size are valid");
    let atoms_where = |pred: &dyn Fn(usize) -> bool| b.alg.from_bits((0..b.fibers.len()).filter(|&e| pred(e)).fold(0, |acc, e| acc | 1 << e));
    for x in 0..n {
        for y in x..n {
            let v = atoms_where(&|e| b.elements[x][e] == b.elements[y][e]);
            abs.set_eq(x, y, v);
        }
    }
    for (r, (_, k)) in b.sig.relations.iter().enumerate() {
        for i in 0..n.pow(*k as u32) {
            let t = tuple_at(i, *k, n);
            abs.rels[r][i] = atoms_where(&|e| {
                let coords: Vec<usize> = t.iter().map(|&a| b.elements[a][e]).collect();
                b.fibers[e].relation_holds(r, &coords)
            });
        }
    }
    for c in 0..b.sig.constants.len() {
        for a in 0..n {
            abs.consts[c][a] = atoms_where(&|e| b.fibers[e].constant(c) == b.elements[a][e]);
        }
    }
    for (f, (_, k)) in b.sig.functions.iter().enumerate() {
        for i in 0..n.pow(*k as u32) {
            let t = tuple_at(i, *k, n);
            for y in 0..n {
                abs.funcs[f][i * n + y] = atoms_where(&|e| {
                    let coords: Vec<usize> = t.iter().map(|&a| b.elements[a][e]).collect();
                    b.fibers[e].apply(f, &coords) == b.elements[y][e]
                });
            }
        }
    }
    abs
}

/// Specializes at every atom; element `a` becomes the tuple of its images.
pub fn abstract_to_bundle(abs: &Abstract) -> Result<Bundle> {
    check_axioms(abs)?;
    let m = BValuedStructure::Abstract(abs.clone());
    let mut fibers = Vec::new();
    let mut projections = Vec::new();
    for e in 0..abs.alg.atom_count() {
        let s = specialize(&m, &PrincipalFilter::ultrafilter_from_atom(&abs.alg, e)?)?;
        fibers.push(s.structure);
        projections.push(s.projection);
    }
    let elements: Vec<Vec<usize>> = (0..abs.len).map(|a| projections.iter().map(|p| p[a]).collect()).collect();
    let b = make_bundle(&abs.alg, fibers, Some(elements))?;
    debug_assert_eq!(b.len(), abs.len, "axiom (7) keeps element tuples distinct");
    Ok(b)
}

fn violation(clause: u8, detail: String) -> BvError {
    BvError::AxiomViolation { clause, detail }
}

/// Checks the equality and congruence schema (clause 3) and that distinct
/// elements are never equal with value 1 (clause 7).
pub fn check_axioms(abs: &Abstract) -> Result<()> {
    let n = abs.len;
    let eq = |a: usize, b: usize| abs.eq[a * n + b];
    for a in 0..n {
        if !eq(a, a).is_one() {
            return Err(violation(3, format!("||{a} = {a}|| is not 1")));
        }
        for b in 0..n {
            if eq(a, b) != eq(b, a) {
                return Err(violation(3, format!("||{a} = {b}|| is not symmetric")));
            }
            if a != b && eq(a, b).is_one() {
                return Err(violation(7, format!("||{a} = {b}|| = 1 for distinct elements")));
            }
            for c in 0..n {
                if !(eq(a, b) & eq(b, c)).leq(eq(a, c)) {
                    return Err(violation(3, format!("transitivity fails at {a}, {b}, {c}")));
                }
            }
        }
    }
    // ⋀ ||a_i = b_i|| for two tuples
    let agree = |x: &[usize], y: &[usize]| x.iter().zip(y).fold(abs.alg.one(), |acc, (&p, &q)| acc & eq(p, q));
    for (r, (name, k)) in abs.sig.relations.iter().enumerate() {
        let m = n.pow(*k as u32);
        for i in 0..m {
            let x = tuple_at(i, *k, n);
            for j in 0..m {
                let y = tuple_at(j, *k, n);
                if !(agree(&x, &y) & abs.rels[r][i]).leq(abs.rels[r][j]) {
                    return Err(violation(3, format!("{name} is not congruent at {x:?}, {y:?}")));
                }
            }
        }
    }
    for (c, name) in abs.sig.constants.iter().enumerate() {
        let row = &abs.consts[c];
        if !row.iter().fold(abs.alg.zero(), |acc, &v| acc | v).is_one() {
            return Err(violation(3, format!("{name} has no value")));
        }
        for a in 0..n {
            for b in 0..n {
                if !(row[a] & eq(a, b)).leq(row[b]) || !(row[a] & row[b]).leq(eq(a, b)) {
                    return Err(violation(3, format!("{name} is not functional at {a}, {b}")));
                }
            }
        }
    }
    for (f, (name, k)) in abs.sig.functions.iter().enumerate() {
        let m = n.pow(*k as u32);
        let table = &abs.funcs[f];
        for i in 0..m {
            let row = &table[i * n..(i + 1) * n];
            if !row.iter().fold(abs.alg.zero(), |acc, &v| acc | v).is_one() {
                return Err(violation(3, format!("{name} has no value at {:?}", tuple_at(i, *k, n))));
            }
            for a in 0..n {
                for b in 0..n {
                    if !(row[a] & eq(a, b)).leq(row[b]) || !(row[a] & row[b]).leq(eq(a, b)) {
                        return Err(violation(3, format!("{name} is not functional at {:?}", tuple_at(i, *k, n))));
                    }
                }
            }
            let x = tuple_at(i, *k, n);
            for j in 0..m {
                let y = tuple_at(j, *k, n);
                let same = agree(&x, &y);
                for v in 0..n {
                    if !(same & row[v]).leq(table[tuple_index(&y, n) * n + v]) {
                        return Err(violation(3, format!("{name} is not congruent at {x:?}, {y:?}")));
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::gen::{random_bundle, rc_sig};
    use super::super::{eval_bv, RecursiveEngine};
    use super::*;
    use crate::algebra::BoolAlg;
    use crate::finder::Structure;
    use crate::logic::{enumerate_formulas, EnumConfig, Signature};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_preserves_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p2 = BoolAlg::new(2).unwrap();
        let sig = Signature::new().with_relation("R", 2).with_function("f", 1).with_constant("c");
        let formulas = enumerate_formulas(&sig, &EnumConfig::sentences(1, vec![0, 1], 3)).unwrap();
        for _ in 0..10 {
            let b = random_bundle(&mut rng, &p2, &sig, 3);
            let abs = bundle_to_abstract(&b);
            check_axioms(&abs).unwrap();
            let back = abstract_to_bundle(&abs).unwrap();
            assert_eq!(bundle_to_abstract(&back), abs);
            let (e1, e2) = (RecursiveEngine::new(&b.into()), RecursiveEngine::new(&back.into()));
            for phi in formulas.iter().step_by(7) {
                for p in [[0, 0], [0, 1], [1, 0]] {
                    if p.iter().all(|&x| x < abs.len()) {
                        assert_eq!(e1.eval(phi, &p).unwrap(), e2.eval(phi, &p).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn axiom_seven_violation() {
        let p2 = BoolAlg::new(2).unwrap();
        let mut abs = Abstract::blank(&p2, &Signature::new(), 2).unwrap();
        abs.set_eq(0, 1, p2.one());
        assert!(matches!(check_axioms(&abs), Err(BvError::AxiomViolation { clause: 7, .. })));
        assert!(matches!(abstract_to_bundle(&abs), Err(BvError::AxiomViolation { clause: 7, .. })));
    }

    #[test]
    fn congruence_violation() {
        let p2 = BoolAlg::new(2).unwrap();
        let sig = Signature::new().with_relation("P", 1);
        let mut abs = Abstract::blank(&p2, &sig, 2).unwrap();
        abs.set_eq(0, 1, p2.atom(0));
        abs.set_relation(0, &[0], p2.one());
        assert!(matches!(check_axioms(&abs), Err(BvError::AxiomViolation { clause: 3, .. })));
        abs.set_relation(0, &[1], p2.atom(0));
        check_axioms(&abs).unwrap();
    }

    #[test]
    fn one_atom_conversions_are_identities() {
        let sig = rc_sig();
        let m = Structure::new(&sig, 3).unwrap().with_relation_tuples("R", &[&[0, 1], &[2, 2]]).unwrap().with_constant_value("c", 2).unwrap();
        let b = make_bundle(&BoolAlg::trivial(), vec![m.clone()], None).unwrap();
        let back = abstract_to_bundle(&bundle_to_abstract(&b)).unwrap();
        assert_eq!(back.fibers()[0], m);
        assert_eq!(back, b);
        let abs = bundle_to_abstract(&b);
        assert_eq!(eval_bv(&abs.into(), &crate::logic::parse_with("R(c,c)", &sig).unwrap(), &[]).unwrap(), BoolAlg::trivial().one());
    }
}
