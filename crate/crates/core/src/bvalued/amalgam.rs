//! Bounded amalgamation, atom by atom.
//!
//! At each atom the two specializations are glued along the image of `M` by a
//! finder task: the atomic diagrams of both, written with fresh constants, plus
//! the identifications forced by `f0` and `f1`, plus the theory. The amalgam is
//! the full product of the per-atom models.

use super::elementary::FormulaFamily;
use super::{abstract_to_bundle, check_elementary, make_bundle, product_tuples, specialize, BValuedStructure, Bundle, BvError, Result};
use crate::algebra::PrincipalFilter;
use crate::finder::{find_model, tuple_at, FindResult, FinderTask, Structure};
use crate::logic::{Formula, Signature, Term, Theory};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmalgamResult {
    Found {
        amalgam: Bundle,
        /// Element of `M0` ↦ element of the amalgam.
        g0: Vec<usize>,
        g1: Vec<usize>,
        /// Largest rank, up to the requested one, at which both maps are elementary.
        rank: usize,
    },
    Unknown { atom: usize, reason: String },
}

fn as_bundle(m: &BValuedStructure) -> Result<Bundle> {
    match m {
        BValuedStructure::Bundle(b) => Ok(b.clone()),
        BValuedStructure::Abstract(a) => abstract_to_bundle(a),
    }
}

/// The atomic diagram of `s`, element `i` named by `names[i]`.
fn diagram(s: &Structure, names: &[String]) -> Vec<Formula> {
    let c = |i: usize| Term::constant(&names[i]);
    let n = s.size();
    let sig = s.signature();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push(Formula::not(Formula::eq(c(i), c(j))));
        }
    }
    for (r, (name, k)) in sig.relations.iter().enumerate() {
        for i in 0..n.pow(*k as u32) {
            let t = tuple_at(i, *k, n);
            let atom = Formula::rel(name, t.iter().map(|&a| c(a)).collect());
            out.push(if s.relation_holds(r, &t) { atom } else { Formula::not(atom) });
        }
    }
    for (f, (name, k)) in sig.functions.iter().enumerate() {
        for i in 0..n.pow(*k as u32) {
            let t = tuple_at(i, *k, n);
            let app = Term::App(name.clone(), t.iter().map(|&a| c(a)).collect());
            out.push(Formula::eq(app, c(s.apply(f, &t))));
        }
    }
    for (k, name) in sig.constants.iter().enumerate() {
        out.push(Formula::eq(Term::constant(name), c(s.constant(k))));
    }
    out
}

fn fresh_prefix(sig: &Signature) -> String {
    let mut prefix = "k".to_string();
    let taken = |p: &str| {
        sig.relations.iter().map(|(n, _)| n).chain(sig.functions.iter().map(|(n, _)| n)).chain(&sig.constants).any(|n| n.starts_with(p))
    };
    while taken(&prefix) {
        prefix.push('k');
    }
    prefix
}

/// Amalgamates `f0: M → M0` and `f1: M → M1`, given as element maps indexed by `M`.
#[allow(clippy::too_many_arguments)]
pub fn amalgamate_bounded(
    m: &BValuedStructure,
    m0: &BValuedStructure,
    m1: &BValuedStructure,
    f0: &[usize],
    f1: &[usize],
    family: &FormulaFamily,
    theory: &Theory,
    bound: usize,
    budget: u64,
) -> Result<AmalgamResult> {
    if f0.len() != m.len() || f1.len() != m.len() {
        return Err(BvError::NotElementary("maps must be total on M".into()));
    }
    for (side, f, target) in [("f0", f0, m0), ("f1", f1, m1)] {
        let pairs: Vec<(usize, usize)> = f.iter().copied().enumerate().collect();
        let report = check_elementary(&pairs, m, target, family)?;
        if let Some(cx) = report.counterexample {
            return Err(BvError::NotElementary(format!("{side} at {} with {:?}", cx.formula, cx.params)));
        }
    }
    let (b0, b1) = (as_bundle(m0)?, as_bundle(m1)?);
    let alg = b0.algebra().clone();
    let sig = b0.signature().clone();
    let prefix = fresh_prefix(&sig);

    let mut fibers = Vec::new();
    let mut g0_coords = Vec::new();
    let mut g1_coords = Vec::new();
    for e in 0..alg.atom_count() {
        let u = PrincipalFilter::ultrafilter_from_atom(&alg, e)?;
        let s0 = specialize(&b0.clone().into(), &u)?;
        let s1 = specialize(&b1.clone().into(), &u)?;
        let (n0, n1) = (s0.structure.size(), s1.structure.size());
        let p: Vec<String> = (0..n0).map(|i| format!("{prefix}p{i}")).collect();
        let q: Vec<String> = (0..n1).map(|i| format!("{prefix}q{i}")).collect();
        let expanded = sig.extend_constants(&p)?.extend_constants(&q)?;
        let mut task = FinderTask::new(expanded, bound).with_axioms(theory.clone());
        task.budget = budget;
        task.positive.extend(diagram(&s0.structure, &p));
        task.positive.extend(diagram(&s1.structure, &q));
        for a in 0..m.len() {
            let (x, y) = (s0.projection[f0[a]], s1.projection[f1[a]]);
            task.positive.push(Formula::eq(Term::constant(&p[x]), Term::constant(&q[y])));
        }
        let k = match find_model(&task)? {
            FindResult::Found(k) => k,
            FindResult::NoModel => return Ok(AmalgamResult::Unknown { atom: e, reason: format!("no amalgam with at most {bound} elements") }),
            FindResult::Unknown { nodes } => return Ok(AmalgamResult::Unknown { atom: e, reason: format!("budget exhausted after {nodes} nodes") }),
        };
        // renumber so the image of M0's fiber comes first, in order
        let first = sig.constants.len();
        let mut perm = vec![usize::MAX; k.size()];
        for i in 0..n0 {
            perm[k.constant(first + i)] = i;
        }
        let mut next = n0;
        for slot in perm.iter_mut().filter(|v| **v == usize::MAX) {
            *slot = next;
            next += 1;
        }
        let k = k.permute(&perm);
        g0_coords.push(s0.projection.clone());
        g1_coords.push(s1.projection.iter().map(|&y| k.constant(first + n0 + y)).collect::<Vec<usize>>());
        fibers.push(k.reduct(&sig)?);
    }

    let sizes: Vec<usize> = fibers.iter().map(|f| f.size()).collect();
    let amalgam = make_bundle(&alg, fibers, Some(product_tuples(&sizes)))?;
    let lookup = |coords: &[Vec<usize>], a: usize| {
        let t: Vec<usize> = coords.iter().map(|c| c[a]).collect();
        amalgam.index_of(&t).expect("full product")
    };
    let g0: Vec<usize> = (0..b0.len()).map(|a| lookup(&g0_coords, a)).collect();
    let g1: Vec<usize> = (0..b1.len()).map(|a| lookup(&g1_coords, a)).collect();
    debug_assert!((0..m.len()).all(|a| g0[f0[a]] == g1[f1[a]]));

    let k: BValuedStructure = amalgam.clone().into();
    let mut rank = None;
    for r in 0..=family.rank {
        let fam = FormulaFamily { rank: r, ..family.clone() };
        let ok0 = check_elementary(&g0.iter().copied().enumerate().collect::<Vec<_>>(), &b0.clone().into(), &k, &fam)?.elementary;
        let ok1 = check_elementary(&g1.iter().copied().enumerate().collect::<Vec<_>>(), &b1.clone().into(), &k, &fam)?.elementary;
        if !(ok0 && ok1) {
            break;
        }
        rank = Some(r);
    }
    // embeddings of fibers preserve atomic formulas, so rank 0 always holds
    let rank = rank.expect("fiberwise embeddings are elementary at rank 0");
    Ok(AmalgamResult::Found { amalgam, g0, g1, rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BoolAlg;
    use crate::finder::DEFAULT_NODE_BUDGET;
    use crate::logic::parse_theory;

    fn order(n: usize) -> Structure {
        let sig = Signature::new().with_relation("<", 2);
        let mut s = Structure::new(&sig, n).unwrap();
        for a in 0..n {
            for b in a + 1..n {
                s.set_relation(0, &[a, b], true).unwrap();
            }
        }
        s
    }

    fn pair_bundle(s: Structure) -> BValuedStructure {
        make_bundle(&BoolAlg::new(2).unwrap(), vec![s.clone(), s], None).unwrap().into()
    }

    /// Maps each element tuple of `m` through a fiber-level map.
    fn lift(m: &BValuedStructure, target: &BValuedStructure, fiber_map: &[usize]) -> Vec<usize> {
        let (BValuedStructure::Bundle(m), BValuedStructure::Bundle(t)) = (m, target) else { unreachable!() };
        m.elements().iter().map(|tup| t.index_of(&tup.iter().map(|&x| fiber_map[x]).collect::<Vec<_>>()).unwrap()).collect()
    }

    fn linear_orders() -> Theory {
        let sig = Signature::new().with_relation("<", 2);
        parse_theory(
            &["forall x. !(x < x)", "forall x, y, z. (x < y & y < z -> x < z)", "forall x, y. (x < y | x = y | y < x)"],
            &sig,
        )
        .unwrap()
    }

    #[test]
    fn trivial_amalgam_is_the_structure() {
        let m = pair_bundle(order(2));
        let id: Vec<usize> = (0..m.len()).collect();
        let r = amalgamate_bounded(&m, &m, &m, &id, &id, &FormulaFamily::at_rank(1), &Theory::empty(), 3, DEFAULT_NODE_BUDGET).unwrap();
        let AmalgamResult::Found { amalgam, g0, g1, rank } = r else { panic!("{r:?}") };
        assert_eq!(BValuedStructure::from(amalgam), m);
        assert_eq!((g0, g1), (id.clone(), id));
        assert_eq!(rank, 1);
    }

    #[test]
    fn one_point_extensions_amalgamate_to_four_points() {
        let m = pair_bundle(order(2));
        let (m0, m1) = (pair_bundle(order(3)), pair_bundle(order(3)));
        // M0 adds a middle point, M1 a top point
        let f0 = lift(&m, &m0, &[0, 2]);
        let f1 = lift(&m, &m1, &[0, 1]);
        let family = FormulaFamily::at_rank(0);
        let r = amalgamate_bounded(&m, &m0, &m1, &f0, &f1, &family, &linear_orders(), 4, DEFAULT_NODE_BUDGET).unwrap();
        let AmalgamResult::Found { amalgam, g0, g1, .. } = r else { panic!("{r:?}") };
        assert!(amalgam.fibers().iter().all(|f| f.size() == 4 && f.find_isomorphism(&order(4)).is_some()));
        for a in 0..m.len() {
            assert_eq!(g0[f0[a]], g1[f1[a]]);
        }
    }

    #[test]
    fn tiny_bound_is_unknown() {
        let m = pair_bundle(order(1));
        let m0 = pair_bundle(order(2));
        let f = lift(&m, &m0, &[0]);
        let r = amalgamate_bounded(&m, &m0, &m0, &f, &f, &FormulaFamily::at_rank(0), &Theory::empty(), 1, DEFAULT_NODE_BUDGET).unwrap();
        assert!(matches!(r, AmalgamResult::Unknown { atom: 0, .. }));
    }

    #[test]
    fn non_elementary_inclusion_is_rejected() {
        let m = pair_bundle(order(2));
        let m0 = pair_bundle(order(3));
        let f0 = lift(&m, &m0, &[0, 2]);
        let r = amalgamate_bounded(&m, &m0, &m0, &f0, &f0, &FormulaFamily::at_rank(1), &Theory::empty(), 4, DEFAULT_NODE_BUDGET);
        assert!(matches!(r, Err(BvError::NotElementary(_))));
    }
}
