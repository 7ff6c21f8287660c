//! Ordinary finite structures, Tarskian evaluation and a bounded model finder.

mod search;
mod structure;

pub use search::{find_model, FindResult, FinderTask, DEFAULT_NODE_BUDGET};
pub use structure::Structure;
pub(crate) use structure::{tuple_at, tuple_index};

use thiserror::Error;

use crate::logic::LogicError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FinderError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("domain must be nonempty")]
    EmptyDomain,
    #[error("value {value} outside a domain of size {size}")]
    OutOfDomain { value: usize, size: usize },
    #[error("parameter #{0} has no value")]
    UnboundParameter(usize),
    #[error("subset is not a substructure: {0}")]
    NotClosed(String),
    #[error("domain bound must be between 1 and 254")]
    BadBound,
    #[error("constraint is not a sentence: {0}")]
    NotSentence(String),
    #[error("search returned a structure failing its own constraints")]
    Unsound,
}

pub type Result<T, E = FinderError> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{compile, enumerate_formulas, parse_theory, parse_with, EnumConfig, Formula, Signature};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn order_sig() -> Signature {
        Signature::new().with_relation("<", 2)
    }

    #[test]
    fn eval_examples() {
        let sig = order_sig();
        let m = Structure::new(&sig, 2).unwrap().with_relation_tuples("<", &[&[0, 1]]).unwrap();
        let phi = parse_with("exists x. x < #1", &sig).unwrap();
        assert!(m.satisfies(&phi, &[], &[0, 1]).unwrap());
        assert!(!m.satisfies(&phi, &[], &[0, 0]).unwrap());
        assert!(m.satisfies(&parse_with("x = x", &sig).unwrap(), &[("x".into(), 1)], &[]).unwrap());
        let one = Structure::new(&sig, 1).unwrap();
        assert!(!one.satisfies(&parse_with("exists x, y. !(x = y)", &sig).unwrap(), &[], &[]).unwrap());
        assert!(matches!(
            m.satisfies(&parse_with("x = y", &sig).unwrap(), &[("x".into(), 0)], &[]),
            Err(FinderError::Logic(LogicError::UnboundVariable(_)))
        ));
    }

    #[test]
    fn find_model_examples() {
        let sig = order_sig();
        let t = parse_theory(&["forall x. !(x < x)", "forall x, y, z. (x < y & y < z -> x < z)"], &sig).unwrap();
        let two = parse_with("exists x, y. !(x = y)", &sig).unwrap();
        let task = FinderTask::new(sig.clone(), 2).with_axioms(t).require(two.clone());
        let m = find_model(&task).unwrap();
        assert_eq!(m.model().unwrap().size(), 2);
        // lexicographically least: the empty order
        assert!(m.model().unwrap().relation_table(0).iter().all(|&b| !b));

        let task = FinderTask::new(sig.clone(), 1).require(two);
        assert_eq!(find_model(&task).unwrap(), FindResult::NoModel);
        let absurd = parse_with("exists x. !(x = x)", &sig).unwrap();
        for n in 1..=4 {
            assert_eq!(find_model(&FinderTask::new(sig.clone(), n).require(absurd.clone())).unwrap(), FindResult::NoModel);
        }
    }

    #[test]
    fn budget_reports_unknown() {
        let sig = Signature::new().with_relation("R", 2);
        let hard = parse_with("exists x. (R(x,x) & !R(x,x))", &sig).unwrap();
        let mut task = FinderTask::new(sig, 4).require(hard);
        task.budget = 50;
        assert!(find_model(&task).unwrap().is_unknown());
    }

    /// Enumerates every interpretation of `sig` on `size` elements in the finder's
    /// cell order, without symmetry breaking.
    fn brute_force_first(task: &FinderTask, size: usize) -> Option<Structure> {
        let sig = &task.signature;
        let mut radices = vec![size; sig.constants.len()];
        for (_, k) in &sig.functions {
            radices.extend(std::iter::repeat_n(size, size.pow(*k as u32)));
        }
        for (_, k) in &sig.relations {
            radices.extend(std::iter::repeat_n(2, size.pow(*k as u32)));
        }
        let mut digits = vec![0usize; radices.len()];
        loop {
            let mut m = Structure::new(sig, size).unwrap();
            let mut pos = 0;
            for c in 0..sig.constants.len() {
                m.set_constant(c, digits[pos]).unwrap();
                pos += 1;
            }
            for (f, (_, k)) in sig.functions.iter().enumerate() {
                for i in 0..size.pow(*k as u32) {
                    m.set_function(f, &tuple_at(i, *k, size), digits[pos]).unwrap();
                    pos += 1;
                }
            }
            for (r, (_, k)) in sig.relations.iter().enumerate() {
                for i in 0..size.pow(*k as u32) {
                    m.set_relation(r, &tuple_at(i, *k, size), digits[pos] == 1).unwrap();
                    pos += 1;
                }
            }
            if task.is_model(&m).unwrap() {
                return Some(m);
            }
            // increment, last digit fastest
            let mut i = digits.len();
            loop {
                if i == 0 {
                    return None;
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < radices[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
    }

    fn random_task(rng: &mut ChaCha8Rng) -> FinderTask {
        let pool = [
            Signature::new().with_relation("P", 1),
            Signature::new().with_relation("R", 2),
            Signature::new().with_constant("c"),
            Signature::new().with_function("f", 1),
        ];
        let mut sig = Signature::new();
        let k = rng.gen_range(1..=2);
        for s in pool.choose_multiple(rng, k) {
            sig.relations.extend(s.relations.iter().cloned());
            sig.functions.extend(s.functions.iter().cloned());
            sig.constants.extend(s.constants.iter().cloned());
        }
        let sentences = enumerate_formulas(&sig, &EnumConfig::sentences(2, vec![], 4)).unwrap();
        let mut task = FinderTask::new(sig, 3);
        for _ in 0..rng.gen_range(1..=3) {
            let phi = sentences.choose(rng).unwrap().clone();
            if rng.gen_bool(0.5) {
                task.positive.push(phi);
            } else {
                task.negative.push(phi);
            }
        }
        task
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..150 {
            let task = random_task(&mut rng);
            let expected = (1..=task.bound).find_map(|n| brute_force_first(&task, n));
            match find_model(&task).unwrap() {
                FindResult::Found(m) => assert_eq!(Some(m), expected, "{task:?}"),
                FindResult::NoModel => assert_eq!(expected, None, "{task:?}"),
                FindResult::Unknown { .. } => panic!("budget hit on a tiny task"),
            }
        }
    }

    #[test]
    fn solvable_stays_solvable_at_larger_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..60 {
            let mut task = random_task(&mut rng);
            task.bound = 2;
            let small = find_model(&task).unwrap();
            task.bound = 3;
            let large = find_model(&task).unwrap();
            if small.is_found() {
                assert_eq!(small, large);
            }
        }
    }

    #[test]
    fn structure_json_round_trip() {
        let sig = Signature::new().with_relation("<", 2).with_function("s", 1).with_constant("c");
        let mut m = Structure::new(&sig, 3).unwrap().with_relation_tuples("<", &[&[0, 1], &[1, 2]]).unwrap();
        m.set_function(0, &[0], 1).unwrap();
        m.set_constant(0, 2).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: Structure = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn restriction_and_isomorphism() {
        let sig = order_sig();
        let m = Structure::new(&sig, 3).unwrap().with_relation_tuples("<", &[&[0, 1], &[0, 2], &[1, 2]]).unwrap();
        let sub = m.restrict(&[0, 2]).unwrap();
        assert!(sub.relation_holds(0, &[0, 1]));
        let rev = m.permute(&[2, 1, 0]);
        assert_eq!(m.find_isomorphism(&rev), Some(vec![2, 1, 0]));
        let phi = compile(&Formula::True, &sig, &[]).unwrap();
        assert!(m.eval(&phi.formula, &mut [0], &[]));
            }
}
