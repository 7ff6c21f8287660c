//! First-order signatures, formulas with parameters, parsing, printing and enumeration.

mod ast;
mod compile;
mod enumerate;
mod parse;

pub use ast::{Formula, Signature, Term, Theory};
pub use compile::{compile, compile_auto, CFormula, CTerm, Compiled};
pub use enumerate::{atoms, enumerate_formulas, term_pool, EnumConfig, MAX_ENUM_RANK};
pub use parse::{parse, parse_with};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("symbol {symbol} takes {expected} arguments, got {got}")]
    Arity { symbol: String, expected: usize, got: usize },
    #[error("substituting for {var} would be captured by the binder of {binder}")]
    Capture { var: String, binder: String },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("not a sentence: {0}")]
    NotSentence(String),
    #[error("bad signature: {0}")]
    BadSignature(String),
}

pub type Result<T, E = LogicError> = std::result::Result<T, E>;

/// Parses each sentence of `texts` against `sig` into a theory.
pub fn parse_theory<S: AsRef<str>>(texts: &[S], sig: &Signature) -> Result<Theory> {
    let axioms = texts.iter().map(|t| parse_with(t.as_ref(), sig)).collect::<Result<Vec<_>>>()?;
    Theory::new(axioms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parse_examples() {
        let f = parse("exists x. (R(x,y) & !(x = c))").unwrap();
        assert_eq!(f.free_vars(), set(&["y"]));
        assert_eq!(
            f,
            Formula::exists(
                "x",
                Formula::and(
                    Formula::rel("R", vec![Term::var("x"), Term::var("y")]),
                    Formula::not(Formula::eq(Term::var("x"), Term::constant("c")))
                )
            )
        );
        let g = parse("forall x. x = x").unwrap();
        assert!(g.is_closed());
        assert_eq!(g.quantifier_rank(), 1);
        assert_eq!(
            parse("exists x ("),
            Err(LogicError::Parse { offset: 9, message: "expected '.', found LParen".into() })
        );
    }

    #[test]
    fn parse_errors_and_signatures() {
        let sig = Signature::new().with_relation("R", 2).with_constant("c");
        assert_eq!(parse_with("S(x)", &sig), Err(LogicError::UnknownSymbol("S".into())));
        assert!(matches!(parse_with("R(x)", &sig), Err(LogicError::Arity { .. })));
        assert!(matches!(parse("x"), Err(LogicError::Parse { offset: 1, .. })));
        assert!(matches!(parse("P(x) &"), Err(LogicError::Parse { offset: 6, .. })));
        assert!(matches!(parse("P(x) $"), Err(LogicError::Parse { offset: 5, .. })));
        // declared constants win over the naming convention
        let sig = Signature::new().with_relation("P", 1).with_constant("z");
        assert_eq!(parse_with("P(z)", &sig).unwrap().free_vars(), BTreeSet::new());
    }

    #[test]
    fn parse_precedence_and_sugar() {
        let f = parse("P(x) | Q(x) & R(x) -> S(x) -> T(x)").unwrap();
        let p = |r: &str| Formula::rel(r, vec![Term::var("x")]);
        assert_eq!(
            f,
            Formula::implies(
                Formula::or(p("P"), Formula::and(p("Q"), p("R"))),
                Formula::implies(p("S"), p("T"))
            )
        );
        assert_eq!(parse("exists x, y. x < y").unwrap(), parse("exists x. exists y. x < y").unwrap());
        assert_eq!(parse("a != b").unwrap(), parse("!(a = b)").unwrap());
        assert_eq!(parse("x < #1").unwrap(), Formula::rel("<", vec![Term::var("x"), Term::Param(1)]));
        assert_eq!(parse("f(x) = y").unwrap(), Formula::eq(Term::App("f".into(), vec![Term::var("x")]), Term::var("y")));
    }

    #[test]
    fn utils_examples() {
        assert_eq!(parse("R(x,y)").unwrap().free_vars(), set(&["x", "y"]));
        let f = parse("exists x. R(x,y)").unwrap();
        assert_eq!(f.substitute("x", &Term::Param(3)).unwrap(), f);
        let conj = Formula::conjunction(vec![parse("P(x)").unwrap(), parse("Q(x)").unwrap()]);
        assert_eq!(conj.to_string(), "P(x) & Q(x)");
        assert_eq!(Formula::conjunction(Vec::new()), Formula::True);
        assert_eq!(
            f.substitute("y", &Term::var("x")),
            Err(LogicError::Capture { var: "y".into(), binder: "x".into() })
        );
        assert_eq!(f.substitute("y", &Term::Param(0)).unwrap().to_string(), "exists x. R(x,#0)");
    }

    #[test]
    fn theory_rejects_open_formulas() {
        assert!(matches!(Theory::new(vec![parse("P(x)").unwrap()]), Err(LogicError::NotSentence(_))));
        let sig = Signature::new().with_relation("<", 2);
        assert_eq!(parse_theory(&["forall x. !(x < x)"], &sig).unwrap().axioms().len(), 1);
    }

    #[test]
    fn enumeration_examples() {
        let sig = Signature::new().with_relation("R", 2);
        let cfg = EnumConfig {
            rank: 0,
            free_vars: vec!["x".into(), "y".into()],
            bound_vars: vec![],
            params: vec![],
            max_size: 3,
            max_count: 100_000,
        };
        let all: Vec<String> = enumerate_formulas(&sig, &cfg).unwrap().iter().map(|f| f.to_string()).collect();
        assert!(all.contains(&"R(x,y)".to_string()));
        assert!(all.contains(&"x = y".to_string()));
        assert!(all.contains(&"!x = y".to_string()));
        assert!(all.contains(&"R(x,x) & x = y".to_string()));

        let empty = EnumConfig { free_vars: vec![], ..cfg.clone() };
        assert!(enumerate_formulas(&Signature::new(), &empty).unwrap().is_empty());

        let too_deep = EnumConfig { rank: MAX_ENUM_RANK + 1, ..cfg.clone() };
        assert!(matches!(enumerate_formulas(&sig, &too_deep), Err(LogicError::CapExceeded(_))));
        let tiny = EnumConfig { max_count: 10, ..cfg };
        assert!(matches!(enumerate_formulas(&sig, &tiny), Err(LogicError::CapExceeded(_))));
    }

    /// Frozen from `tests/oracles/enum_count.py`, which builds the same family by
    /// fixpoint closure on printed forms rather than by size-indexed construction.
    #[test]
    fn enumeration_count_matches_oracle() {
        let sig = Signature::new().with_relation("P", 1);
        let cfg = EnumConfig {
            rank: 1,
            free_vars: vec!["x".into()],
            bound_vars: vec![],
            params: vec![],
            max_size: 5,
            max_count: 1_000_000,
        };
        let got = enumerate_formulas(&sig, &cfg).unwrap();
        assert_eq!(got.len(), ENUM_ORACLE_COUNT);
        for f in &got {
            assert!(f.quantifier_rank() <= 1 && f.size() <= 5);
        }
    }

    const ENUM_ORACLE_COUNT: usize = 71;

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
            prop::sample::select(vec!["c", "d"]).prop_map(Term::constant),
            (0usize..3).prop_map(Term::Param),
        ];
        leaf.prop_recursive(2, 6, 2, |inner| {
            prop::collection::vec(inner, 1..=2).prop_map(|args| {
                let name = if args.len() == 1 { "f" } else { "g" };
                Term::App(name.into(), args)
            })
        })
    }

    pub(crate) fn arb_formula() -> impl Strategy<Value = Formula> {
        let atom = prop_oneof![
            (arb_term(), arb_term()).prop_map(|(a, b)| Formula::eq(a, b)),
            (arb_term(), arb_term()).prop_map(|(a, b)| Formula::rel("R", vec![a, b])),
            (arb_term(), arb_term()).prop_map(|(a, b)| Formula::rel("<", vec![a, b])),
            arb_term().prop_map(|a| Formula::rel("P", vec![a])),
            Just(Formula::True),
            Just(Formula::False),
        ];
        atom.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                (prop::sample::select(vec!["x", "y", "z"]), inner.clone()).prop_map(|(v, f)| Formula::exists(v, f)),
                (prop::sample::select(vec!["x", "y", "z"]), inner).prop_map(|(v, f)| Formula::forall(v, f)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn print_parse_round_trip(f in arb_formula()) {
            prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
        }

        #[test]
        fn rank_laws(a in arb_formula(), b in arb_formula()) {
            prop_assert_eq!(Formula::not(a.clone()).quantifier_rank(), a.quantifier_rank());
            prop_assert_eq!(Formula::and(a.clone(), b.clone()).quantifier_rank(), a.quantifier_rank().max(b.quantifier_rank()));
            prop_assert_eq!(Formula::exists("x", a.clone()).quantifier_rank(), a.quantifier_rank() + 1);
        }

        #[test]
        fn sequential_equals_simultaneous(f in arb_formula()) {
            let map = vec![("x".to_string(), Term::Param(7)), ("y".to_string(), Term::Param(8))];
            let seq = f.substitute("x", &Term::Param(7)).unwrap().substitute("y", &Term::Param(8)).unwrap();
            prop_assert_eq!(f.substitute_all(&map).unwrap(), seq);
        }
    }
}
