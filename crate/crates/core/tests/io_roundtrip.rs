//! File formats: load then store reproduces canonical files byte for byte.

use bvm::algebra::BoolAlg;
use bvm::bvalued::gen::{random_bundle, rc_sig};
use bvm::bvalued::{bundle_to_abstract, BValuedStructure};
use bvm::dist::Distribution;
use bvm::io::{self, IoError};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn round_trip_bytes<T>(text: &str, from: impl FnOnce(io::Node) -> io::Result<T>, to: impl FnOnce(&T) -> serde_json::Value) -> String {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.json");
    std::fs::write(&p, text).unwrap();
    let x = io::load(&p, from).unwrap();
    let q = dir.path().join("y.json");
    io::write_json(&q, &to(&x)).unwrap();
    std::fs::read_to_string(q).unwrap()
}

#[test]
fn algebra_file_round_trip() {
    let text = io::canonical(&json!({ "atoms": 3, "labels": ["a", "b", "c"] }));
    assert_eq!(round_trip_bytes(&text, io::algebra_from, io::algebra_to), text);
}

#[test]
fn missing_file_and_bad_json() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(io::load(&dir.path().join("none.json"), io::algebra_from), Err(IoError::File { .. })));
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{ not json").unwrap();
    assert!(matches!(io::load(&p, io::algebra_from), Err(IoError::Syntax(_))));
}

#[test]
fn non_monotone_distribution_points_at_key() {
    let v = json!({ "algebra": { "atoms": 2 }, "index": [0, 1], "values": { "": [0, 1], "0": [0, 1], "1": [1], "0,1": [0] } });
    let e = io::decode(&v, io::distribution_from).unwrap_err();
    assert_eq!(e.pointer, "/values/0,1");
}

fn dist_strategy() -> impl Strategy<Value = Distribution> {
    (1usize..=4, 0usize..=3, any::<u64>()).prop_map(|(n, k, seed)| {
        let alg = BoolAlg::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let full = alg.one().bits();
        // meets of random nonzero values over a shared atom are monotone
        let shared = 1u64 << rand::Rng::gen_range(&mut rng, 0..n);
        let singles: Vec<_> = (0..k).map(|_| alg.from_bits((rand::Rng::gen::<u64>(&mut rng) & full) | shared)).collect();
        Distribution::multiplicative(&alg, &singles).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distribution_round_trip(d in dist_strategy()) {
        let text = io::canonical(&io::distribution_to(&d));
        let back = io::decode(&serde_json::from_str(&text).unwrap(), io::distribution_from).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(round_trip_bytes(&text, io::distribution_from, io::distribution_to), text);
    }

    #[test]
    fn bundle_round_trip_keeps_atomic_values(seed in any::<u64>(), n in 1usize..=3) {
        let alg = BoolAlg::new(n).unwrap();
        let b = random_bundle(&mut ChaCha8Rng::seed_from_u64(seed), &alg, &rc_sig(), 3);
        let text = io::canonical(&io::bundle_to(&b));
        prop_assert_eq!(round_trip_bytes(&text, io::bundle_from, io::bundle_to), text.clone());
        // the table view of the reloaded bundle matches the original's
        let back = io::decode(&serde_json::from_str(&text).unwrap(), io::bundle_from).unwrap();
        prop_assert_eq!(bundle_to_abstract(&back), bundle_to_abstract(&b));
    }

    #[test]
    fn abstract_round_trip(seed in any::<u64>(), n in 1usize..=2) {
        let alg = BoolAlg::new(n).unwrap();
        let b = random_bundle(&mut ChaCha8Rng::seed_from_u64(seed), &alg, &rc_sig(), 2);
        let m: BValuedStructure = bundle_to_abstract(&b).into();
        let text = io::canonical(&io::bvalued_to(&m));
        prop_assert_eq!(round_trip_bytes(&text, io::bvalued_from, io::bvalued_to), text);
    }
}
