//! The twelve acceptance criteria under the default configuration.
//!
//! Prints one line per criterion. Each must pass, with no undecided finder
//! results, in under three minutes.

use std::time::Duration;

use bvm::suite::{run, Status, SuiteConfig};

const LIMIT: Duration = Duration::from_secs(180);

#[test]
fn all_criteria_pass() {
    let report = run(&SuiteConfig::default(), true).expect("default configuration is valid");
    assert_eq!(report.suites.len(), 12);
    let mut failures = Vec::new();
    for s in &report.suites {
        let ms = s.elapsed_ms.expect("timing requested");
        let ok = s.status == Status::Pass && Duration::from_millis(ms) < LIMIT;
        println!("criterion {:>2} {:<26} {} checks={} time={}ms", s.id, s.name, if ok { "PASS" } else { "FAIL" }, s.checks, ms);
        if !ok {
            failures.push((s.id, s.status, s.counterexample.clone()));
        }
    }
    assert!(failures.is_empty(), "failing criteria: {failures:?}");
}
