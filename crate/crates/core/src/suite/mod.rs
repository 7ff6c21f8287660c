//! The verification suite: twelve acceptance checks under a fixed seed.
//!
//! Every check draws from its own ChaCha stream derived from the seed, so the
//! report does not depend on scheduling. Suites run on separate threads and the
//! report lists them by number.

mod bv;
mod dist;
mod misc;
pub(crate) mod oracle;

use std::collections::BTreeMap;
use std::fmt::Display;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bvalued::Mutation;
use crate::finder::DEFAULT_NODE_BUDGET;

/// Largest caps accepted; beyond them the exhaustive checks stop being desk-sized.
pub const MAX_ATOMS: usize = 8;
pub const MAX_FIBER: usize = 4;
pub const MAX_INDEX: usize = 4;
pub const MAX_RANK: usize = 3;
pub const MAX_BOUND: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SuiteError {
    #[error("bad suite configuration: {0}")]
    BadConfig(String),
    #[error("no criterion numbered {0}; criteria are 1..=12")]
    UnknownCriterion(usize),
}

/// Deliberate faults, used to confirm the suite can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mutant {
    #[default]
    None,
    /// Negation in the recursive evaluator also flips the last atom.
    Negation,
}

impl Mutant {
    pub fn is_none(&self) -> bool {
        *self == Mutant::None
    }

    pub(crate) fn mutation(self) -> Mutation {
        match self {
            Mutant::None => Mutation::None,
            Mutant::Negation => Mutation::NegationTogglesLastAtom,
        }
    }
}

/// Caps lower each check's own instance sizes; `None` keeps them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub atoms: Option<usize>,
    pub fibers: Option<usize>,
    pub index: Option<usize>,
    pub rank: Option<usize>,
    pub bound: Option<usize>,
    pub budget: u64,
    /// Criteria to run; empty runs all.
    pub only: Vec<usize>,
    #[serde(default, skip_serializing_if = "Mutant::is_none")]
    pub mutant: Mutant,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, atoms: None, fibers: None, index: None, rank: None, bound: None, budget: DEFAULT_NODE_BUDGET, only: Vec::new(), mutant: Mutant::None }
    }
}

impl SuiteConfig {
    /// Whether any instance cap is set; capped runs may find fewer instances.
    pub fn is_capped(&self) -> bool {
        [self.atoms, self.fibers, self.index, self.rank, self.bound].iter().any(Option::is_some)
    }

    pub fn validate(&self) -> Result<(), SuiteError> {
        let caps = [("atoms", self.atoms, MAX_ATOMS), ("fibers", self.fibers, MAX_FIBER), ("index", self.index, MAX_INDEX), ("rank", self.rank, MAX_RANK), ("bound", self.bound, MAX_BOUND)];
        for (name, v, max) in caps {
            match v {
                Some(0) if name != "index" && name != "rank" => return Err(SuiteError::BadConfig(format!("{name} must be at least 1"))),
                Some(v) if v > max => return Err(SuiteError::BadConfig(format!("{name} = {v} exceeds the maximum {max}"))),
                _ => {}
            }
        }
        if self.budget == 0 {
            return Err(SuiteError::BadConfig("budget must be positive".into()));
        }
        if let Some(&id) = self.only.iter().find(|&&id| !(1..=CRITERIA.len()).contains(&id)) {
            return Err(SuiteError::UnknownCriterion(id));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unknown,
}

impl Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub id: usize,
    pub name: String,
    pub status: Status,
    pub checks: u64,
    /// Instances the finder could not decide within its budget.
    pub unknown: u64,
    pub summary: BTreeMap<String, Value>,
    pub counterexample: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: SuiteConfig,
    pub status: Status,
    pub suites: Vec<SuiteReport>,
}

impl Report {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("reports serialize")
    }

    /// 0 all pass, 1 some check failed, 3 only undecided results besides passes.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Unknown => 3,
        }
    }

    pub fn human(&self) -> String {
        let mut out = format!("suite seed={}\n", self.config.seed);
        for s in &self.suites {
            out += &format!("[{:<7}] {:>2} {:<28} checks={}", s.status.to_string(), s.id, s.name, s.checks);
            if s.unknown > 0 {
                out += &format!(" unknown={}", s.unknown);
            }
            if let Some(ms) = s.elapsed_ms {
                out += &format!(" time={ms}ms");
            }
            out.push('\n');
            if let Some(cx) = &s.counterexample {
                out += &format!("           counterexample: {}\n", serde_json::to_string(cx).expect("values serialize"));
            }
        }
        let count = |st: Status| self.suites.iter().filter(|s| s.status == st).count();
        out += &format!("overall: {} ({} pass, {} fail, {} unknown)\n", self.status, count(Status::Pass), count(Status::Fail), count(Status::Unknown));
        out
    }
}

/// Per-check running totals. Failures are returned as `Err(counterexample)`.
#[derive(Default)]
pub(crate) struct Tally {
    checks: u64,
    unknown: u64,
    summary: BTreeMap<String, Value>,
}

pub(crate) type Outcome = Result<(), Value>;

impl Tally {
    pub fn ensure(&mut self, ok: bool, counterexample: impl FnOnce() -> Value) -> Outcome {
        self.checks += 1;
        if ok {
            Ok(())
        } else {
            Err(counterexample())
        }
    }

    pub fn passed(&mut self, n: u64) {
        self.checks += n;
    }

    pub fn unknown(&mut self) {
        self.unknown += 1;
    }

    pub fn note(&mut self, key: &str, v: impl Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(v).expect("notes serialize"));
    }

    pub fn bump(&mut self, key: &str) {
        let e = self.summary.entry(key.to_string()).or_insert(json!(0));
        *e = json!(e.as_u64().unwrap_or(0) + 1);
    }
}

/// Turns a library error into a counterexample naming the step.
pub(crate) fn err<E: Display>(step: &'static str) -> impl FnOnce(E) -> Value {
    move |e| json!({ "step": step, "error": e.to_string() })
}

pub(crate) struct Ctx<'a> {
    pub cfg: &'a SuiteConfig,
    id: usize,
}

impl Ctx<'_> {
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        r.set_stream((self.id as u64) << 8 | stream);
        r
    }

    /// A stream shared by every criterion, for instance families used twice.
    pub fn shared_rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        r.set_stream(0xff << 8 | stream);
        r
    }

    pub fn atoms(&self, natural: usize) -> usize {
        self.cfg.atoms.map_or(natural, |c| natural.min(c))
    }

    pub fn fibers(&self, natural: usize) -> usize {
        self.cfg.fibers.map_or(natural, |c| natural.min(c))
    }

    pub fn index(&self, natural: usize) -> usize {
        self.cfg.index.map_or(natural, |c| natural.min(c))
    }

    pub fn rank(&self, natural: usize) -> usize {
        self.cfg.rank.map_or(natural, |c| natural.min(c))
    }

    pub fn bound(&self, natural: usize) -> usize {
        self.cfg.bound.map_or(natural, |c| natural.min(c))
    }
}

/// Maps `f` over `items` on all cores; results keep the input order.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(threads).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p))).collect()
    })
}

type Check = fn(&Ctx, &mut Tally) -> Outcome;

const CRITERIA: [(&str, Check); 12] = [
    ("dual-evaluation", bv::dual_evaluation),
    ("specialization", bv::specialization),
    ("boolean-ultrapower", bv::ultrapower),
    ("compactness", bv::compactness),
    ("type-round-trip", dist::type_round_trip),
    ("goodness", dist::goodness),
    ("witness-sets", dist::witness_sets),
    ("refinement-step", dist::refinement_step_check),
    ("separation-of-variables", misc::separation),
    ("criterion-vs-definition", dist::criterion_vs_definition),
    ("regular-sequences", misc::regular_sequences),
    ("parser-and-determinism", misc::parser_and_determinism),
];

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into())
}

fn run_one(cfg: &SuiteConfig, id: usize, timing: bool) -> SuiteReport {
    let (name, check) = CRITERIA[id - 1];
    let ctx = Ctx { cfg, id };
    let start = Instant::now();
    let mut tally = Tally::default();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check(&ctx, &mut tally)));
    let counterexample = match result {
        Ok(Ok(())) => None,
        Ok(Err(cx)) => Some(cx),
        Err(p) => Some(json!({ "panic": panic_message(p.as_ref()) })),
    };
    let status = match (&counterexample, tally.unknown) {
        (Some(_), _) => Status::Fail,
        (None, 0) => Status::Pass,
        (None, _) => Status::Unknown,
    };
    SuiteReport {
        id,
        name: name.to_string(),
        status,
        checks: tally.checks,
        unknown: tally.unknown,
        summary: tally.summary,
        counterexample,
        elapsed_ms: timing.then(|| start.elapsed().as_millis() as u64),
    }
}

/// Runs the selected criteria concurrently; `timing` adds wall-clock times,
/// which makes the report nondeterministic.
pub fn run(cfg: &SuiteConfig, timing: bool) -> Result<Report, SuiteError> {
    cfg.validate()?;
    let ids: Vec<usize> = if cfg.only.is_empty() { (1..=CRITERIA.len()).collect() } else { cfg.only.iter().copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect() };
    let mut suites: Vec<SuiteReport> = std::thread::scope(|s| {
        let handles: Vec<_> = ids.iter().map(|&id| s.spawn(move || run_one(cfg, id, timing))).collect();
        handles.into_iter().map(|h| h.join().expect("suite panics are caught")).collect()
    });
    suites.sort_by_key(|s| s.id);
    let status = if suites.iter().any(|s| s.status == Status::Fail) {
        Status::Fail
    } else if suites.iter().any(|s| s.status == Status::Unknown) {
        Status::Unknown
    } else {
        Status::Pass
    };
    Ok(Report { config: cfg.clone(), status, suites })
}

pub fn criterion_names() -> impl Iterator<Item = (usize, &'static str)> {
    CRITERIA.iter().enumerate().map(|(i, (n, _))| (i + 1, *n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SuiteConfig::default().validate().is_ok());
        assert_eq!(SuiteConfig { only: vec![13], ..Default::default() }.validate(), Err(SuiteError::UnknownCriterion(13)));
        assert!(matches!(SuiteConfig { atoms: Some(0), ..Default::default() }.validate(), Err(SuiteError::BadConfig(_))));
        assert!(matches!(SuiteConfig { rank: Some(MAX_RANK + 1), ..Default::default() }.validate(), Err(SuiteError::BadConfig(_))));
        assert!(SuiteConfig { index: Some(0), rank: Some(0), ..Default::default() }.validate().is_ok());
    }

    #[test]
    fn degenerate_caps_pass() {
        let cfg = SuiteConfig { atoms: Some(1), fibers: Some(1), index: Some(1), rank: Some(1), bound: Some(1), only: (3..=12).collect(), ..Default::default() };
        let report = run(&cfg, false).unwrap();
        for s in &report.suites {
            assert_eq!(s.status, Status::Pass, "{} {:?}", s.name, s.counterexample);
        }
        assert_eq!(report.exit_code(), 0);
    }

    #[test]
    fn report_lists_suites_by_number() {
        let cfg = SuiteConfig { only: vec![11, 7, 11], ..Default::default() };
        let report = run(&cfg, false).unwrap();
        let ids: Vec<usize> = report.suites.iter().map(|s| s.id).collect();
        assert_eq!(ids, vec![7, 11]);
        assert!(report.suites.iter().all(|s| s.elapsed_ms.is_none()));
        assert!(report.human().ends_with("overall: pass (2 pass, 0 fail, 0 unknown)\n"));
    }

    #[test]
    fn streams_differ_by_criterion() {
        use rand::RngCore;
        let cfg = SuiteConfig::default();
        let (mut a, mut b) = (Ctx { cfg: &cfg, id: 1 }.rng(0), Ctx { cfg: &cfg, id: 2 }.rng(0));
        assert_ne!(a.next_u64(), b.next_u64());
    }
}
