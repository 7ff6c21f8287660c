//! The `bvm` command line.
//!
//! Results go to standard output as canonical JSON. Exit codes: 0 pass or
//! found, 1 a check failed or the answer is no, 2 usage or format error,
//! 3 undecided within the finder budget.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::PrincipalFilter;
use crate::bvalued::{
    check_specialization, compactness_check_and_synthesize, fullness_check, specialize, BValuedStructure, CompactnessResult, CoordEngine, FormulaFamily,
    RecursiveEngine,
};
use crate::dist::{distribution_checks, find_multiplicative_refinement, is_good, los_criterion, saturates, Scope, Verdict};
use crate::finder::{find_model, FindResult, DEFAULT_NODE_BUDGET};
use crate::io::{self, FormatError, IoError, Node};
use crate::logic::{parse, parse_with};
use crate::suite::{self, Mutant, Report, SuiteConfig};
use crate::transfer::{los_transfer_check, pullback_distribution, pushforward, refinement_step, TransferError};
use crate::ultrapower::{boolean_ultrapower, check_pre_los, los_check, DEFAULT_ELEMENT_CAP};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Parser, Debug)]
#[command(name = "bvm", version, about = "Finite Boolean-valued models and the distribution calculus")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a formula and print its syntax tree.
    Parse {
        formula: String,
        /// Check symbols against this signature file.
        #[arg(long)]
        signature: Option<PathBuf>,
    },
    /// Search for a finite model of a task file.
    FindModel { task: PathBuf },
    /// The Boolean value of a sentence in a bundle or abstract structure.
    Eval {
        structure: PathBuf,
        formula: String,
        #[arg(long, value_delimiter = ',')]
        params: Vec<usize>,
        /// Require the structure's algebra to equal this one.
        #[arg(long)]
        algebra: Option<PathBuf>,
        /// Also evaluate coordinatewise (bundles only) and fail on a mismatch.
        #[arg(long)]
        compare: bool,
        #[arg(long, value_enum, default_value = "none", hide = true)]
        mutant: MutantArg,
    },
    /// The quotient at an atom, optionally checked on all formulas up to a rank.
    Specialize {
        structure: PathBuf,
        #[arg(long)]
        atom: usize,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Per-atom compactness check, with a synthesized bundle when it succeeds.
    Compactness { constraint: PathBuf },
    #[command(subcommand)]
    Ultrapower(UltrapowerCmd),
    #[command(subcommand)]
    Dist(DistCmd),
    #[command(subcommand)]
    Transfer(TransferCmd),
    #[command(subcommand)]
    Suite(SuiteCmd),
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum MutantArg {
    None,
    Negation,
}

impl From<MutantArg> for Mutant {
    fn from(m: MutantArg) -> Mutant {
        match m {
            MutantArg::None => Mutant::None,
            MutantArg::Negation => Mutant::Negation,
        }
    }
}

#[derive(Args, Debug)]
struct Finder {
    #[arg(long, default_value_t = 3)]
    bound: usize,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
}

#[derive(Subcommand, Debug)]
enum UltrapowerCmd {
    /// The Boolean ultrapower of a structure over P(atoms), as a bundle.
    Build {
        structure: PathBuf,
        #[arg(long)]
        atoms: usize,
        #[arg(long, default_value_t = DEFAULT_ELEMENT_CAP)]
        cap: usize,
    },
    /// Fullness, elementarity of the diagonal map, and the quotient at every atom.
    Check {
        structure: PathBuf,
        #[arg(long)]
        atoms: usize,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, default_value_t = DEFAULT_ELEMENT_CAP)]
        cap: usize,
    },
}

#[derive(Subcommand, Debug)]
enum DistCmd {
    /// Distribution, multiplicativity, refinement and filter checks.
    Check {
        a: PathBuf,
        /// A second distribution, checked as a refinement of the first.
        #[arg(long)]
        refinement: Option<PathBuf>,
        #[arg(long)]
        filter: Option<PathBuf>,
    },
    /// The Łoś-map criterion for a distribution and a formula sequence.
    Los {
        a: PathBuf,
        sequence: PathBuf,
        #[command(flatten)]
        finder: Finder,
    },
    /// The possibility criterion.
    Possibility {
        a: PathBuf,
        sequence: PathBuf,
        #[command(flatten)]
        finder: Finder,
    },
    /// A multiplicative refinement in a filter.
    Refine {
        a: PathBuf,
        filter: PathBuf,
        #[arg(long)]
        nonconstant: bool,
    },
    /// Goodness of a filter, by enumerating the distributions in it.
    Good {
        filter: PathBuf,
        #[arg(long)]
        index: usize,
        #[arg(long, default_value_t = 1 << 20)]
        cap: usize,
    },
    /// The saturation sweep over the distributions in a filter.
    Saturates {
        filter: PathBuf,
        sequence: PathBuf,
        #[command(flatten)]
        finder: Finder,
        #[arg(long, default_value_t = 1 << 16)]
        cap: usize,
    },
}

#[derive(Subcommand, Debug)]
enum TransferCmd {
    /// Push a distribution forward along a homomorphism.
    Push { hom: PathBuf, a: PathBuf },
    /// Pull a target distribution back to the source.
    Pull { hom: PathBuf, a: PathBuf },
    /// The Łoś criterion on both sides of a homomorphism.
    Check {
        hom: PathBuf,
        a: PathBuf,
        sequence: PathBuf,
        #[command(flatten)]
        finder: Finder,
    },
    /// Pre-goodness of a pair of algebras, optionally extended to a good pair.
    Goodpair {
        state: PathBuf,
        #[arg(long)]
        extend: bool,
    },
    /// One refinement step against an indexed antichain.
    Step { step: PathBuf },
}

#[derive(Subcommand, Debug)]
enum SuiteCmd {
    /// Run the acceptance checks.
    Run(RunArgs),
    /// Replay the counterexamples of a JSON report through their subcommands.
    Replay { report: PathBuf },
    /// List the checks.
    List,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, env = "BVM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "BVM_ATOMS")]
    atoms: Option<usize>,
    #[arg(long, env = "BVM_FIBERS")]
    fibers: Option<usize>,
    #[arg(long, env = "BVM_INDEX")]
    index: Option<usize>,
    #[arg(long, env = "BVM_RANK")]
    rank: Option<usize>,
    #[arg(long, env = "BVM_BOUND")]
    bound: Option<usize>,
    #[arg(long, env = "BVM_BUDGET", default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
    /// Checks to run, by number; all when omitted.
    #[arg(long, value_delimiter = ',')]
    only: Vec<usize>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
    /// Record wall-clock time per check (the report is then not reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, default_value = "none", hide = true)]
    mutant: MutantArg,
}

/// Runs `bvm` with `args` (the program name first) and returns the exit code.
pub fn run_command<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit(out: &mut dyn Write, v: &Value) -> Result<()> {
    out.write_all(io::canonical(v).as_bytes()).map_err(invalid)
}

fn load<T>(path: &Path, f: impl FnOnce(Node) -> io::Result<T>) -> Result<T> {
    Ok(io::load(path, f)?)
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Yes => EXIT_PASS,
        Verdict::No => EXIT_FAIL,
        Verdict::Unknown => EXIT_UNKNOWN,
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Parse { formula, signature } => {
            let phi = match signature {
                Some(p) => parse_with(&formula, &load(&p, io::signature_from)?),
                None => parse(&formula),
            }
            .map_err(invalid)?;
            emit(out, &json!({ "ast": phi, "text": phi.to_string() }))?;
            Ok(EXIT_PASS)
        }
        Command::FindModel { task } => {
            let task = load(&task, io::finder_task_from)?;
            let (v, code) = match find_model(&task).map_err(invalid)? {
                FindResult::Found(m) => (json!({ "result": "found", "model": io::structure_to(&m) }), EXIT_PASS),
                FindResult::NoModel => (json!({ "result": "none" }), EXIT_FAIL),
                FindResult::Unknown { nodes } => (json!({ "result": "unknown", "nodes": nodes }), EXIT_UNKNOWN),
            };
            emit(out, &v)?;
            Ok(code)
        }
        Command::Eval { structure, formula, params, algebra, compare, mutant } => {
            let m = load(&structure, io::bvalued_from)?;
            if let Some(p) = algebra {
                let alg = load(&p, io::algebra_from)?;
                if &alg != m.algebra() {
                    return Err(CliError::Invalid(format!("{} does not match the algebra of {}", p.display(), structure.display())));
                }
            }
            let phi = parse_with(&formula, m.signature()).map_err(invalid)?;
            let value = RecursiveEngine::new(&m).with_mutation(Mutant::from(mutant).mutation()).eval(&phi, &params).map_err(invalid)?;
            let mut report = json!({ "formula": phi.to_string(), "params": params, "value": io::elem_to(value) });
            let mut code = EXIT_PASS;
            if compare {
                let BValuedStructure::Bundle(b) = &m else {
                    return Err(CliError::Invalid("--compare needs a bundle".into()));
                };
                let coord = CoordEngine::new(b).eval(&phi, &params).map_err(invalid)?;
                report["coordinatewise"] = io::elem_to(coord);
                report["agree"] = json!(coord == value);
                if coord != value {
                    code = EXIT_FAIL;
                }
            }
            emit(out, &report)?;
            Ok(code)
        }
        Command::Specialize { structure, atom, rank } => {
            let m = load(&structure, io::bvalued_from)?;
            let u = PrincipalFilter::ultrafilter_from_atom(m.algebra(), atom).map_err(invalid)?;
            let spec = specialize(&m, &u).map_err(invalid)?;
            let mut report = json!({ "atom": atom, "structure": io::structure_to(&spec.structure), "projection": spec.projection });
            let mut code = EXIT_PASS;
            if let Some(r) = rank {
                let failure = check_specialization(&m, &spec, &FormulaFamily::at_rank(r)).map_err(invalid)?;
                report["rank"] = json!(r);
                report["counterexample"] = json!(failure.map(|(f, ps)| json!({ "formula": f, "params": ps })));
                if report["counterexample"] != Value::Null {
                    code = EXIT_FAIL;
                }
            }
            emit(out, &report)?;
            Ok(code)
        }
        Command::Compactness { constraint } => {
            let c = load(&constraint, io::constraint_from)?;
            let result = compactness_check_and_synthesize(&c.algebra, &c.signature, &c.constraint, &c.theory, c.bound, c.budget).map_err(invalid)?;
            let (v, code) = match result {
                CompactnessResult::Synthesized { bundle, tau } => (json!({ "result": "synthesized", "bundle": io::bundle_to(&bundle), "tau": tau }), EXIT_PASS),
                CompactnessResult::NoStructure { atom } => (json!({ "result": "no_structure", "atom": atom }), EXIT_FAIL),
                CompactnessResult::Unknown { atoms } => (json!({ "result": "unknown", "atoms": atoms }), EXIT_UNKNOWN),
            };
            emit(out, &v)?;
            Ok(code)
        }
        Command::Ultrapower(cmd) => ultrapower(cmd, out),
        Command::Dist(cmd) => dist(cmd, out),
        Command::Transfer(cmd) => transfer(cmd, out),
        Command::Suite(cmd) => suite_cmd(cmd, out, err),
    }
}

fn ultrapower(cmd: UltrapowerCmd, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        UltrapowerCmd::Build { structure, atoms, cap } => {
            let m = load(&structure, io::structure_from)?;
            let alg = crate::algebra::BoolAlg::new(atoms).map_err(invalid)?;
            let up = boolean_ultrapower(&m, &alg, cap).map_err(invalid)?;
            emit(out, &io::bundle_to(up.bundle()))?;
            Ok(EXIT_PASS)
        }
        UltrapowerCmd::Check { structure, atoms, rank, cap } => {
            let m = load(&structure, io::structure_from)?;
            let alg = crate::algebra::BoolAlg::new(atoms).map_err(invalid)?;
            let up = boolean_ultrapower(&m, &alg, cap).map_err(invalid)?;
            let fam = FormulaFamily { params: 1, ..FormulaFamily::at_rank(rank) };
            let full = fullness_check(&up.as_structure(), &fam).map_err(invalid)?;
            let pre = check_pre_los(&up, &fam).map_err(invalid)?;
            let mut quotients = Vec::new();
            let mut ok = full.full && pre.elementary;
            for e in 0..atoms {
                let u = PrincipalFilter::ultrafilter_from_atom(&alg, e).map_err(invalid)?;
                let r = los_check(&up, &u, &fam).map_err(invalid)?;
                ok &= r.isomorphism_verified && r.elementary.elementary;
                quotients.push(r);
            }
            emit(out, &json!({ "elements": up.len(), "fullness": full, "pre_los": pre, "quotients": quotients, "pass": ok }))?;
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

fn dist(cmd: DistCmd, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        DistCmd::Check { a, refinement, filter } => {
            let a = load(&a, io::distribution_from)?;
            let b = match refinement {
                Some(p) => load(&p, io::distribution_from)?,
                None => a.clone(),
            };
            let f = filter.map(|p| load(&p, |n| io::filter_from(n, a.algebra()))).transpose()?;
            let checks = distribution_checks(&a, &b, f.as_ref()).map_err(invalid)?;
            emit(out, &json!(checks))?;
            let ok = checks.a_is_distribution && checks.b_is_distribution && checks.b_refines_a && checks.b_in_filter != Some(false);
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        DistCmd::Los { a, sequence, finder } => criterion(&a, &sequence, &finder, false, out),
        DistCmd::Possibility { a, sequence, finder } => criterion(&a, &sequence, &finder, true, out),
        DistCmd::Refine { a, filter, nonconstant } => {
            let a = load(&a, io::distribution_from)?;
            let f = load(&filter, |n| io::filter_from(n, a.algebra()))?;
            match find_multiplicative_refinement(&a, &f, nonconstant) {
                Ok(b) => {
                    emit(out, &json!({ "refinement": io::distribution_to(&b) }))?;
                    Ok(EXIT_PASS)
                }
                Err(e) => {
                    emit(out, &json!({ "refinement": null, "reason": e.to_string() }))?;
                    Ok(EXIT_FAIL)
                }
            }
        }
        DistCmd::Good { filter, index, cap } => {
            let (alg, f) = load(&filter, filter_with_algebra)?;
            let report = is_good(&f, &alg, index, cap).map_err(invalid)?;
            emit(out, &json!(report))?;
            Ok(if report.good { EXIT_PASS } else { EXIT_FAIL })
        }
        DistCmd::Saturates { filter, sequence, finder, cap } => {
            let (alg, f) = load(&filter, filter_with_algebra)?;
            let (seq, theory) = load(&sequence, io::sequence_from)?;
            let r = saturates(&f, &alg, &theory, &seq, finder.bound, finder.budget, cap).map_err(invalid)?;
            let entries: Vec<Value> = r
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "distribution": io::distribution_to(&e.distribution),
                        "los_map": e.los_map,
                        "possibility": e.possibility,
                        "refinement": e.refinement.as_ref().map(io::distribution_to),
                    })
                })
                .collect();
            let unknown = r.entries.iter().any(|e| e.los_map == Verdict::Unknown || e.possibility == Verdict::Unknown);
            emit(out, &json!({ "candidates": r.candidates, "entries": entries, "los_subset_of_possibility": r.los_subset_of_possibility, "all_refined": r.all_refined }))?;
            Ok(if !(r.los_subset_of_possibility && r.all_refined) {
                EXIT_FAIL
            } else if unknown {
                EXIT_UNKNOWN
            } else {
                EXIT_PASS
            })
        }
    }
}

/// `{"algebra": ..., "generator": [...]}`.
fn filter_with_algebra(n: Node) -> io::Result<(crate::algebra::BoolAlg, PrincipalFilter)> {
    n.only(&["algebra", "generator"])?;
    let alg = n.field("algebra", io::algebra_from)?;
    let gen = n.field("generator", |g| io::nonzero_elem_from(g, &alg))?;
    Ok((alg.clone(), PrincipalFilter::principal(&alg, gen).expect("generator is nonzero")))
}

fn criterion(a: &Path, sequence: &Path, finder: &Finder, possibility: bool, out: &mut dyn Write) -> Result<i32> {
    let a = load(a, io::distribution_from)?;
    let (seq, theory) = load(sequence, io::sequence_from)?;
    let report = los_criterion(&a, &seq, &theory, finder.bound, finder.budget, Scope::Atoms, possibility).map_err(invalid)?;
    emit(out, &json!(report))?;
    Ok(verdict_code(report.verdict))
}

fn transfer(cmd: TransferCmd, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        TransferCmd::Push { hom, a } => {
            let j = load(&hom, io::hom_from)?;
            let a = load(&a, io::distribution_from)?;
            let b = pushforward(&j, &a).map_err(invalid)?;
            emit(out, &io::distribution_to(&b))?;
            Ok(EXIT_PASS)
        }
        TransferCmd::Pull { hom, a } => {
            let j = load(&hom, io::hom_from)?;
            let a = load(&a, io::distribution_from)?;
            let b = pullback_distribution(&j, &a).map_err(invalid)?;
            emit(out, &io::distribution_to(&b))?;
            Ok(EXIT_PASS)
        }
        TransferCmd::Check { hom, a, sequence, finder } => {
            let j = load(&hom, io::hom_from)?;
            let a = load(&a, io::distribution_from)?;
            let (seq, theory) = load(&sequence, io::sequence_from)?;
            let r = los_transfer_check(&j, &a, &seq, &theory, finder.bound, finder.budget).map_err(invalid)?;
            emit(out, &json!(r))?;
            Ok(if r.source == Verdict::Unknown || r.target == Verdict::Unknown {
                EXIT_UNKNOWN
            } else if r.agree {
                EXIT_PASS
            } else {
                EXIT_FAIL
            })
        }
        TransferCmd::Goodpair { state, extend } => {
            let s = load(&state, io::good_pair_from)?;
            let report = s.is_pregood().map_err(invalid)?;
            let mut v = json!({ "pregood": report });
            if extend && report.pregood {
                let good = s.extend_to_good().map_err(invalid)?;
                v["extended"] = io::good_pair_to(&good);
            }
            emit(out, &v)?;
            Ok(if report.pregood { EXIT_PASS } else { EXIT_FAIL })
        }
        TransferCmd::Step { step } => {
            let (a, d, e) = load(&step, io::step_from)?;
            match refinement_step(&e, &d, &a) {
                Ok((b, e2)) => {
                    emit(out, &json!({ "refinement": io::distribution_to(&b), "filter": io::filter_to(&e2) }))?;
                    Ok(EXIT_PASS)
                }
                Err(TransferError::NoFip { index, .. }) => {
                    emit(out, &json!({ "refinement": null, "no_common_lower_bound_at": index.key() }))?;
                    Ok(EXIT_FAIL)
                }
                Err(e) => Err(invalid(e)),
            }
        }
    }
}

fn suite_cmd(cmd: SuiteCmd, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        SuiteCmd::Run(a) => {
            let cfg = SuiteConfig {
                seed: a.seed,
                atoms: a.atoms,
                fibers: a.fibers,
                index: a.index,
                rank: a.rank,
                bound: a.bound,
                budget: a.budget,
                only: a.only,
                mutant: a.mutant.into(),
            };
            let report = suite::run(&cfg, a.timing).map_err(invalid)?;
            if a.json {
                emit(out, &report.to_json())?;
            } else {
                out.write_all(report.human().as_bytes()).map_err(invalid)?;
            }
            Ok(report.exit_code())
        }
        SuiteCmd::Replay { report } => {
            let v = io::read_json(&report)?;
            let report: Report = serde_json::from_value(v).map_err(|e| invalid(format!("not a suite report: {e}")))?;
            replay(&report, out, err)
        }
        SuiteCmd::List => {
            let names: Vec<Value> = suite::criterion_names().map(|(id, n)| json!({ "id": id, "name": n })).collect();
            emit(out, &json!(names))?;
            Ok(EXIT_PASS)
        }
    }
}

/// Each counterexample with a `replay` command is rerun with `@structure`
/// replaced by a file holding its `structure`; it must fail again.
fn replay(report: &Report, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut results = Vec::new();
    let mut all = true;
    for s in &report.suites {
        let Some(cx) = &s.counterexample else { continue };
        let Some(argv) = cx.get("replay").and_then(Value::as_array) else {
            results.push(json!({ "id": s.id, "replayed": false }));
            continue;
        };
        let path = std::env::temp_dir().join(format!("bvm-replay-{}-{}.json", std::process::id(), s.id));
        io::write_json(&path, &cx["structure"])?;
        let mut args = vec!["bvm".to_string()];
        for a in argv {
            let a = a.as_str().ok_or_else(|| invalid("replay arguments must be strings"))?;
            args.push(if a == "@structure" { path.display().to_string() } else { a.to_string() });
        }
        let mut sink = Vec::new();
        let code = run_command(&args, &mut sink, err);
        let _ = std::fs::remove_file(&path);
        all &= code == EXIT_FAIL;
        results.push(json!({ "id": s.id, "replayed": true, "exit": code, "output": serde_json::from_slice::<Value>(&sink).unwrap_or(Value::Null) }));
    }
    emit(out, &json!(results))?;
    Ok(if all { EXIT_PASS } else { EXIT_FAIL })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Signature;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_command(std::iter::once("bvm").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn parse_prints_ast() {
        let (code, out, _) = run(&["parse", "forall x. x = x"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["text"], "forall x. x = x");
        assert!(v["ast"]["forall"].is_array());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(&["parse", "forall x."]).0, 2);
        assert_eq!(run(&["no-such-command"]).0, 2);
        assert_eq!(run(&["eval"]).0, 2);
        assert_eq!(run(&["suite", "run", "--only", "13"]).0, 2);
        assert_eq!(run(&["suite", "run", "--atoms", "99"]).0, 2);
    }

    #[test]
    fn help_exits_0() {
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("suite"));
    }

    #[test]
    fn signature_checked_parse() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sig.json");
        std::fs::write(&p, io::canonical(&serde_json::to_value(Signature::new().with_relation("R", 2)).unwrap())).unwrap();
        assert_eq!(run(&["parse", "R(x, x)", "--signature", p.to_str().unwrap()]).0, 0);
        assert_eq!(run(&["parse", "S(x)", "--signature", p.to_str().unwrap()]).0, 2);
    }
}
