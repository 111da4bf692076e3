//! Command-line front end. [`run`] is the whole program minus process exit,
//! so it can be driven in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::checkpoint::Checkpoint;
use crate::delta::{
    classify_delta_primitive_f2, delta_primitive_m2, delta_primitive_necessary, odd_rank_obstruction, verify_inverse_certificate,
    DeltaM2,
};
use crate::error::{Error, Result};
use crate::fox::{double_jacobian, jacobian, left_derivative_checked, linearized_matrix, right_derivative_checked};
use crate::groupring::{IntMatrix, RingElement, RingMatrix};
use crate::maps::{
    min_generator_support, orbit_violation_witness, same_orbit, subgroup_rank, whitehead_minimize, Endomorphism, OrbitDisproof,
    OrbitOutcome,
};
use crate::primitivity::{
    blocking_search, blocking_verdict, cmz_necessary_condition, default_candidates, enumerate_primitives_f2, is_primitive,
    BlockingVerdict, CandidateResult, SearchParams, SearchReport,
};
use crate::verify::verify_paper;
use crate::words::{parse_unranked, enumerate_reduced, Rank, Word};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "foxprim", version, about = "Fox calculus, primitivity and automorphism recognition in free groups")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Rank n of the free group (default: largest generator used, at least 2)
    #[arg(long, global = true)]
    pub rank: Option<usize>,
    /// Node budget for orbit searches
    #[arg(long, global = true, default_value_t = crate::maps::DEFAULT_BUDGET)]
    pub budget: usize,
    /// Worker threads for search commands
    #[arg(long, global = true, env = "FOXPRIM_WORKERS")]
    pub workers: Option<usize>,
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized suites; recorded in reports
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduce, inspect and enumerate words
    #[command(subcommand)]
    Word(WordCmd),
    /// Fox derivatives and Jacobians
    #[command(subcommand)]
    Fox(FoxCmd),
    /// Apply and compose endomorphisms
    #[command(subcommand)]
    Map(MapCmd),
    /// Automorphism recognition
    #[command(subcommand)]
    Aut(CheckCmd),
    /// Monomorphism recognition
    #[command(subcommand)]
    Mono(CheckCmd),
    /// Automorphic orbits
    #[command(subcommand)]
    Orbit(OrbitCmd),
    /// Primitive elements and blocking words
    #[command(subcommand)]
    Prim(PrimCmd),
    /// Delta-primitivity
    #[command(subcommand)]
    Delta(DeltaCmd),
    /// Run the built-in check suite over the worked examples
    VerifyPaper,
}

#[derive(Debug, Subcommand)]
pub enum WordCmd {
    /// Print the freely reduced form
    Reduce { word: String },
    /// List all reduced words up to a length
    Enum {
        #[arg(long)]
        max_len: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum FoxCmd {
    /// Left derivative d_i
    Left { word: String, i: usize },
    /// Right derivative d'_i
    Right { word: String, i: usize },
    /// Jacobian of a map
    Jacobian { map: String },
    /// Double Jacobian D_u
    Djac { word: String },
    /// Linearized matrix of an element of F'
    Linmat { word: String },
}

#[derive(Debug, Subcommand)]
pub enum MapCmd {
    Apply { map: String, word: String },
    /// Print first ∘ second
    Compose { first: String, second: String },
}

#[derive(Debug, Subcommand)]
pub enum CheckCmd {
    Check { map: String },
}

#[derive(Debug, Subcommand)]
pub enum OrbitCmd {
    /// Whitehead-minimal representative
    Min { word: String },
    /// Decide whether two words share an orbit
    Same { first: String, second: String },
    /// Search for an orbit element the map sends out of the orbit (rank 2)
    Witness {
        map: String,
        word: String,
        #[arg(long)]
        max_len: usize,
    },
    /// Fewest generators an orbit element can use
    Support { word: String },
}

#[derive(Debug, Subcommand)]
pub enum PrimCmd {
    Check { word: String },
    /// Cyclically reduced primitives of F2
    Enum {
        #[arg(long)]
        max_len: usize,
    },
    /// Blocking verdict for one word
    Block {
        word: String,
        #[arg(long)]
        max_len: usize,
    },
    /// Bounded search for blocking words in rank >= 3
    BlockSearch {
        /// Longest candidate prefix
        #[arg(long)]
        cand_len: usize,
        /// Longest extension tested for primitivity
        #[arg(long)]
        max_len: usize,
        /// Report file (JSON)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write progress to this checkpoint file
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from this checkpoint file
        #[arg(long)]
        resume: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DeltaCmd {
    /// Exact decision in M2
    M2 { word: String },
    /// Unimodularity of the linearized matrix
    Necessary { word: String },
    /// Verify an inverse certificate read from a JSON matrix file
    Certify {
        word: String,
        #[arg(long)]
        inverse: PathBuf,
    },
    /// Odd-rank obstruction
    Odd { word: String },
    /// Classification in F2
    F2 { word: String },
}

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub rank: Option<Rank>,
    pub budget: usize,
    pub workers: usize,
    pub json: bool,
    pub seed: u64,
}

impl RunConfig {
    fn from_opts(g: &GlobalOpts) -> Result<Self> {
        if g.budget == 0 {
            return Err(Error::Precondition("--budget must be positive".into()));
        }
        let workers = match g.workers {
            Some(0) => return Err(Error::Precondition("--workers must be positive".into())),
            Some(w) => w,
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        let rank = g.rank.map(Rank::new).transpose()?;
        Ok(RunConfig { rank, budget: g.budget, workers, json: g.json, seed: g.seed })
    }

    /// Explicit rank, or the smallest rank (at least 2) covering every word.
    fn rank_for(&self, words: &[&Word]) -> Result<Rank> {
        let needed = words.iter().map(|w| w.max_generator()).max().unwrap_or(0).max(2);
        match self.rank {
            Some(r) => {
                for w in words {
                    w.check_rank(r)?;
                }
                Ok(r)
            }
            None => Rank::new(needed),
        }
    }

    fn provenance(&self) -> Value {
        json!({ "tool": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION"), "seed": self.seed })
    }
}

/// What a command produced: text and JSON renderings plus an exit status.
struct Report {
    text: String,
    json: Value,
    status: i32,
}

impl Report {
    fn ok(text: impl Into<String>, json: Value) -> Self {
        Report { text: text.into(), json, status: EXIT_OK }
    }
}

fn parse_word(s: &str) -> Result<Word> {
    parse_unranked(s)
}

fn word_json(w: &Word, rank: Rank) -> Value {
    serde_json::to_value(w.to_json(rank)).expect("serializable")
}

fn matrix_text<T: std::fmt::Display>(m: &crate::groupring::Matrix<T>) -> String {
    m.to_string()
}

fn int_matrix_json(m: &IntMatrix) -> Value {
    Value::Array(m.rows().iter().map(|r| Value::Array(r.iter().map(|x| Value::String(x.to_string())).collect())).collect())
}

fn outcome_json(o: &OrbitOutcome) -> Value {
    match o {
        OrbitOutcome::Same(c) => json!({
            "verdict": "same",
            "source": c.source.to_string(),
            "target": c.target.to_string(),
            "steps": c.steps.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "automorphism": c.to_automorphism().to_string(),
        }),
        OrbitOutcome::Different(OrbitDisproof::MinimalLengths { left, right }) => {
            json!({ "verdict": "different", "reason": "minimal_lengths", "left": left, "right": right })
        }
        OrbitOutcome::Different(OrbitDisproof::DistinctComponents { component_size }) => {
            json!({ "verdict": "different", "reason": "distinct_components", "component_size": component_size })
        }
        OrbitOutcome::BudgetExceeded { explored } => json!({ "verdict": "budget_exceeded", "explored": explored }),
    }
}

fn run_word(cmd: &WordCmd, cfg: &RunConfig) -> Result<Report> {
    match cmd {
        WordCmd::Reduce { word } => {
            let w = parse_word(word)?;
            let rank = cfg.rank_for(&[&w])?;
            Ok(Report::ok(w.to_string(), word_json(&w, rank)))
        }
        WordCmd::Enum { max_len } => {
            let rank = cfg.rank.unwrap_or(Rank::new(2)?);
            let words: Vec<String> = enumerate_reduced(rank, *max_len).map(|w| w.to_string()).collect();
            Ok(Report::ok(words.join("\n"), json!({ "rank": rank.get(), "max_len": max_len, "words": words })))
        }
    }
}

fn run_fox(cmd: &FoxCmd, cfg: &RunConfig) -> Result<Report> {
    match cmd {
        FoxCmd::Left { word, i } | FoxCmd::Right { word, i } => {
            let w = parse_word(word)?;
            let rank = cfg.rank_for(&[&w])?;
            let a = RingElement::from_word(w);
            let d = if matches!(cmd, FoxCmd::Left { .. }) {
                left_derivative_checked(&a, *i, rank)?
            } else {
                right_derivative_checked(&a, *i, rank)?
            };
            Ok(Report::ok(d.to_string(), d.to_json()))
        }
        FoxCmd::Jacobian { map } => {
            let phi = parse_map(map, cfg)?;
            let j = jacobian(&phi);
            Ok(Report::ok(matrix_text(&j), j.to_json()))
        }
        FoxCmd::Djac { word } => {
            let w = parse_word(word)?;
            let rank = cfg.rank_for(&[&w])?;
            let d = double_jacobian(&w, rank)?;
            Ok(Report::ok(matrix_text(&d), d.to_json()))
        }
        FoxCmd::Linmat { word } => {
            let w = parse_word(word)?;
            let rank = cfg.rank_for(&[&w])?;
            let a = linearized_matrix(&w, rank)?;
            Ok(Report::ok(matrix_text(&a), int_matrix_json(&a)))
        }
    }
}

fn parse_map(text: &str, cfg: &RunConfig) -> Result<Endomorphism> {
    match cfg.rank {
        Some(r) => Endomorphism::parse_with_rank(text, r),
        None => Endomorphism::parse(text),
    }
}

fn run_map(cmd: &MapCmd, cfg: &RunConfig) -> Result<Report> {
    match cmd {
        MapCmd::Apply { map, word } => {
            let phi = parse_map(map, cfg)?;
            let w = parse_word(word)?;
            let img = phi.try_apply(&w)?;
            Ok(Report::ok(img.to_string(), word_json(&img, phi.rank())))
        }
        MapCmd::Compose { first, second } => {
            let c = parse_map(first, cfg)?.compose(&parse_map(second, cfg)?)?;
            Ok(Report::ok(c.to_string(), json!({ "map": c.to_string() })))
        }
    }
}

fn run_aut(cmd: &CheckCmd, cfg: &RunConfig) -> Result<Report> {
    let CheckCmd::Check { map } = cmd;
    let phi = parse_map(map, cfg)?;
    let aut = phi.is_automorphism();
    let text = if aut { "automorphism" } else { "not an automorphism" };
    Ok(Report::ok(text, json!({ "map": phi.to_string(), "automorphism": aut })))
}

fn run_mono(cmd: &CheckCmd, cfg: &RunConfig) -> Result<Report> {
    let CheckCmd::Check { map } = cmd;
    let phi = parse_map(map, cfg)?;
    let r = subgroup_rank(phi.images());
    let mono = r == phi.rank().get();
    let text = if mono { "monomorphism".to_string() } else { format!("not a monomorphism (image has rank {r})") };
    Ok(Report::ok(text, json!({ "map": phi.to_string(), "monomorphism": mono, "image_rank": r })))
}

fn run_orbit(cmd: &OrbitCmd, cfg: &RunConfig) -> Result<Report> {
    match cmd {
        OrbitCmd::Min { word } => {
            let w = parse_word(word)?;
            let rank = cfg.rank_for(&[&w])?;
            let (m, cert) = whitehead_minimize(&w, rank)?;
            let text = format!("{m} (length {}, {} steps)", m.len(), cert.steps.len());
            Ok(Report::ok(
                text,
                json!({
                    "word": w.to_string(), "minimal": m.to_string(), "length": m.len(),
                    "steps": cert.steps.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                }),
            ))
        }
        OrbitCmd::Same { first, second } => {
            let (u, v) = (parse_word(first)?, parse_word(second)?);
            let rank = cfg.rank_for(&[&u, &v])?;
            let outcome = same_orbit(&u, &v, rank, cfg.budget)?;
            let text = match &outcome {
                OrbitOutcome::Same(c) => format!("same orbit via {}", c.to_automorphism()),
                OrbitOutcome::Different(OrbitDisproof::MinimalLengths { left, right }) => {
                    format!("different orbits (minimal lengths {left} and {right})")
                }
                OrbitOutcome::Different(OrbitDisproof::DistinctComponents { component_size }) => {
                    format!("different orbits (minimal level of size {component_size} exhausted)")
                }
                OrbitOutcome::BudgetExceeded { explored } => format!("undecided: budget exceeded after {explored} nodes"),
            };
            let mut j = outcome_json(&outcome);
            j["budget"] = json!(cfg.budget);
            j["provenance"] = cfg.provenance();
            Ok(Report::ok(text, j))
        }
        OrbitCmd::Witness { map, word, max_len } => {
            let phi = parse_map(map, cfg)?;
            let u = parse_word(word)?;
            let w = orbit_violation_witness(&phi, &u, *max_len, cfg.budget)?;
            let text = match &w {
                Some(v) => format!("witness {v}: image {} leaves the orbit", phi.apply(v)),
                None => format!("no witness up to length {max_len}"),
            };
            Ok(Report::ok(
                text,
                json!({
                    "map": phi.to_string(), "word": u.to_string(), "max_len": max_len, "budget": cfg.budget,
                    "witness": w.as_ref().map(Word::to_string), "provenance": cfg.provenance(),
                }),
            ))
        }
        OrbitCmd::Support { word } => {
            let w = parse_word(word)?;
            let rank = cfg.rank_for(&[&w])?;
            let s = min_generator_support(&w, rank, cfg.budget)?;
            let kind = if s.exact { "exact" } else { "upper bound" };
            Ok(Report::ok(
                format!("{} generators ({kind}, witness {})", s.support, s.witness),
                json!({ "support": s.support, "exact": s.exact, "witness": s.witness.to_string(), "explored": s.explored }),
            ))
        }
    }
}

fn verdict_json(candidate: &Word, v: &BlockingVerdict, nodes: u64, bound: usize) -> Value {
    let mut j = json!({ "candidate": candidate.to_string(), "verdict": v.tag(), "bound": bound, "nodes_explored": nodes });
    match v {
        BlockingVerdict::Extendable { witness } => j["witness"] = json!(witness.to_string()),
        BlockingVerdict::BlockedProven { rule } => j["rule"] = json!(rule.to_string()),
        BlockingVerdict::BlockedUpTo { .. } => {}
    }
    j
}

fn run_prim(cmd: &PrimCmd, cfg: &RunConfig, out: &mut dyn Write) -> Result<Report> {
    match cmd {
        PrimCmd::Check { word } => {
            let w = parse_word(word)?;
            let rank = cfg.rank_for(&[&w])?;
            let p = is_primitive(&w, rank)?;
            let mut j = json!({ "word": w.to_string(), "rank": rank.get(), "primitive": p });
            if rank.get() == 2 {
                j["cmz_condition"] = json!(cmz_necessary_condition(&w, rank)?);
            }
            Ok(Report::ok(if p { "primitive" } else { "not primitive" }, j))
        }
        PrimCmd::Enum { max_len } => {
            let words: Vec<String> = enumerate_primitives_f2(*max_len).map(|w| w.to_string()).collect();
            Ok(Report::ok(
                words.join("\n"),
                json!({ "rank": 2, "max_len": max_len, "count": words.len(), "words": words, "provenance": cfg.provenance() }),
            ))
        }
        PrimCmd::Block { word, max_len } => {
            let g = parse_word(word)?;
            let rank = cfg.rank_for(&[&g])?;
            let o = blocking_verdict(&g, rank, *max_len)?;
            Ok(Report::ok(o.verdict.to_string(), verdict_json(&g, &o.verdict, o.nodes_explored, *max_len)))
        }
        PrimCmd::BlockSearch { cand_len, max_len, out: out_path, checkpoint, resume } => {
            let rank = cfg.rank.unwrap_or(Rank::new(3)?);
            let params = SearchParams { rank, cand_len: *cand_len, max_len: *max_len };
            if rank.get() < 3 {
                return Err(Error::Precondition(format!("block-search needs --rank >= 3, got {rank}")));
            }
            let done: Vec<CandidateResult> = match resume {
                Some(p) => Checkpoint::load_for(p, &params)?.completed,
                None => Vec::new(),
            };
            let candidates = default_candidates(rank, *cand_len);
            let save_to: Option<&Path> = checkpoint.as_deref().or(resume.as_deref());
            let total = candidates.len();
            let results = blocking_search(&params, &candidates, &done, cfg.workers, |so_far| {
                if let Some(p) = save_to {
                    Checkpoint { params: params.clone(), completed: so_far.to_vec() }.save(p)?;
                }
                if !cfg.json {
                    let _ = writeln!(out, "progress: {}/{total}", so_far.len());
                }
                Ok(())
            })?;
            let report = SearchReport::assemble(&params, cfg.seed, results);
            let j = serde_json::to_value(&report)?;
            if let Some(p) = out_path {
                std::fs::write(p, serde_json::to_string_pretty(&j)?)?;
            }
            let text = format!(
                "rank {} candidates up to length {} (mod symmetry): {}; survivors at max length {}: {}{}",
                rank,
                cand_len,
                report.candidates,
                max_len,
                report.survivors.len(),
                if report.survivors.is_empty() { String::new() } else { format!(" [{}]", report.survivors.join(", ")) }
            );
            Ok(Report::ok(text, j))
        }
    }
}

fn run_delta(cmd: &DeltaCmd, cfg: &RunConfig) -> Result<Report> {
    match cmd {
        DeltaCmd::M2 { word } => {
            let w = parse_word(word)?;
            let rank = cfg.rank_for(&[&w])?;
            let (text, j) = match delta_primitive_m2(&w, rank)? {
                DeltaM2::NotInDerivedSubgroup => ("not in the derived subgroup".to_string(), json!({ "verdict": "not_in_derived_subgroup" })),
                DeltaM2::NotDeltaPrimitive => ("not Delta-primitive in M2".to_string(), json!({ "verdict": "not_delta_primitive" })),
                DeltaM2::DeltaPrimitive { sign, conjugator } => (
                    format!("Delta-primitive in M2: [x1,x2]^({sign}) conjugated by monomial {conjugator:?}"),
                    json!({ "verdict": "delta_primitive", "sign": sign, "conjugator": conjugator }),
                ),
            };
            Ok(Report::ok(text, j))
        }
        DeltaCmd::Necessary { word } => {
            let w = parse_word(word)?;
            let rank = cfg.rank_for(&[&w])?;
            let ok = delta_primitive_necessary(&w, rank)?;
            let det = linearized_matrix(&w, rank)?.det()?;
            let mut text = if ok {
                format!("necessary condition holds (det {det})")
            } else {
                format!("fails the necessary condition (det {det}): not Delta-primitive")
            };
            if ok && rank.get() >= 4 {
                text.push_str("; sufficiency beyond rank 2 is not decided, supply an inverse certificate");
            }
            Ok(Report::ok(text, json!({ "word": w.to_string(), "rank": rank.get(), "necessary": ok, "det": det.to_string() })))
        }
        DeltaCmd::Certify { word, inverse } => {
            let w = parse_word(word)?;
            let rank = cfg.rank_for(&[&w])?;
            let v: Value = serde_json::from_str(&std::fs::read_to_string(inverse)?)?;
            let m = RingMatrix::from_json(&v, rank)?;
            let ok = verify_inverse_certificate(&w, &m, rank)?;
            let mut r = Report::ok(
                if ok { "certificate verified: Delta-primitive" } else { "certificate rejected" },
                json!({ "word": w.to_string(), "verified": ok }),
            );
            if !ok {
                r.status = EXIT_NEGATIVE;
            }
            Ok(r)
        }
        DeltaCmd::Odd { word } => {
            let w = parse_word(word)?;
            let rank = cfg.rank_for(&[&w])?;
            odd_rank_obstruction(&w, rank)?;
            Ok(Report::ok(
                "obstructed: linearized matrix is antisymmetric and singular",
                json!({ "word": w.to_string(), "rank": rank.get(), "obstructed": true }),
            ))
        }
        DeltaCmd::F2 { word } => {
            let w = parse_word(word)?;
            let rank = cfg.rank_for(&[&w])?;
            let ok = classify_delta_primitive_f2(&w, rank)?;
            Ok(Report::ok(
                if ok { "Delta-primitive" } else { "not Delta-primitive" },
                json!({ "word": w.to_string(), "delta_primitive": ok }),
            ))
        }
    }
}

fn run_verify(cfg: &RunConfig) -> Result<Report> {
    let checks = verify_paper(cfg.seed)?;
    let passed = checks.iter().all(|c| c.passed);
    let text = checks
        .iter()
        .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect::<Vec<_>>()
        .join("\n");
    let mut r = Report::ok(text, json!({ "passed": passed, "checks": checks, "provenance": cfg.provenance() }));
    if !passed {
        r.status = EXIT_NEGATIVE;
    }
    Ok(r)
}

fn dispatch(cli: &Cli, cfg: &RunConfig, out: &mut dyn Write) -> Result<Report> {
    match &cli.command {
        Command::Word(c) => run_word(c, cfg),
        Command::Fox(c) => run_fox(c, cfg),
        Command::Map(c) => run_map(c, cfg),
        Command::Aut(c) => run_aut(c, cfg),
        Command::Mono(c) => run_mono(c, cfg),
        Command::Orbit(c) => run_orbit(c, cfg),
        Command::Prim(c) => run_prim(c, cfg, out),
        Command::Delta(c) => run_delta(c, cfg),
        Command::VerifyPaper => run_verify(cfg),
    }
}

fn error_status(e: &Error) -> i32 {
    match e {
        Error::TheoryViolation(_) | Error::Io(_) | Error::Checkpoint(_) => EXIT_NEGATIVE,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// its output. Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{rendered}") } else { write!(out, "{rendered}") };
            return status;
        }
    };
    let result = RunConfig::from_opts(&cli.global).and_then(|cfg| dispatch(&cli, &cfg, out).map(|r| (cfg, r)));
    match result {
        Ok((cfg, report)) => {
            let _ = if cfg.json {
                writeln!(out, "{}", serde_json::to_string(&report.json).expect("serializable"))
            } else {
                writeln!(out, "{}", report.text)
            };
            report.status
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_status(&e)
        }
    }
}
