//! End-to-end runs: analysis, both syntheses, comparison and checks, plus
//! the bundled example corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::abs::Conjunct;
use crate::analysis::{analyze, emit_tables, to_json, Options, StateGraph, StateTables};
use crate::compare::{answer_multiset, compare_programs, read_queries, Report};
use crate::engine::{solve, solve_ltr, Limits};
use crate::error::{Error, Result};
use crate::metaint::{encode_as_logic_program, mi_run, GammaTrace, Variant};
use crate::parser::{parse_program, parse_query, print_atom};
use crate::pd::{self, check_closedness, Filters, Request, Residual};
use crate::policy::Policy;
use crate::synth::{synthesize, Synthesized};
use crate::term::{Atom, PredKey, Program, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Classic,
    Futamura,
    Both,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "classic" => Ok(Mode::Classic),
            "futamura" => Ok(Mode::Futamura),
            "both" => Ok(Mode::Both),
            other => Err(Error::Usage(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    pub mode: Mode,
    pub limits: Limits,
    pub analysis: Options,
    /// Largest accepted relative inference deviation between the syntheses.
    pub threshold: f64,
    /// Seed for the sampled simulation check.
    pub seed: u64,
    /// Perturbed copies of each query in the sampled simulation check.
    pub samples: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            mode: Mode::Both,
            limits: Limits::default(),
            analysis: Options::default(),
            threshold: 0.05,
            seed: 0,
            samples: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, ok: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), ok, detail: detail.into() }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub graph: StateGraph,
    pub classic: Option<Synthesized>,
    pub futamura: Option<Residual>,
    pub report: Option<Report>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

/// The variant that can run the tables: extended when any multi is split or folded.
pub fn variant_for(t: &StateTables) -> Variant {
    if t.extracted_patt.is_empty() && t.grouping.is_empty() {
        Variant::Simple
    } else {
        Variant::Extended
    }
}

pub fn entry_key(g: &StateGraph) -> Result<PredKey> {
    match g.state(g.entry).map(Vec::as_slice) {
        Some([Conjunct::Atom(a)]) => Ok(a.key()),
        _ => Err(Error::Specialize("entry state must be a single atom".into())),
    }
}

/// Encodes the tables and specializes the encoding for the entry predicate.
pub fn futamura(g: &StateGraph, p: &Program, filters: Option<Filters>, overrides: Option<&str>) -> Result<Residual> {
    let tables = emit_tables(g, p);
    let variant = variant_for(&tables);
    let subject = encode_as_logic_program(&tables, variant)?;
    let filters = match filters {
        Some(f) => f,
        None => Filters::parse(match variant {
            Variant::Simple => pd::SIMPLE_FILTERS,
            Variant::Extended => pd::EXTENDED_FILTERS,
        })?,
    };
    let mut annotations = pd::default_annotations(&subject);
    annotations.apply(&subject, &pd::parse_overrides(overrides.unwrap_or(pd::MI_ANNOTATIONS))?);
    let req = Request { entry: pd::compute_entry(&entry_key(g)?), subject, filters, annotations };
    pd::specialize(&req)
}

fn perturb_term(t: &Term, rng: &mut ChaCha8Rng) -> Term {
    match t {
        Term::Int(i) if *i > 0 => Term::Int(rng.gen_range(0..=*i)),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| perturb_term(a, rng)).collect()),
        _ => t.clone(),
    }
}

/// `per_query` copies of each query with every positive integer `i` replaced
/// by a uniform draw from `0..=i`.
pub fn perturb_queries(queries: &[String], per_query: usize, seed: u64) -> Result<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for q in queries {
        let (atoms, _) = parse_query(q)?;
        for _ in 0..per_query {
            let atoms: Vec<Atom> = atoms
                .iter()
                .map(|a| Atom {
                    pred: a.pred.clone(),
                    args: a.args.iter().map(|t| perturb_term(t, &mut rng)).collect(),
                })
                .collect();
            out.push(atoms.iter().map(print_atom).collect::<Vec<_>>().join(", "));
        }
    }
    Ok(out)
}

/// Runs each query under the tables and counts goals outside γ of their state.
pub fn simulate(
    graph: &StateGraph,
    tables: &StateTables,
    queries: &[String],
    limits: Limits,
) -> Result<(usize, Vec<String>)> {
    let mut steps = 0;
    let mut bad = Vec::new();
    for q in queries {
        let (atoms, _) = parse_query(q)?;
        let trace = GammaTrace::new(graph, tables, variant_for(tables));
        solve(&tables.mi_clause, &atoms, &trace, limits)?;
        let seen = trace.seen.into_inner();
        steps += seen.len();
        if let Some((s, _)) = seen.iter().find(|(_, m)| !m) {
            bad.push(format!("{q} (state {s})"));
        }
    }
    Ok((steps, bad))
}

/// Answer multisets agree with the meta-interpreter run over the tables.
fn agrees_with_tables(prog: &Program, tables: &StateTables, queries: &[String], limits: Limits) -> Result<Vec<String>> {
    let variant = variant_for(tables);
    let mut bad = Vec::new();
    for q in queries {
        let (atoms, _) = parse_query(q)?;
        let want = mi_run(tables, &atoms, variant, limits)?;
        let got = solve_ltr(prog, &atoms, limits)?;
        if answer_multiset(&want, &atoms) != answer_multiset(&got, &atoms) || want.exhausted != got.exhausted {
            bad.push(q.clone());
        }
    }
    Ok(bad)
}

fn agreement_check(name: &str, bad: Vec<String>) -> Check {
    if bad.is_empty() {
        Check::new(name, true, "")
    } else {
        Check::new(name, false, format!("differs on {}", bad.join("; ")))
    }
}

pub fn run(p: &Program, policy: &Policy, queries: &[String], cfg: &Config) -> Result<Outcome> {
    let graph = analyze(p, policy, &cfg.analysis).map_err(|e| e.in_stage("analyze"))?;
    let tables = emit_tables(&graph, p);
    let mut checks = vec![];
    let closed = graph.closedness_violations();
    checks.push(Check::new("graph closed", closed.is_empty(), format!("{} violations", closed.len())));
    let sampled = perturb_queries(queries, cfg.samples, cfg.seed).map_err(|e| e.in_stage("run"))?;
    let (steps, bad) = simulate(&graph, &tables, &sampled, cfg.limits).map_err(|e| e.in_stage("run"))?;
    checks.push(Check::new(
        "sampled simulation",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{steps} steps, seed {}", cfg.seed)
        } else {
            format!("outside γ: {}", bad.join("; "))
        },
    ));
    let classic = match cfg.mode {
        Mode::Classic | Mode::Both => Some(synthesize(&graph, p).map_err(|e| e.in_stage("synthesize"))?),
        Mode::Futamura => None,
    };
    let futamura = match cfg.mode {
        Mode::Futamura | Mode::Both => Some(futamura(&graph, p, None, None).map_err(|e| e.in_stage("specialize"))?),
        Mode::Classic => None,
    };
    if let Some(c) = &classic {
        let bad = agrees_with_tables(&c.program(), &tables, queries, cfg.limits).map_err(|e| e.in_stage("run"))?;
        checks.push(agreement_check("classic answers", bad));
    }
    if let Some(r) = &futamura {
        let v = check_closedness(r);
        checks.push(Check::new("residual closed", v.is_empty(), v.join("; ")));
        let bad = agrees_with_tables(&r.program(), &tables, queries, cfg.limits).map_err(|e| e.in_stage("run"))?;
        checks.push(agreement_check("futamura answers", bad));
    }
    let report = match (&classic, &futamura) {
        (Some(c), Some(r)) => {
            let rep =
                compare_programs(&c.program(), &r.program(), queries, cfg.limits).map_err(|e| e.in_stage("compare"))?;
            checks.push(Check::new("syntheses agree", rep.all_equal, ""));
            checks.push(Check::new(
                "inference deviation",
                rep.deviation <= cfg.threshold,
                format!("{:.2}% (threshold {:.2}%)", rep.deviation * 100.0, cfg.threshold * 100.0),
            ));
            Some(rep)
        }
        _ => None,
    };
    Ok(Outcome { graph, classic, futamura, report, checks })
}

/// One bundled example: program, policy, answer queries, queries that must
/// fail finitely and the golden analysis graph.
#[derive(Clone, Copy, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub program: &'static str,
    pub policy: &'static str,
    pub queries: &'static str,
    pub failing: &'static str,
    pub graph: &'static str,
    /// Whether the program itself terminates under left-to-right selection.
    pub ltr_terminates: bool,
}

macro_rules! entry {
    ($name:literal, $ltr:expr) => {
        CorpusEntry {
            name: $name,
            program: include_str!(concat!("../corpus/", $name, ".lp")),
            policy: include_str!(concat!("../corpus/", $name, ".policy")),
            queries: include_str!(concat!("../corpus/", $name, ".queries")),
            failing: include_str!(concat!("../corpus/", $name, ".fail")),
            graph: include_str!(concat!("../corpus/", $name, ".graph.json")),
            ltr_terminates: $ltr,
        }
    };
}

pub const CORPUS: &[CorpusEntry] = &[
    entry!("permsort", true),
    entry!("primes", false),
    entry!("queens", true),
    entry!("spaced", true),
    entry!("subsum", true),
];

pub fn corpus_entry(name: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.name == name)
}

impl CorpusEntry {
    pub fn program(&self) -> Result<Program> {
        parse_program(self.program)
    }

    pub fn policy(&self) -> Result<Policy> {
        Policy::parse(self.policy)
    }

    pub fn queries(&self) -> Vec<String> {
        read_queries(self.queries)
    }

    pub fn failing(&self) -> Vec<String> {
        read_queries(self.failing)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestRow {
    pub name: String,
    pub checks: Vec<Check>,
}

impl SelftestRow {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

/// Every failing query fails finitely in every program given.
fn fails_finitely(progs: &[(&str, Program)], queries: &[String], limits: Limits) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for q in queries {
        let (atoms, _) = parse_query(q)?;
        for (name, p) in progs {
            let r = solve_ltr(p, &atoms, limits)?;
            if !r.exhausted || !r.answers.is_empty() {
                bad.push(format!("{name}: {q}"));
            }
        }
    }
    Ok(bad)
}

pub fn selftest_entry(e: &CorpusEntry, cfg: &Config) -> SelftestRow {
    let checks = (|| -> Result<Vec<Check>> {
        let p = e.program()?;
        let policy = e.policy()?;
        let out = run(&p, &policy, &e.queries(), cfg)?;
        let mut checks = out.checks.clone();
        let golden = to_json(&out.graph).trim_end() == e.graph.trim_end();
        checks.push(Check::new("golden graph", golden, if golden { "" } else { "fixture mismatch" }));
        let mut progs = vec![];
        if e.ltr_terminates {
            progs.push(("naive", p.clone()));
        }
        if let Some(c) = &out.classic {
            progs.push(("classic", c.program()));
        }
        if let Some(r) = &out.futamura {
            progs.push(("futamura", r.program()));
        }
        let bad = fails_finitely(&progs, &e.failing(), cfg.limits)?;
        checks.push(Check::new("finite failure", bad.is_empty(), bad.join("; ")));
        Ok(checks)
    })()
    .unwrap_or_else(|err| vec![Check::new("pipeline", false, err.to_string())]);
    SelftestRow { name: e.name.into(), checks }
}

/// Runs the selected corpus entries concurrently.
pub fn selftest(filter: Option<&str>, cfg: &Config) -> Vec<SelftestRow> {
    let entries: Vec<&CorpusEntry> = CORPUS.iter().filter(|e| filter.is_none_or(|f| e.name == f)).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = entries.iter().map(|e| s.spawn(move || selftest_entry(e, cfg))).collect();
        handles.into_iter().map(|h| h.join().expect("selftest thread")).collect()
    })
}
