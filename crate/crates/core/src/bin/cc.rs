use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cctl_core::analysis::{analyze, emit_tables, from_json, render, to_json, Format, Options, StateGraph};
use cctl_core::compare::{compare_programs, read_queries};
use cctl_core::engine::{solve_ltr, Limits, RunResult};
use cctl_core::metaint::{encode_as_logic_program, mi_run, Variant};
use cctl_core::parser::{parse_program, parse_query, print_clause, print_program, print_term, VarScope};
use cctl_core::pd::{check_closedness, Filters};
use cctl_core::pipeline::{self, corpus_entry, Config, Mode, CORPUS};
use cctl_core::policy::Policy;
use cctl_core::synth::synthesize;
use cctl_core::term::{Program, Term};
use cctl_core::Error;

#[derive(Parser)]
#[command(name = "cc", version, about = "Compile coroutining control out of pure logic programs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Global {
    /// Inference budget per query.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    max_infer: u64,
    /// Goal stack depth limit.
    #[arg(long, global = true, default_value_t = 100_000)]
    max_depth: usize,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
}

impl Global {
    fn limits(&self) -> Limits {
        Limits { max_inferences: self.max_infer, max_depth: self.max_depth, ..Limits::default() }
    }
}

#[derive(Args, Clone)]
struct AnalysisFlags {
    /// Widen terms deeper than K when interning states.
    #[arg(long)]
    depth_k: Option<usize>,
    #[arg(long, default_value_t = 500)]
    max_states: usize,
    /// Disable multi generalization.
    #[arg(long)]
    no_multi: bool,
}

impl AnalysisFlags {
    fn options(&self) -> Options {
        Options { depth_k: self.depth_k, max_states: self.max_states, multi: !self.no_multi }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a program and print it in canonical form.
    Parse { file: PathBuf },
    /// Run a query left to right.
    Run {
        file: PathBuf,
        #[arg(long)]
        query: String,
        /// Print only the number of answers.
        #[arg(long)]
        count: bool,
    },
    /// Build the state graph of a program under a policy.
    Analyze {
        file: PathBuf,
        policy: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: Format,
        #[command(flatten)]
        analysis: AnalysisFlags,
    },
    /// Run a query under the table-driven meta-interpreter.
    MiRun {
        graph: PathBuf,
        file: PathBuf,
        #[arg(long)]
        query: String,
        /// Use the multi-aware interpreter.
        #[arg(long)]
        extended: bool,
    },
    /// Emit the meta-interpreter and its tables as one program.
    Encode {
        graph: PathBuf,
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        extended: bool,
    },
    /// Specialize the encoded meta-interpreter for the graph's entry.
    Specialize {
        graph: PathBuf,
        file: PathBuf,
        #[arg(long)]
        filters: Option<PathBuf>,
        #[arg(long)]
        ann: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize a left-to-right program from a state graph.
    Synthesize {
        graph: PathBuf,
        file: PathBuf,
        policy: PathBuf,
        #[arg(long, default_value = "classic")]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare answers and inference counts of two programs.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Analyze, synthesize, specialize and compare in one go.
    Pipeline {
        file: PathBuf,
        policy: PathBuf,
        #[arg(long, default_value = "both")]
        mode: Mode,
        /// Queries to compare on; defaults to the bundled queries of a corpus program.
        #[arg(long)]
        queries: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        #[command(flatten)]
        analysis: AnalysisFlags,
    },
    /// Run the bundled corpus end to end.
    Selftest {
        #[arg(long)]
        filter: Option<String>,
    },
}

/// Usage and IO problems exit 2, failed checks exit 1.
enum Failure {
    Check(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Usage(_) | Error::Io(_) => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn program(path: &Path) -> Result<Program, Failure> {
    Ok(parse_program(&read(path)?)?)
}

fn policy(path: &Path) -> Result<Policy, Failure> {
    Ok(Policy::parse(&read(path)?)?)
}

fn graph(path: &Path) -> Result<StateGraph, Failure> {
    Ok(from_json(&read(path)?)?)
}

fn print_answers(r: &RunResult, scope: &VarScope, count: bool, json: bool) {
    let named = scope.named();
    let rows: Vec<Vec<(String, String)>> = r
        .answers
        .iter()
        .map(|s| named.iter().map(|(n, v)| (n.clone(), print_term(&s.apply(&Term::Var(*v))))).collect())
        .collect();
    if json {
        let answers: Vec<_> = rows
            .iter()
            .map(|row| row.iter().map(|(n, t)| (n.clone(), json!(t))).collect::<serde_json::Map<_, _>>())
            .collect();
        let v = json!({ "answers": answers, "inferences": r.inferences, "exhausted": r.exhausted });
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
        return;
    }
    if count {
        println!("answers: {}", rows.len());
    } else {
        for row in &rows {
            if row.is_empty() {
                println!("true");
            }
            for (n, t) in row {
                println!("{n} = {t}");
            }
            if named.len() > 1 {
                println!();
            }
        }
    }
    if !r.exhausted {
        println!("% search cut short by a limit");
    }
    println!("inferences: {}", r.inferences);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::Parse { file } => {
            let p = program(file)?;
            if g.json {
                let clauses: Vec<String> = p.clauses.iter().map(print_clause).collect();
                let preds: Vec<String> = p.predicates().iter().map(ToString::to_string).collect();
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({ "clauses": clauses, "predicates": preds })).expect("json")
                );
            } else {
                print!("{}", print_program(&p));
            }
            Ok(())
        }
        Cmd::Run { file, query, count } => {
            let p = program(file)?;
            let (q, scope) = parse_query(query)?;
            let r = solve_ltr(&p, &q, g.limits())?;
            print_answers(&r, &scope, *count, g.json);
            Ok(())
        }
        Cmd::Analyze { file, policy: pol, out, dot, format, analysis } => {
            let p = program(file)?;
            let sg = analyze(&p, &policy(pol)?, &analysis.options())?;
            if let Some(d) = dot {
                write(d, &render(&sg, Format::Dot))?;
            }
            match out {
                Some(o) => write(o, &to_json(&sg)),
                None => emit(None, &render(&sg, if g.json { Format::Json } else { *format })),
            }
        }
        Cmd::MiRun { graph: gp, file, query, extended } => {
            let t = emit_tables(&graph(gp)?, &program(file)?);
            let (q, scope) = parse_query(query)?;
            let v = if *extended { Variant::Extended } else { Variant::Simple };
            let r = mi_run(&t, &q, v, g.limits())?;
            print_answers(&r, &scope, false, g.json);
            Ok(())
        }
        Cmd::Encode { graph: gp, file, out, extended } => {
            let t = emit_tables(&graph(gp)?, &program(file)?);
            let v = if *extended { Variant::Extended } else { pipeline::variant_for(&t) };
            emit(out.as_deref(), &print_program(&encode_as_logic_program(&t, v)?))
        }
        Cmd::Specialize { graph: gp, file, filters, ann, out } => {
            let sg = graph(gp)?;
            let p = program(file)?;
            let filters = filters.as_deref().map(|f| Filters::parse(&read(f)?).map_err(Failure::from)).transpose()?;
            let ann = ann.as_deref().map(read).transpose()?;
            let r = pipeline::futamura(&sg, &p, filters, ann.as_deref())?;
            let v = check_closedness(&r);
            if !v.is_empty() {
                return Err(Failure::Check(format!("residual not closed: {}", v.join("; "))));
            }
            emit(out.as_deref(), &print_program(&r.program()))
        }
        Cmd::Synthesize { graph: gp, file, policy: pol, mode, out } => {
            let sg = graph(gp)?;
            let p = program(file)?;
            policy(pol)?;
            let text = match mode {
                Mode::Classic => print_program(&synthesize(&sg, &p)?.program()),
                Mode::Futamura => print_program(&pipeline::futamura(&sg, &p, None, None)?.program()),
                Mode::Both => return Err(Failure::Usage("synthesize takes --mode classic or futamura".into())),
            };
            emit(out.as_deref(), &text)
        }
        Cmd::Compare { a, b, queries, report } => {
            let qs = read_queries(&read(queries)?);
            let rep = compare_programs(&program(a)?, &program(b)?, &qs, g.limits())?;
            if let Some(r) = report {
                write(r, &(serde_json::to_string_pretty(&rep).expect("json") + "\n"))?;
            }
            if g.json {
                println!("{}", serde_json::to_string_pretty(&rep).expect("json"));
            } else {
                print!("{}", rep.text());
            }
            if rep.all_equal {
                Ok(())
            } else {
                Err(Failure::Check("answers differ".into()))
            }
        }
        Cmd::Pipeline { file, policy: pol, mode, queries, out_dir, threshold, analysis } => {
            let p = program(file)?;
            let policy = policy(pol)?;
            let qs = match queries {
                Some(q) => read_queries(&read(q)?),
                None => {
                    let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
                    let sibling = file.with_extension("queries");
                    if sibling.exists() {
                        read_queries(&read(&sibling)?)
                    } else {
                        corpus_entry(stem).map(|e| e.queries()).unwrap_or_default()
                    }
                }
            };
            let cfg = Config {
                mode: *mode,
                limits: g.limits(),
                analysis: analysis.options(),
                threshold: *threshold,
                seed: g.seed,
                ..Config::default()
            };
            let out = pipeline::run(&p, &policy, &qs, &cfg)?;
            fs::create_dir_all(out_dir).map_err(|e| Failure::Usage(format!("{}: {e}", out_dir.display())))?;
            write(&out_dir.join("graph.json"), &to_json(&out.graph))?;
            if let Some(c) = &out.classic {
                write(&out_dir.join("compiled_classic.lp"), &print_program(&c.program()))?;
            }
            if let Some(r) = &out.futamura {
                write(&out_dir.join("compiled_futamura.lp"), &print_program(&r.program()))?;
            }
            let report = json!({ "mode": mode, "checks": out.checks, "comparison": out.report });
            write(&out_dir.join("report.json"), &(serde_json::to_string_pretty(&report).expect("json") + "\n"))?;
            if g.json {
                println!("{}", serde_json::to_string_pretty(&report).expect("json"));
            } else {
                if let Some(r) = &out.report {
                    print!("{}", r.text());
                }
                for c in &out.checks {
                    println!(
                        "{} {}{}",
                        if c.ok { "pass" } else { "FAIL" },
                        c.name,
                        if c.detail.is_empty() { String::new() } else { format!(": {}", c.detail) }
                    );
                }
            }
            if out.ok() {
                Ok(())
            } else {
                Err(Failure::Check("pipeline checks failed".into()))
            }
        }
        Cmd::Selftest { filter } => {
            if let Some(f) = filter {
                if corpus_entry(f).is_none() {
                    let names: Vec<&str> = CORPUS.iter().map(|e| e.name).collect();
                    return Err(Failure::Usage(format!("no corpus entry '{f}' (have {})", names.join(", "))));
                }
            }
            let cfg = Config { limits: g.limits(), seed: g.seed, ..Config::default() };
            let rows = pipeline::selftest(filter.as_deref(), &cfg);
            if g.json {
                println!("{}", serde_json::to_string_pretty(&rows).expect("json"));
            } else {
                for r in &rows {
                    let cells: Vec<String> =
                        r.checks.iter().map(|c| format!("{}:{}", c.name, if c.ok { "pass" } else { "FAIL" })).collect();
                    println!("{:<10} {}", r.name, cells.join("  "));
                    for c in r.checks.iter().filter(|c| !c.ok && !c.detail.is_empty()) {
                        println!("           {}: {}", c.name, c.detail);
                    }
                }
            }
            if rows.iter().all(|r| r.ok()) {
                Ok(())
            } else {
                Err(Failure::Check("selftest failures".into()))
            }
        }
    }
}
