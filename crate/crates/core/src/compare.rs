//! Runs two programs on the same queries and compares answer multisets and
//! inference counts.

use std::collections::BTreeMap;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::engine::{canonical_answer, solve_ltr, Limits, RunResult};
use crate::error::Result;
use crate::parser::{parse_query, print_term};
use crate::term::{Atom, Program, Var};

/// Canonical answer text → multiplicity.
pub type Answers = BTreeMap<String, usize>;

pub fn answer_multiset(r: &RunResult, query: &[Atom]) -> Answers {
    let mut vars: Vec<Var> = Vec::new();
    for a in query {
        a.args.iter().for_each(|t| t.collect_vars(&mut vars));
    }
    let mut out = Answers::new();
    for s in &r.answers {
        let key = canonical_answer(&vars, s).iter().map(print_term).collect::<Vec<_>>().join(", ");
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryReport {
    pub query: String,
    pub equal: bool,
    pub answers: [usize; 2],
    pub inferences: [u64; 2],
    pub exhausted: [bool; 2],
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub queries: Vec<QueryReport>,
    pub total_inferences: [u64; 2],
    /// |b - a| / a over total inferences; zero when both are zero.
    pub deviation: f64,
    pub all_equal: bool,
}

impl Report {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for q in &self.queries {
            s += &format!(
                "{} {}  answers {}/{}  inferences {}/{}{}\n",
                if q.equal { "ok  " } else { "DIFF" },
                q.query,
                q.answers[0],
                q.answers[1],
                q.inferences[0],
                q.inferences[1],
                q.error.as_ref().map(|e| format!("  error: {e}")).unwrap_or_default()
            );
        }
        s += &format!(
            "total inferences {}/{}  deviation {:.2}%  {}\n",
            self.total_inferences[0],
            self.total_inferences[1],
            self.deviation * 100.0,
            if self.all_equal { "all answers equal" } else { "ANSWERS DIFFER" }
        );
        s
    }
}

pub fn deviation(a: u64, b: u64) -> f64 {
    if a == 0 {
        return if b == 0 { 0.0 } else { 1.0 };
    }
    (b as f64 - a as f64).abs() / a as f64
}

fn run_all(p: &Program, queries: &[Vec<Atom>], limits: Limits) -> Vec<Result<RunResult>> {
    queries.iter().map(|q| solve_ltr(p, q, limits)).collect()
}

/// Compares `a` and `b` query by query; the two batches run on separate threads.
pub fn compare_programs(a: &Program, b: &Program, queries: &[String], limits: Limits) -> Result<Report> {
    let parsed = queries.iter().map(|q| parse_query(q).map(|(atoms, _)| atoms)).collect::<Result<Vec<_>>>()?;
    let (ra, rb) = thread::scope(|s| {
        let ha = s.spawn(|| run_all(a, &parsed, limits));
        let rb = run_all(b, &parsed, limits);
        (ha.join().expect("query batch thread"), rb)
    });
    let mut out = Vec::new();
    let mut total = [0u64; 2];
    for ((text, q), (x, y)) in queries.iter().zip(&parsed).zip(ra.into_iter().zip(rb)) {
        let rep = match (x, y) {
            (Ok(x), Ok(y)) => {
                let (ax, ay) = (answer_multiset(&x, q), answer_multiset(&y, q));
                total[0] += x.inferences;
                total[1] += y.inferences;
                QueryReport {
                    query: text.clone(),
                    equal: ax == ay && x.exhausted == y.exhausted,
                    answers: [x.answers.len(), y.answers.len()],
                    inferences: [x.inferences, y.inferences],
                    exhausted: [x.exhausted, y.exhausted],
                    error: None,
                }
            }
            (x, y) => QueryReport {
                query: text.clone(),
                equal: false,
                answers: [0, 0],
                inferences: [0, 0],
                exhausted: [false, false],
                error: Some(
                    [x.err().map(|e| format!("a: {e}")), y.err().map(|e| format!("b: {e}"))]
                        .into_iter()
                        .flatten()
                        .collect::<Vec<_>>()
                        .join("; "),
                ),
            },
        };
        out.push(rep);
    }
    let all_equal = out.iter().all(|q| q.equal);
    Ok(Report { queries: out, total_inferences: total, deviation: deviation(total[0], total[1]), all_equal })
}

/// One goal per non-empty line; `%` starts a comment line.
pub fn read_queries(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'))
        .map(|l| l.trim_end_matches('.').to_string())
        .collect()
}
