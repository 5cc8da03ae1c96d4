#![allow(dead_code)]

use std::collections::BTreeMap;

use cctl_core::abs::{kind_of, Kind};
use cctl_core::analysis::{analyze, emit_tables, Options, StateGraph, StateTables};
use cctl_core::compare::{answer_multiset, Answers};
use cctl_core::engine::{solve, solve_ltr, Limits};
use cctl_core::metaint::{mi_run, GammaTrace};
use cctl_core::parser::parse_query;
use cctl_core::pd::Residual;
use cctl_core::pipeline::{corpus_entry, futamura, variant_for, CorpusEntry};
use cctl_core::policy::Policy;
use cctl_core::synth::{synthesize, Synthesized};
use cctl_core::term::{match_term, unify, Atom, Program, Subst, Term, Var};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Everything derived from one corpus entry.
pub struct Compiled {
    pub entry: &'static CorpusEntry,
    pub program: Program,
    pub policy: Policy,
    pub graph: StateGraph,
    pub tables: StateTables,
    pub classic: Synthesized,
    pub residual: Residual,
}

pub fn compile(name: &str) -> Compiled {
    let entry = corpus_entry(name).unwrap_or_else(|| panic!("no corpus entry {name}"));
    let program = entry.program().unwrap();
    let policy = entry.policy().unwrap();
    let graph = analyze(&program, &policy, &Options::default()).unwrap();
    let tables = emit_tables(&graph, &program);
    let classic = synthesize(&graph, &program).unwrap();
    let residual = futamura(&graph, &program, None, None).unwrap();
    Compiled { entry, program, policy, graph, tables, classic, residual }
}

/// Answer multiset and exhaustion flag.
pub type Outcome = (Answers, bool);

pub fn ltr(p: &Program, q: &str, limits: Limits) -> Outcome {
    let (atoms, _) = parse_query(q).unwrap();
    let r = solve_ltr(p, &atoms, limits).unwrap();
    (answer_multiset(&r, &atoms), r.exhausted)
}

impl Compiled {
    pub fn mi(&self, q: &str) -> Outcome {
        let (atoms, _) = parse_query(q).unwrap();
        let r = mi_run(&self.tables, &atoms, variant_for(&self.tables), Limits::default()).unwrap();
        (answer_multiset(&r, &atoms), r.exhausted)
    }

    pub fn classic(&self, q: &str) -> Outcome {
        ltr(&self.classic.program(), q, Limits::default())
    }

    pub fn futamura(&self, q: &str) -> Outcome {
        ltr(&self.residual.program(), q, Limits::default())
    }

    pub fn naive(&self, q: &str) -> Outcome {
        ltr(&self.program, q, Limits::default())
    }
}

pub fn int_list(xs: &[i64]) -> String {
    format!("[{}]", xs.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
}

/// First `n` primes by trial division.
pub fn first_primes(n: usize) -> Vec<i64> {
    let mut out: Vec<i64> = Vec::new();
    let mut k = 2;
    while out.len() < n {
        if out.iter().all(|p| k % p != 0) {
            out.push(k);
        }
        k += 1;
    }
    out
}

/// All arrangements of length `k` of distinct elements of `xs`.
pub fn arrangements(xs: &[i64], k: usize) -> Vec<Vec<i64>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let rest: Vec<i64> = xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, y)| *y).collect();
        for mut tail in arrangements(&rest, k - 1) {
            tail.insert(0, *x);
            out.push(tail);
        }
    }
    out
}

// ------------------------------------------------------------ concrete terms

/// Concrete variables used by samplers start here, clear of abstract numbering.
pub const CONCRETE_BASE: u32 = 1 << 20;

pub fn random_ground(rng: &mut ChaCha8Rng, depth: usize) -> Term {
    match rng.gen_range(0..if depth == 0 { 3 } else { 5 }) {
        0 => Term::Int(rng.gen_range(0..4)),
        1 => Term::atom(["a", "b", "[]"][rng.gen_range(0..3)]),
        2 => Term::atom("c"),
        3 => Term::cons(random_ground(rng, depth - 1), random_ground(rng, depth - 1)),
        _ => Term::app("f", vec![random_ground(rng, depth - 1)]),
    }
}

/// A concrete term that may contain fresh variables.
pub fn random_open(rng: &mut ChaCha8Rng, depth: usize, next_var: &mut u32) -> Term {
    if rng.gen_bool(0.4) {
        *next_var += 1;
        return Term::Var(Var(*next_var));
    }
    match rng.gen_range(0..if depth == 0 { 2 } else { 4 }) {
        0 => Term::Int(rng.gen_range(0..4)),
        1 => Term::atom("a"),
        2 => Term::cons(random_open(rng, depth - 1, next_var), random_open(rng, depth - 1, next_var)),
        _ => Term::app("f", vec![random_open(rng, depth - 1, next_var)]),
    }
}

/// A concretization of the abstract variables of `ts`: ground terms for g,
/// ground or open terms for a.
pub fn sample_gamma(rng: &mut ChaCha8Rng, ts: &[Term]) -> Subst {
    let mut vars = Vec::new();
    ts.iter().for_each(|t| t.collect_vars(&mut vars));
    let mut next = CONCRETE_BASE;
    Subst::from_pairs(vars.into_iter().map(|v| {
        let t = match kind_of(v) {
            Kind::Ground => random_ground(rng, 2),
            Kind::Any => random_open(rng, 2, &mut next),
        };
        (v, t)
    }))
}

/// Runs `q` under the table-driven strategy and returns the per-step membership record.
pub fn observe(c: &Compiled, q: &str, limits: Limits) -> Vec<(u32, bool)> {
    let (atoms, _) = parse_query(q).unwrap();
    let obs = GammaTrace::new(&c.graph, &c.tables, variant_for(&c.tables));
    solve(&c.tables.mi_clause, &atoms, &obs, limits).unwrap();
    obs.seen.into_inner()
}

/// A random entry query for a corpus program, drawn from sensible argument ranges.
pub fn random_query(name: &str, rng: &mut ChaCha8Rng) -> String {
    match name {
        "permsort" => {
            let n = rng.gen_range(0..=5);
            let xs: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
            format!("permsort({},Y)", int_list(&xs))
        }
        "primes" => format!("primes({},P)", rng.gen_range(0..=6)),
        "queens" => format!("queens({},Q)", rng.gen_range(1..=5)),
        "spaced" => {
            let n = rng.gen_range(0..=4);
            let xs: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=7)).collect();
            format!("spaced({},Y)", int_list(&xs))
        }
        "subsum" => {
            let n = rng.gen_range(0..=5);
            let xs: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=6)).collect();
            format!("subsum({},{},S)", int_list(&xs), rng.gen_range(0..=10))
        }
        other => panic!("no query sampler for {other}"),
    }
}

/// Ground substitutions of `vars` drawn from `candidates`.
pub fn ground_substitutions(vars: &[Var], candidates: &[Term]) -> Vec<Subst> {
    let mut out = vec![Subst::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|s| {
                candidates.iter().map(move |t| {
                    let mut s2 = s.clone();
                    s2.bindings.insert(*v, t.clone());
                    s2
                })
            })
            .collect();
    }
    out
}

/// Ground terms over {a, b, f/2} of depth at most `d`.
pub fn ground_terms(d: usize) -> Vec<Term> {
    let mut out = vec![Term::atom("a"), Term::atom("b")];
    for _ in 0..d {
        let prev = out.clone();
        for x in &prev {
            for y in &prev {
                let t = Term::app("f", vec![x.clone(), y.clone()]);
                if !out.contains(&t) {
                    out.push(t);
                }
            }
        }
    }
    out
}

/// A term over {a, b, f/2} and the given variables, depth at most `d`.
pub fn random_small_term(rng: &mut ChaCha8Rng, d: usize, vars: &[Var]) -> Term {
    match rng.gen_range(0..if d == 0 { 3 } else { 4 }) {
        0 => Term::Var(vars[rng.gen_range(0..vars.len())]),
        1 => Term::atom("a"),
        2 => Term::atom("b"),
        _ => Term::app("f", vec![random_small_term(rng, d - 1, vars), random_small_term(rng, d - 1, vars)]),
    }
}

pub fn atoms_of(q: &str) -> Vec<Atom> {
    parse_query(q).unwrap().0
}

pub fn count_by_state(seen: &[(u32, bool)]) -> BTreeMap<u32, usize> {
    let mut m = BTreeMap::new();
    for (s, _) in seen {
        *m.entry(*s).or_insert(0) += 1;
    }
    m
}

/// An abstract term over a few constants, `f/1`, lists, `a1..a3` and `g1..g3`.
pub fn random_abstract(rng: &mut ChaCha8Rng, depth: usize) -> Term {
    match rng.gen_range(0..if depth == 0 { 4 } else { 6 }) {
        0 => cctl_core::abs::a(rng.gen_range(1..=3)),
        1 => cctl_core::abs::g(rng.gen_range(1..=3)),
        2 => Term::Int(rng.gen_range(0..3)),
        3 => Term::atom("[]"),
        4 => Term::cons(random_abstract(rng, depth - 1), random_abstract(rng, depth - 1)),
        _ => Term::app("f", vec![random_abstract(rng, depth - 1)]),
    }
}

/// Renames abstract variables by a random kind-preserving permutation of indices.
pub fn shuffle_abstract(rng: &mut ChaCha8Rng, t: &Term) -> Term {
    use rand::seq::SliceRandom;
    let mut perm: Vec<u32> = (1..=6).collect();
    perm.shuffle(rng);
    t.map_vars(&mut |v| {
        let k = kind_of(v);
        Term::Var(cctl_core::abs::avar(k, perm[cctl_core::abs::index_of(v) as usize - 1]))
    })
}

/// A concrete member of γ(conj): each multi expanded to 1..=`max_len`
/// instances, then every abstract variable concretized.
pub fn concretize_conj(rng: &mut ChaCha8Rng, conj: &[cctl_core::abs::Conjunct], max_len: usize) -> Option<Vec<Term>> {
    use cctl_core::abs::Conjunct;
    let mut cur = conj.to_vec();
    while let Some(pos) = cur.iter().position(|x| matches!(x, Conjunct::Multi(_))) {
        cur = cctl_core::multi::expand_at(&cur, pos, rng.gen_range(1..=max_len))?;
    }
    let atoms: Vec<Term> = cur.iter().map(|x| x.as_atom().expect("expanded").to_term()).collect();
    let s = sample_gamma(rng, &atoms);
    Some(atoms.iter().map(|t| s.apply(t)).collect())
}

pub const VARS: [Var; 3] = [Var(0), Var(1), Var(2)];

/// Checks the unifier returned for `(x, y)` against every ground unifier over
/// depth-1 terms; returns a description of the first discrepancy.
pub fn check_mgu(x: &Term, y: &Term, candidates: &[Term]) -> Result<(), String> {
    let mgu = unify(x, y, true);
    let ground: Vec<Subst> =
        ground_substitutions(&VARS, candidates).into_iter().filter(|u| u.apply(x) == u.apply(y)).collect();
    let Some(m) = mgu else {
        return if ground.is_empty() { Ok(()) } else { Err("unifiable terms reported as not unifiable".into()) };
    };
    if m.apply(x) != m.apply(y) {
        return Err("result does not unify".into());
    }
    if !m.is_idempotent() {
        return Err("result not idempotent".into());
    }
    let tuple = Term::app("t", VARS.iter().map(|v| Term::Var(*v)).collect());
    let general = m.apply(&tuple);
    for u in &ground {
        let mut r = Subst::new();
        if !match_term(&general, &u.apply(&tuple), &mut r) {
            return Err(format!("ground unifier {u:?} does not factor through the result"));
        }
    }
    let grounded = Subst::from_pairs(general.vars().into_iter().map(|v| (v, Term::atom("a"))));
    let witness = grounded.apply(&general);
    let u = Subst::from_pairs(VARS.iter().copied().zip(witness.args().iter().cloned()));
    if u.apply(x) != u.apply(y) {
        return Err("ground instance of the result is not a unifier".into());
    }
    if witness.args().iter().all(|t| t.depth() <= 1) && ground.iter().all(|g| g.apply(&tuple) != witness) {
        return Err("instance of the result missing from the brute-force set".into());
    }
    Ok(())
}
