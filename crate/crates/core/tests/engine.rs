mod common;

use std::collections::BTreeSet;

use cctl_core::engine::{solve_ltr, Limits};
use cctl_core::parser::print_atom;
use cctl_core::term::{Atom, Clause, Program, Term, Var};
use common::{compile, int_list, ltr, rng};
use proptest::prelude::*;
use rand::Rng;

/// Lists over {1,2,3} of length at most `n`.
fn lists(n: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..n {
        layer = layer.iter().flat_map(|l: &Vec<i64>| (1..=3).map(move |x| [l.clone(), vec![x]].concat())).collect();
        out.extend(layer.iter().cloned());
    }
    out
}

#[test]
fn permsort_answers_do_not_depend_on_the_strategy() {
    let c = compile("permsort");
    for l in lists(5) {
        let q = format!("permsort({},Y)", int_list(&l));
        let naive = c.naive(&q);
        assert!(naive.1, "{q} did not terminate");
        assert_eq!(c.mi(&q), naive, "{q}");
    }
}

#[test]
fn inference_counts_are_deterministic() {
    let c = compile("queens");
    let (atoms, _) = cctl_core::parser::parse_query("queens(5,Q)").unwrap();
    let a = solve_ltr(&c.program, &atoms, Limits::default()).unwrap();
    let b = solve_ltr(&c.program, &atoms, Limits::default()).unwrap();
    assert_eq!(a.inferences, b.inferences);
    assert_eq!(a.answers, b.answers);
}

#[test]
fn inference_counts_grow_with_explored_answers() {
    let c = compile("permsort");
    let (atoms, _) = cctl_core::parser::parse_query("permsort([3,1,2,4],Y)").unwrap();
    let first = solve_ltr(&c.program, &atoms, Limits::default().first_answer()).unwrap();
    let all = solve_ltr(&c.program, &atoms, Limits::default()).unwrap();
    assert!(first.inferences <= all.inferences);
}

const PREDS: [(&str, usize); 3] = [("p", 1), ("q", 2), ("r", 1)];
const CONSTS: [&str; 3] = ["a", "b", "c"];

fn ground_atom(r: &mut impl Rng) -> Atom {
    let (p, n) = PREDS[r.gen_range(0..PREDS.len())];
    Atom::new(p, (0..n).map(|_| Term::atom(CONSTS[r.gen_range(0..3)])).collect())
}

fn ground_program(seed: u64) -> Program {
    let mut r = rng(seed);
    let n = r.gen_range(1..10);
    let mut clauses: Vec<Clause> = (0..n)
        .map(|_| {
            let body = (0..r.gen_range(0..3)).map(|_| ground_atom(&mut r)).collect();
            Clause::new(ground_atom(&mut r), body)
        })
        .collect();
    // every predicate defined, so calls never hit an unknown predicate
    clauses.extend(PREDS.iter().map(|(p, n)| Clause::new(Atom::new(p, vec![Term::atom("d"); *n]), vec![])));
    Program::new(clauses)
}

/// Least Herbrand model by naive bottom-up iteration.
fn least_model(p: &Program) -> BTreeSet<String> {
    let mut model = BTreeSet::new();
    loop {
        let before = model.len();
        for c in &p.clauses {
            if c.body.iter().all(|b| model.contains(&print_atom(b))) {
                model.insert(print_atom(&c.head));
            }
        }
        if model.len() == before {
            return model;
        }
    }
}

proptest! {
    #[test]
    fn answers_are_provable_bottom_up(seed in any::<u64>()) {
        let p = ground_program(seed);
        let model = least_model(&p);
        for (name, arity) in PREDS {
            let q = Atom::new(name, (0..arity as u32).map(|i| Term::Var(Var(i))).collect());
            let r = solve_ltr(&p, std::slice::from_ref(&q), Limits { max_inferences: 2_000, ..Limits::default() }).unwrap();
            let got: BTreeSet<String> = r.answers.iter().map(|s| print_atom(&s.apply_atom(&q))).collect();
            for a in &got {
                prop_assert!(model.contains(a), "{} not in the least model", a);
            }
            if r.exhausted {
                let want: BTreeSet<String> = model.iter().filter(|a| a.starts_with(name)).cloned().collect();
                prop_assert_eq!(got, want);
            }
        }
    }
}

#[test]
fn corpus_programs_terminate_where_expected() {
    for name in ["permsort", "queens", "spaced", "subsum"] {
        let c = compile(name);
        for q in c.entry.queries() {
            assert!(ltr(&c.program, &q, Limits::default()).1, "{name}: {q}");
        }
    }
}
