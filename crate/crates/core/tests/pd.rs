mod common;

use cctl_core::multi::block_goals;
use cctl_core::parser::print_program;
use cctl_core::pd::{check_closedness, generalize_call, Filters, EXTENDED_FILTERS, SIMPLE_FILTERS};
use cctl_core::pipeline::futamura;
use cctl_core::term::{match_term, Atom, PredKey, Subst, Term, VarGen};
use common::{compile, random_open, random_query, rng, CONCRETE_BASE};
use proptest::prelude::*;
use rand::Rng;

const CORPUS: [&str; 5] = ["permsort", "primes", "queens", "spaced", "subsum"];

#[test]
fn residuals_preserve_answers_and_failure() {
    let mut r = rng(23);
    for name in CORPUS {
        let c = compile(name);
        assert!(check_closedness(&c.residual).is_empty(), "{name}");
        let mut queries = c.entry.queries();
        queries.extend((0..10).map(|_| random_query(name, &mut r)));
        for q in &queries {
            assert_eq!(c.futamura(q), c.mi(q), "{name}: {q}");
        }
        for q in c.entry.failing() {
            let (answers, exhausted) = c.futamura(&q);
            assert!(answers.is_empty() && exhausted, "{name}: {q}");
        }
    }
}

#[test]
fn specialization_is_deterministic() {
    for name in CORPUS {
        let c = compile(name);
        let again = futamura(&c.graph, &c.program, None, None).unwrap();
        assert_eq!(print_program(&c.residual.program()), print_program(&again.program()), "{name}");
    }
}

/// A cmulti goal element with `n` blocks of one atom each.
fn cmulti(r: &mut rand_chacha::ChaCha8Rng, n: usize, next: &mut u32) -> Term {
    let blocks = (0..n)
        .map(|_| {
            Term::app("building_block", vec![Term::list(vec![Term::app("filter", vec![random_open(r, 1, next)])])])
        })
        .collect();
    Term::app("cmulti", vec![Term::list(blocks)])
}

fn random_mi_call(r: &mut rand_chacha::ChaCha8Rng) -> Atom {
    let mut next = CONCRETE_BASE;
    let goals = (0..r.gen_range(0..4))
        .map(|_| match r.gen_range(0..3) {
            0 => {
                let n = r.gen_range(1..4);
                cmulti(r, n, &mut next)
            }
            1 => Term::app("p", vec![random_open(r, 2, &mut next)]),
            _ => Term::app("q", vec![random_open(r, 1, &mut next), random_open(r, 1, &mut next)]),
        })
        .collect();
    Atom::new("mi", vec![Term::list(goals), Term::Int(r.gen_range(1..20))])
}

proptest! {
    #[test]
    fn generalization_is_extensive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let call = random_mi_call(&mut r);
        for filters in [SIMPLE_FILTERS, EXTENDED_FILTERS] {
            let f = Filters::parse(filters).unwrap();
            let types = f.get(&PredKey::new("mi", 2)).unwrap();
            let g = generalize_call(&call, types, &mut VarGen::starting_at(4 * CONCRETE_BASE)).unwrap();
            let mut m = Subst::new();
            prop_assert!(match_term(&g.to_term(), &call.to_term(), &mut m), "{:?} not an instance of {:?}", call, g);
            prop_assert_eq!(&g.args[1], &call.args[1]);
        }
    }
}

#[test]
fn extended_memo_calls_keep_the_block_skeleton() {
    let c = compile("primes");
    let mut with_blocks = 0;
    for m in &c.residual.memo {
        if &*m.call.pred != "mi" {
            continue;
        }
        // a block list that is open at specialization time generalizes to cmulti(_)
        for goal in m.call.args[0].as_list().expect("closed goal list") {
            if goal.functor() != Some(("cmulti", 1)) {
                continue;
            }
            let list = &goal.args()[0];
            if list.is_var() {
                continue;
            }
            let first = list.functor().filter(|f| f.0 == ".").map(|_| &list.args()[0]).expect("block list");
            assert!(block_goals(first).is_some_and(|g| !g.is_empty()), "{}", m.name);
            with_blocks += 1;
        }
    }
    assert!(with_blocks > 0);
}
