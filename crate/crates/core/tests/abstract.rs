mod common;

use cctl_core::abs::{
    abs_ground, equivalent_atoms, gamma_member, kind_of, resolve_with_clause, widen, AbsGen, Conjunct, Kind,
};
use cctl_core::multi::gamma_member_goal;
use cctl_core::term::{rename_apart, unify_into, Atom, Subst, Term, VarGen};
use common::{compile, random_abstract, rng, sample_gamma, shuffle_abstract, CONCRETE_BASE};
use proptest::prelude::*;
use rand::Rng;

fn random_atom(r: &mut rand_chacha::ChaCha8Rng) -> Atom {
    Atom::new("p", (0..r.gen_range(1..4)).map(|_| random_abstract(r, 2)).collect())
}

proptest! {
    #[test]
    fn approx_is_an_equivalence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_atom(&mut r);
        let y = Atom::from_term(&shuffle_abstract(&mut r, &x.to_term())).unwrap();
        let z = Atom::from_term(&shuffle_abstract(&mut r, &y.to_term())).unwrap();
        prop_assert!(equivalent_atoms(&x, &x));
        prop_assert!(equivalent_atoms(&x, &y) && equivalent_atoms(&y, &x));
        prop_assert!(equivalent_atoms(&y, &z) && equivalent_atoms(&x, &z));
        let w = random_atom(&mut r);
        prop_assert_eq!(equivalent_atoms(&x, &w), equivalent_atoms(&w, &x));
    }

    #[test]
    fn widening_is_gamma_monotone_and_depth_bounded(seed in any::<u64>(), k in 0usize..3) {
        let mut r = rng(seed);
        let t = random_abstract(&mut r, 4);
        let w = widen(&t, k, &mut AbsGen::for_terms(std::slice::from_ref(&t)));
        prop_assert!(w.depth() <= k);
        for _ in 0..5 {
            let c = sample_gamma(&mut r, std::slice::from_ref(&t)).apply(&t);
            prop_assert!(gamma_member(&c, &w), "{:?} in γ({:?}) but not in γ({:?})", c, t, w);
        }
    }
}

/// Atoms of every corpus state, paired with the program they belong to.
fn state_atoms() -> Vec<(common::Compiled, Vec<Atom>)> {
    ["permsort", "primes", "queens", "spaced", "subsum"]
        .into_iter()
        .map(|n| {
            let c = compile(n);
            let atoms = c
                .graph
                .states
                .iter()
                .flat_map(|s| s.iter().filter_map(Conjunct::as_atom).cloned().collect::<Vec<_>>())
                .collect();
            (c, atoms)
        })
        .collect()
}

#[test]
fn abstract_resolution_is_sound_on_sampled_instances() {
    let mut r = rng(11);
    let mut checked = 0;
    for (c, atoms) in state_atoms() {
        for a in &atoms {
            for clause in c.program.clauses_for(&a.key()) {
                let Some((conj, _)) = resolve_with_clause(&[Conjunct::Atom(a.clone())], 0, clause) else {
                    continue;
                };
                for _ in 0..4 {
                    let concrete = sample_gamma(&mut r, &a.args).apply_atom(a);
                    let fresh = rename_apart(clause, &mut VarGen::starting_at(2 * CONCRETE_BASE));
                    let mut s = Subst::new();
                    if !unify_into(&mut s, &concrete.to_term(), &fresh.head.to_term(), true) {
                        continue;
                    }
                    let resolvent: Vec<Term> = fresh.body.iter().map(|b| s.apply(&b.to_term())).collect();
                    assert!(gamma_member_goal(&resolvent, &conj), "{concrete:?} with {clause:?}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked >= 100, "only {checked} resolvents checked");
}

#[test]
fn resolution_preserves_groundness() {
    for (c, atoms) in state_atoms() {
        for a in &atoms {
            for clause in c.program.clauses_for(&a.key()) {
                if let Some((conj, s)) = resolve_with_clause(&[Conjunct::Atom(a.clone())], 0, clause) {
                    for (v, t) in &s.bindings {
                        assert!(kind_of(*v) == Kind::Any || abs_ground(t), "{v:?} -> {t:?}");
                    }
                    assert!(!conj.is_empty() || clause.body.is_empty());
                }
            }
        }
    }
}
