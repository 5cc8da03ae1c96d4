mod common;

use cctl_core::abs::{apply_conj, avar, conj_vars, kind_of, strict_instance};
use cctl_core::policy::atom;
use cctl_core::term::{Subst, Term};
use common::{compile, rng};
use rand::seq::SliceRandom;

const CORPUS: [&str; 5] = ["permsort", "primes", "queens", "spaced", "subsum"];

#[test]
fn derived_orders_are_strict_and_respect_instantiation() {
    for name in CORPUS {
        let c = compile(name);
        let order = c.policy.derive_order(&c.graph.atoms()).unwrap();
        let u = &order.universe;
        for x in u {
            assert!(!order.less(x, x), "{name}: irreflexive");
            for y in u {
                if strict_instance(x, y) {
                    assert!(!order.less(y, x), "{name}: instance ordered after its generalization");
                }
                if !order.less(x, y) {
                    continue;
                }
                for z in u {
                    if order.less(y, z) {
                        assert!(order.less(x, z), "{name}: transitivity");
                    }
                }
            }
        }
    }
}

#[test]
fn permsort_orders_perm_before_ord() {
    let c = compile("permsort");
    let order = c.policy.derive_order(&c.graph.atoms()).unwrap();
    assert!(order.less(&atom("perm(g1,a1)"), &atom("ord([g1|a1])")));
    assert!(order.less(&atom("ord([g1|a1])"), &atom("ord(a1)")));
    assert!(order.less(&atom("perm(g1,a1)"), &atom("ord(a1)")));
    assert!(!order.less(&atom("ord(a1)"), &atom("perm(g1,a1)")));
}

#[test]
fn selection_is_invariant_under_renaming() {
    let mut r = rng(1);
    for name in CORPUS {
        let c = compile(name);
        for conj in &c.graph.states {
            let vars = conj_vars(conj);
            let mut targets: Vec<u32> = (0..vars.len() as u32).map(|i| 50 + i).collect();
            targets.shuffle(&mut r);
            let s = Subst::from_pairs(vars.iter().zip(&targets).map(|(v, t)| (*v, Term::Var(avar(kind_of(*v), *t)))));
            let renamed = apply_conj(conj, &s);
            let a = c.policy.select(conj).unwrap();
            let b = c.policy.select(&renamed).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }
}
