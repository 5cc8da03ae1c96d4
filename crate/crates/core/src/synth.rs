//! Classic resultant synthesis: one predicate per analysis state, one
//! clause per transition.

use std::collections::{BTreeMap, BTreeSet};

use crate::abs::{kind_of, Conjunct, Kind};
use crate::analysis::{StateGraph, Target};
use crate::builtins::{is_builtin, is_call};
use crate::engine::Cause;
use crate::error::{Error, Result};
use crate::multi::{Range, BUILDING_BLOCK, CMULTI};
use crate::parser::print_term;
use crate::term::{rename_apart, unify_into, Atom, Clause, PredKey, Program, Subst, Term, Var, VarGen};

/// Variables standing for the block list of a multi conjunct start here.
const MULTI_BASE: u32 = 1 << 30;
pub const APPEND: &str = "multi_append";

#[derive(Clone, Debug)]
pub struct Synthesized {
    pub entry: Clause,
    pub clauses: Program,
    /// Subject clauses of fully evaluated user predicates.
    pub support: Program,
    pub names: BTreeMap<u32, String>,
}

impl Synthesized {
    pub fn program(&self) -> Program {
        let mut p = Program::default();
        p.push(self.entry.clone());
        for c in self.clauses.clauses.iter().chain(&self.support.clauses) {
            p.push(c.clone());
        }
        p
    }
}

pub fn state_name(id: u32) -> String {
    format!("state_{id}")
}

/// Goal template of a state: atoms as they stand, multis as `cmulti(M)`.
fn template(c: &[Conjunct]) -> Vec<Term> {
    c.iter()
        .enumerate()
        .map(|(i, x)| match x {
            Conjunct::Atom(a) => a.to_term(),
            Conjunct::Multi(_) => Term::app(CMULTI, vec![Term::Var(Var(MULTI_BASE + i as u32))]),
        })
        .collect()
}

/// Ground variables first, then the rest, each in first-occurrence order.
fn state_args(tmpl: &[Term]) -> Vec<Var> {
    let mut vs = Vec::new();
    tmpl.iter().for_each(|t| t.collect_vars(&mut vs));
    let ground = |v: &Var| v.0 < MULTI_BASE && kind_of(*v) == Kind::Ground;
    let (mut g, rest): (Vec<Var>, Vec<Var>) = vs.into_iter().partition(ground);
    g.extend(rest);
    g
}

/// The goal a call of state `c`'s predicate with `args` stands for; `None`
/// on an arity mismatch.
pub fn state_goal(c: &[Conjunct], args: &[Term]) -> Option<Vec<Term>> {
    let tmpl = template(c);
    let vars = state_args(&tmpl);
    if vars.len() != args.len() {
        return None;
    }
    let map: BTreeMap<Var, Term> = vars.into_iter().zip(args.iter().cloned()).collect();
    Some(tmpl.iter().map(|t| t.map_vars(&mut |v| map.get(&v).cloned().unwrap_or(Term::Var(v)))).collect())
}

fn skeleton(pattern: &[Atom], gen: &mut VarGen) -> Vec<Term> {
    pattern
        .iter()
        .map(|a| Term::app_sym(a.pred.clone(), a.args.iter().map(|_| Term::Var(gen.fresh())).collect()))
        .collect()
}

fn block(goals: Vec<Term>) -> Term {
    Term::app(BUILDING_BLOCK, vec![Term::list(goals)])
}

fn cmulti_arg(t: &Term) -> Option<&Term> {
    match t {
        Term::App(f, xs) if &**f == CMULTI && xs.len() == 1 => Some(&xs[0]),
        _ => None,
    }
}

/// Folds ranges of `goal` into one cmulti; splicing an open block list
/// that is not last adds a `multi_append/3` call.
fn fold_group(goal: &[Term], group: &[Range], gen: &mut VarGen, pre: &mut Vec<Term>) -> Result<Vec<Term>> {
    let bad = || Error::Synthesis("grouping does not fit its state".into());
    let first = group.first().ok_or_else(bad)?.start();
    let last = group.last().ok_or_else(bad)?.end();
    if last > goal.len() {
        return Err(bad());
    }
    let mut acc = Term::nil();
    for r in group.iter().rev() {
        acc = match r {
            Range::Block(s, e) => Term::cons(block(goal[*s..*e].to_vec()), acc),
            Range::Existing(p) => {
                let blocks = cmulti_arg(&goal[*p]).ok_or_else(bad)?;
                match blocks.as_list() {
                    Some(items) => Term::list_with_tail(items, acc),
                    None if acc == Term::nil() => blocks.clone(),
                    None => {
                        let out = Term::Var(gen.fresh());
                        pre.push(Term::app(APPEND, vec![blocks.clone(), acc, out.clone()]));
                        out
                    }
                }
            }
        };
    }
    let mut out = goal[..first].to_vec();
    out.push(Term::app(CMULTI, vec![acc]));
    out.extend_from_slice(&goal[last..]);
    Ok(out)
}

struct Synth<'g> {
    g: &'g StateGraph,
    p: &'g Program,
    names: BTreeMap<u32, String>,
}

impl Synth<'_> {
    fn call(&self, id: u32, args: Vec<Term>) -> Term {
        Term::app(&self.names[&id], args)
    }

    fn tmpl(&self, id: u32) -> Result<Vec<Term>> {
        Ok(template(self.g.state(id).ok_or_else(|| Error::Synthesis(format!("unknown state {id}")))?))
    }

    /// `state_S(σ(args)) :- σ(pre), state_T(σ(target args))` where σ
    /// unifies the target's template with the resultant goal.
    fn emit(
        &self,
        from: u32,
        to: Target,
        mut s: Subst,
        resultant: Vec<Term>,
        pre: Vec<Term>,
        gen: &mut VarGen,
    ) -> Result<Option<Clause>> {
        let head_vars = state_args(&self.tmpl(from)?);
        let mut body = pre;
        match to {
            Target::Empty => {
                if !resultant.is_empty() {
                    return Err(Error::Synthesis(format!("state {from} reaches the empty goal with goals left")));
                }
            }
            Target::State(t) => {
                let offset = gen.reserve(MULTI_BASE + 1_000_000);
                let target: Vec<Term> = self.tmpl(t)?.iter().map(|x| x.shift(offset)).collect();
                if target.len() != resultant.len()
                    || !unify_into(&mut s, &Term::list(target.clone()), &Term::list(resultant.clone()), true)
                {
                    return Err(Error::Synthesis(format!(
                        "state {t} does not cover the resultant {} of state {from}",
                        print_term(&Term::list(resultant))
                    )));
                }
                let targs = state_args(&self.tmpl(t)?).into_iter().map(|v| Term::Var(Var(v.0 + offset))).collect();
                body.push(self.call(t, targs));
            }
        }
        let head = Atom::new(&self.names[&from], head_vars.iter().map(|v| s.apply(&Term::Var(*v))).collect());
        let body = body.iter().map(|b| Atom::from_term(&s.apply(b)).expect("callable")).collect();
        Ok(Some(Clause::new(head, body).normalized()))
    }

    fn state_clauses(&self, id: u32, out: &mut Program) -> Result<()> {
        let tmpl = self.tmpl(id)?;
        let top = tmpl.iter().filter_map(Term::max_var).max().map_or(0, |m| m + 1);
        if let Some(spec) = self.g.grouping(id) {
            let mut gen = VarGen::starting_at(top.max(MULTI_BASE + 1_000));
            let mut pre = Vec::new();
            let mut goal = tmpl.clone();
            for grp in &spec.groups {
                goal = fold_group(&goal, grp, &mut gen, &mut pre)?;
            }
            if let Some(c) = self.emit(id, Target::State(spec.to), Subst::new(), goal, pre, &mut gen)? {
                out.push(c);
            }
            return Ok(());
        }
        let Some(sel) = self.g.selections.get(&id) else { return Ok(()) };
        let i = sel.index;
        for t in self.g.transitions_from(id) {
            let mut gen = VarGen::starting_at(top.max(MULTI_BASE + 1_000));
            let mut s = Subst::new();
            let (resultant, pre) = match &t.cause {
                Cause::Clause(cid) => {
                    let c =
                        self.p.clause_by_id(*cid).ok_or_else(|| Error::Synthesis(format!("unknown clause {cid}")))?;
                    let c = rename_apart(c, &mut gen);
                    if !unify_into(&mut s, &tmpl[i], &c.head.to_term(), true) {
                        return Err(Error::Synthesis(format!("clause {cid} does not resolve with state {id}")));
                    }
                    let mut r = tmpl[..i].to_vec();
                    r.extend(c.body.iter().map(Atom::to_term));
                    r.extend_from_slice(&tmpl[i + 1..]);
                    (r, vec![])
                }
                Cause::FullEval(_) => {
                    let mut r = tmpl.clone();
                    let a = r.remove(i);
                    (r, vec![a])
                }
                Cause::One | Cause::Many => {
                    let Some(Conjunct::Multi(m)) = self.g.state(id).and_then(|c| c.get(i)) else {
                        return Err(Error::Synthesis(format!("state {id} splits a non-multi")));
                    };
                    let blocks = cmulti_arg(&tmpl[i]).expect("multi template").clone();
                    let p1 = skeleton(&m.pattern, &mut gen);
                    let mut r = tmpl[..i].to_vec();
                    r.extend(p1.iter().cloned());
                    let list = if t.cause == Cause::One {
                        Term::list(vec![block(p1)])
                    } else {
                        let p2 = skeleton(&m.pattern, &mut gen);
                        let rest = Term::Var(gen.fresh());
                        r.push(Term::app(CMULTI, vec![Term::cons(block(p2.clone()), rest.clone())]));
                        Term::cons(block(p1), Term::cons(block(p2), rest))
                    };
                    unify_into(&mut s, &blocks, &list, true);
                    r.extend_from_slice(&tmpl[i + 1..]);
                    (r, vec![])
                }
                Cause::Grouping => continue,
            };
            if let Some(c) = self.emit(id, t.to, s, resultant, pre, &mut gen)? {
                out.push(c);
            }
        }
        Ok(())
    }
}

/// Subject clauses of `roots` and everything they call.
fn support(p: &Program, roots: BTreeSet<PredKey>) -> Program {
    let mut need = roots;
    let mut work: Vec<PredKey> = need.iter().cloned().collect();
    while let Some(k) = work.pop() {
        for c in p.clauses_for(&k) {
            for b in &c.body {
                let mut keys = vec![b.key()];
                if is_call(&b.pred, b.args.len()) {
                    match b.args[0].functor() {
                        Some((n, a)) => keys.push(PredKey::new(n, a)),
                        None => keys.extend(p.predicates()),
                    }
                }
                for k2 in keys {
                    if p.defines(&k2) && need.insert(k2.clone()) {
                        work.push(k2);
                    }
                }
            }
        }
    }
    Program::new(p.clauses.iter().filter(|c| need.contains(&c.head.key())).cloned().collect())
}

const APPEND_CLAUSES: &str = "multi_append([],L,L).\nmulti_append([H|T],L,[H|R]) :- multi_append(T,L,R).\n";

pub fn synthesize(g: &StateGraph, p: &Program) -> Result<Synthesized> {
    g.check_closed()?;
    let names: BTreeMap<u32, String> = (1..=g.states.len() as u32).map(|i| (i, state_name(i))).collect();
    for n in names.values().map(String::as_str).chain([APPEND]) {
        if p.predicates().iter().any(|k| &*k.name == n) {
            return Err(Error::Synthesis(format!("subject already defines {n}")));
        }
    }
    let sy = Synth { g, p, names };
    let mut clauses = Program::default();
    for id in 1..=g.states.len() as u32 {
        sy.state_clauses(id, &mut clauses)?;
    }
    if clauses.clauses.iter().any(|c| c.body.iter().any(|b| &*b.pred == APPEND)) {
        for c in crate::parser::parse_program(APPEND_CLAUSES)?.clauses {
            clauses.push(c);
        }
    }
    let mut roots = BTreeSet::new();
    for c in &clauses.clauses {
        for b in &c.body {
            let k = b.key();
            if !is_builtin(&k.name, k.arity) && p.defines(&k) {
                roots.insert(k);
            }
        }
    }
    let support = support(p, roots);
    let entry = entry_clause(&sy)?;
    Ok(Synthesized { entry, clauses, support, names: sy.names })
}

/// `p(X1..Xn) :- state_E(...)` for a single-atom entry state.
fn entry_clause(sy: &Synth) -> Result<Clause> {
    let tmpl = sy.tmpl(sy.g.entry)?;
    let [entry] = tmpl.as_slice() else {
        return Err(Error::Synthesis("entry state must be a single atom".into()));
    };
    let (name, arity) = entry.functor().ok_or_else(|| Error::Synthesis("entry is not an atom".into()))?;
    let top = entry.max_var().map_or(0, |m| m + 1);
    let head = Atom::new(name, (top..top + arity as u32).map(Term::var).collect());
    let mut s = Subst::new();
    if !unify_into(&mut s, entry, &head.to_term(), true) {
        return Err(Error::Synthesis("entry pattern does not unify with its skeleton".into()));
    }
    let call = sy.call(sy.g.entry, state_args(&tmpl).iter().map(|v| s.apply(&Term::Var(*v))).collect());
    Ok(Clause::new(s.apply_atom(&head), vec![Atom::from_term(&call).expect("callable")]).normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{analyze, Options};
    use crate::compare::answer_multiset;
    use crate::engine::{solve_ltr, Limits};
    use crate::parser::{parse_query, print_clause};
    use crate::pipeline::corpus_entry;

    fn synth(name: &str) -> (StateGraph, Program, Synthesized) {
        let e = corpus_entry(name).unwrap();
        let p = e.program().unwrap();
        let g = analyze(&p, &e.policy().unwrap(), &Options::default()).unwrap();
        let s = synthesize(&g, &p).unwrap();
        (g, p, s)
    }

    fn answers(p: &Program, q: &str) -> Vec<String> {
        let (atoms, _) = parse_query(q).unwrap();
        let r = solve_ltr(p, &atoms, Limits::default()).unwrap();
        assert!(r.exhausted);
        answer_multiset(&r, &atoms).into_keys().collect()
    }

    #[test]
    fn one_predicate_per_state_and_a_delegating_entry() {
        let (g, _, s) = synth("permsort");
        assert_eq!(print_clause(&s.entry), "permsort(_G0,_G1) :- state_1(_G0,_G1).");
        assert_eq!(s.names.len(), g.states.len());
        let defined: BTreeSet<String> = s.clauses.predicates().iter().map(|k| k.name.to_string()).collect();
        for n in s.names.values() {
            assert!(defined.contains(n), "{n} undefined");
        }
        assert!(s.support.is_empty());
        assert!(!defined.contains(APPEND));
    }

    #[test]
    fn permsort_program_sorts() {
        let (_, _, s) = synth("permsort");
        assert_eq!(answers(&s.program(), "permsort([3,1,2],Y)"), ["[1,2,3]"]);
        assert!(answers(&s.program(), "permsort([2,1],[2,1])").is_empty());
    }

    #[test]
    fn primes_threads_block_lists_through_states() {
        let (_, _, s) = synth("primes");
        let text = crate::parser::print_program(&s.clauses);
        assert!(text.contains("building_block([filter("));
        assert!(s.clauses.defines(&PredKey::new(APPEND, 3)));
        assert_eq!(answers(&s.program(), "primes(5,P)"), ["[2,3,5,7,11]"]);
    }

    #[test]
    fn user_fulleval_predicates_come_with_support_clauses() {
        let (_, p, s) = synth("queens");
        let support: BTreeSet<String> = s.support.predicates().iter().map(|k| k.to_string()).collect();
        for k in ["range/3", "noattack/3", "place/3", "diagonal_free/3", "differ/2"] {
            assert!(support.contains(k), "{k} missing from {support:?}");
        }
        assert!(!support.contains("perm/2"));
        assert!(s.support.clauses.iter().all(|c| p.clauses.contains(c)));
        assert_eq!(answers(&s.program(), "queens(4,Q)").len(), 2);
    }

    #[test]
    fn state_names_must_not_clash_with_the_subject() {
        let p = crate::parser::parse_program("p(X) :- state_1(X).\nstate_1(a).\n").unwrap();
        let policy = crate::policy::Policy::parse("entry: p(a1).\n").unwrap();
        let g = analyze(&p, &policy, &Options::default()).unwrap();
        assert!(matches!(synthesize(&g, &p), Err(Error::Synthesis(_))));
    }
}
