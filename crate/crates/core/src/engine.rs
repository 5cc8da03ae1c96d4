//! Depth-first SLD resolution with a pluggable selection control.
//!
//! Bindings live in a trailed store; goals are vectors of terms that refer
//! to store variables. Backtracking restores the trail and truncates the
//! variable space, so no host recursion is needed for deep derivations.

use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::builtins;
use crate::error::{Error, Result};
use crate::term::{Atom, Clause, Program, Subst, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_inferences: u64,
    pub max_depth: usize,
    pub max_answers: Option<usize>,
    pub occurs_check: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_inferences: 10_000_000, max_depth: 100_000, max_answers: None, occurs_check: true }
    }
}

impl Limits {
    pub fn first_answer(self) -> Limits {
        Limits { max_answers: Some(1), ..self }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    /// One substitution per answer, over the query's variables.
    pub answers: Vec<Subst>,
    pub inferences: u64,
    /// False when a limit cut the search short.
    pub exhausted: bool,
}

/// Why the control moved from one state to the next.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cause {
    Clause(u32),
    FullEval(String),
    One,
    Many,
    Grouping,
}

impl std::fmt::Display for Cause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cause::Clause(id) => write!(f, "{id}"),
            Cause::FullEval(id) => f.write_str(id),
            Cause::One => f.write_str("one"),
            Cause::Many => f.write_str("many"),
            Cause::Grouping => f.write_str("grouping"),
        }
    }
}

pub enum Step {
    /// Resolve (or, with `full_eval`, completely evaluate) the atom at `index`.
    Select { index: usize, full_eval: bool },
    /// Replace the goal without an inference.
    Rewrite { goal: Vec<Term>, cause: Cause },
}

/// Selection strategy: picks an atom per goal and tracks a control state.
pub trait Control {
    type State: Clone;
    fn start(&self) -> Self::State;
    fn step(&self, state: &Self::State, goal: &[Term], store: &Store) -> Result<Step>;
    /// Successor state after a successful step with the given cause.
    fn next(&self, state: &Self::State, cause: &Cause) -> Result<Self::State>;
}

/// Standard Prolog control: always the leftmost atom.
pub struct LeftToRight;

impl Control for LeftToRight {
    type State = ();
    fn start(&self) {}
    fn step(&self, _: &(), _: &[Term], _: &Store) -> Result<Step> {
        Ok(Step::Select { index: 0, full_eval: false })
    }
    fn next(&self, _: &(), _: &Cause) -> Result<()> {
        Ok(())
    }
}

/// Variable bindings with an undo trail.
#[derive(Default)]
pub struct Store {
    bind: Vec<Option<Term>>,
    trail: Vec<u32>,
}

impl Store {
    fn alloc(&mut self, n: u32) -> u32 {
        let base = self.bind.len() as u32;
        self.bind.resize(self.bind.len() + n as usize, None);
        base
    }

    fn set(&mut self, v: Var, t: Term) {
        self.bind[v.0 as usize] = Some(t);
        self.trail.push(v.0);
    }

    fn undo(&mut self, trail_mark: usize, var_mark: usize) {
        for v in self.trail.drain(trail_mark..) {
            if (v as usize) < var_mark {
                self.bind[v as usize] = None;
            }
        }
        self.bind.truncate(var_mark);
    }

    pub fn deref(&self, t: &Term) -> Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match self.bind.get(v.0 as usize).and_then(|b| b.as_ref()) {
                Some(b) => cur = b,
                None => break,
            }
        }
        cur.clone()
    }

    /// Applies all bindings.
    pub fn resolve(&self, t: &Term) -> Term {
        match self.deref(t) {
            Term::App(f, args) => Term::App(f, args.iter().map(|a| self.resolve(a)).collect::<Vec<_>>().into()),
            other => other,
        }
    }

    fn occurs(&self, v: Var, t: &Term) -> bool {
        match self.deref(t) {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| self.occurs(v, a)),
            _ => false,
        }
    }

    fn unify(&mut self, a: &Term, b: &Term, occurs_check: bool) -> bool {
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((x, y)) = stack.pop() {
            let (x, y) = (self.deref(&x), self.deref(&y));
            match (&x, &y) {
                (Term::Var(v), Term::Var(w)) if v == w => {}
                // bind the younger variable to keep chains short
                (Term::Var(v), Term::Var(w)) => {
                    if v > w {
                        self.set(*v, y.clone())
                    } else {
                        self.set(*w, x.clone())
                    }
                }
                (Term::Var(v), t) | (t, Term::Var(v)) => {
                    if occurs_check && self.occurs(*v, t) {
                        return false;
                    }
                    self.set(*v, t.clone());
                }
                (Term::App(f, xs), Term::App(g, ys)) => {
                    if f != g || xs.len() != ys.len() {
                        return false;
                    }
                    stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                }
                _ => {
                    if x != y {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Cheap pre-filter: could `head` possibly unify with `goal`?
    fn may_match(&self, goal: &[Term], head: &[Term]) -> bool {
        goal.iter().zip(head).all(|(g, h)| match (self.deref(g), h) {
            (Term::Var(_), _) | (_, Term::Var(_)) => true,
            (Term::App(f, xs), Term::App(g2, ys)) => f == *g2 && xs.len() == ys.len(),
            (x, y) => x == *y,
        })
    }
}

enum Alternatives {
    Clauses { atom: Term, clauses: Rc<[usize]>, pos: usize },
    Solutions { atom: Term, sols: Rc<[Clause]>, pos: usize },
}

struct ChoicePoint<S> {
    goal: Rc<Vec<Term>>,
    index: usize,
    state: S,
    depth: usize,
    trail_mark: usize,
    var_mark: usize,
    alts: Alternatives,
}

struct Frame<S> {
    goal: Rc<Vec<Term>>,
    state: S,
    depth: usize,
}

pub struct Engine<'p, C: Control> {
    program: &'p Program,
    control: &'p C,
    limits: Limits,
    store: Store,
    inferences: u64,
    hit_limit: bool,
    stack: Vec<ChoicePoint<C::State>>,
}

/// Runs `query` to completion (or a limit) under `control`.
pub fn solve<C: Control>(program: &Program, query: &[Atom], control: &C, limits: Limits) -> Result<RunResult> {
    let goal: Vec<Term> = query.iter().map(Atom::to_term).collect();
    Engine::new(program, control, limits).run(goal)
}

pub fn solve_ltr(program: &Program, query: &[Atom], limits: Limits) -> Result<RunResult> {
    solve(program, query, &LeftToRight, limits)
}

impl<'p, C: Control> Engine<'p, C> {
    pub fn new(program: &'p Program, control: &'p C, limits: Limits) -> Self {
        Engine { program, control, limits, store: Store::default(), inferences: 0, hit_limit: false, stack: vec![] }
    }

    /// Solves `goal`, whose variables must be numbered from zero.
    pub fn run(mut self, goal: Vec<Term>) -> Result<RunResult> {
        let nvars = goal.iter().filter_map(Term::max_var).max().map_or(0, |m| m + 1);
        self.store.alloc(nvars);
        let query_vars: Vec<Var> = {
            let mut vs = Vec::new();
            goal.iter().for_each(|t| t.collect_vars(&mut vs));
            vs
        };
        let mut answers = Vec::new();
        let mut current = Some(Frame { goal: Rc::new(goal), state: self.control.start(), depth: 0 });
        loop {
            let frame = match current.take() {
                Some(f) => f,
                None => match self.backtrack()? {
                    Some(f) => f,
                    None => break,
                },
            };
            if frame.goal.is_empty() {
                answers.push(Subst::from_pairs(
                    query_vars
                        .iter()
                        .map(|v| (*v, self.store.resolve(&Term::Var(*v))))
                        .filter(|(v, t)| *t != Term::Var(*v)),
                ));
                if self.limits.max_answers.is_some_and(|m| answers.len() >= m) {
                    self.hit_limit |= !self.stack.is_empty();
                    break;
                }
                continue;
            }
            if frame.depth >= self.limits.max_depth || self.inferences >= self.limits.max_inferences {
                self.hit_limit = true;
                continue;
            }
            current = self.expand(frame)?;
        }
        Ok(RunResult { answers, inferences: self.inferences, exhausted: !self.hit_limit })
    }

    fn expand(&mut self, frame: Frame<C::State>) -> Result<Option<Frame<C::State>>> {
        let (index, full_eval) = match self.control.step(&frame.state, &frame.goal, &self.store)? {
            Step::Rewrite { goal, cause } => {
                let state = self.control.next(&frame.state, &cause)?;
                return Ok(Some(Frame { goal: Rc::new(goal), state, depth: frame.depth + 1 }));
            }
            Step::Select { index, full_eval } => (index, full_eval),
        };
        let mut atom = self.store.deref(&frame.goal[index]);
        let mut full_eval = full_eval;
        while let Term::App(f, args) = &atom {
            if !(builtins::is_call(f, args.len())) {
                break;
            }
            let inner = self.store.deref(&args[0]);
            atom = inner;
            full_eval = true;
        }
        let (pred, arity) = match atom.functor() {
            Some((p, n)) => (p.to_string(), n),
            None => {
                return Err(Error::Mode(format!(
                    "call of non-callable {}",
                    crate::parser::print_term(&self.store.resolve(&atom))
                )))
            }
        };
        let key = crate::term::PredKey::new(&pred, arity);
        let defined = self.program.defines(&key);
        let alts = if builtins::is_builtin(&pred, arity) && !defined {
            let resolved = Atom::from_term(&self.store.resolve(&atom)).expect("callable");
            self.inferences += 1;
            let sols = builtins::eval(&resolved)?
                .into_iter()
                .map(|args| instance_fact(&resolved.pred, args))
                .collect::<Vec<_>>();
            Alternatives::Solutions { atom, sols: sols.into(), pos: 0 }
        } else if !defined {
            return Err(Error::UnknownPredicate(key.to_string()));
        } else if full_eval {
            let sols = self.full_eval_user(&atom)?;
            Alternatives::Solutions { atom, sols: sols.into(), pos: 0 }
        } else {
            Alternatives::Clauses { atom, clauses: self.program.clause_indices(&key).into(), pos: 0 }
        };
        let cp = ChoicePoint {
            goal: frame.goal,
            index,
            state: frame.state,
            depth: frame.depth,
            trail_mark: self.store.trail.len(),
            var_mark: self.store.bind.len(),
            alts,
        };
        self.stack.push(cp);
        self.resume_top()
    }

    /// Runs a nested left-to-right derivation of `atom` to exhaustion.
    fn full_eval_user(&mut self, atom: &Term) -> Result<Vec<Clause>> {
        let resolved = self.store.resolve(atom);
        let local = crate::term::canonical_vars(std::slice::from_ref(&resolved)).remove(0);
        let budget = Limits {
            max_inferences: self.limits.max_inferences.saturating_sub(self.inferences),
            max_answers: None,
            ..self.limits
        };
        let res = Engine::new(self.program, &LeftToRight, budget).run(vec![local.clone()])?;
        self.inferences += res.inferences;
        self.hit_limit |= !res.exhausted;
        let pred = local.functor().map(|(p, _)| p.to_string()).unwrap_or_default();
        Ok(res
            .answers
            .iter()
            .map(|s| {
                let inst = crate::term::canonical_vars(&[s.apply(&local)]).remove(0);
                instance_fact(&pred, inst.args().to_vec())
            })
            .collect())
    }

    fn backtrack(&mut self) -> Result<Option<Frame<C::State>>> {
        while !self.stack.is_empty() {
            if let Some(f) = self.resume_top()? {
                return Ok(Some(f));
            }
        }
        Ok(None)
    }

    /// Tries the remaining alternatives of the top choice point; pops it
    /// once the last alternative has been taken or all failed.
    fn resume_top(&mut self) -> Result<Option<Frame<C::State>>> {
        let occurs_check = self.limits.occurs_check;
        loop {
            let Some(cp) = self.stack.last_mut() else { return Ok(None) };
            self.store.undo(cp.trail_mark, cp.var_mark);
            let (clause, cause, count) = match &mut cp.alts {
                Alternatives::Clauses { clauses, pos, .. } => {
                    if *pos >= clauses.len() {
                        self.stack.pop();
                        return Ok(None);
                    }
                    let c = &self.program.clauses[clauses[*pos]];
                    *pos += 1;
                    (c.clone(), Cause::Clause(c.id), true)
                }
                Alternatives::Solutions { sols, pos, .. } => {
                    if *pos >= sols.len() {
                        self.stack.pop();
                        return Ok(None);
                    }
                    *pos += 1;
                    (sols[*pos - 1].clone(), Cause::FullEval(String::new()), false)
                }
            };
            let cp = self.stack.last().unwrap();
            let atom = match &cp.alts {
                Alternatives::Clauses { atom, .. } | Alternatives::Solutions { atom, .. } => atom.clone(),
            };
            if !self.store.may_match(atom.args(), &clause.head.args) {
                continue;
            }
            let base = self.store.alloc(clause.num_vars());
            let head = clause.head.to_term().shift(base);
            if !self.store.unify(&atom, &head, occurs_check) {
                continue;
            }
            if count {
                self.inferences += 1;
            }
            let cp = self.stack.last().unwrap();
            let state = self.control.next(&cp.state, &cause)?;
            let mut goal = Vec::with_capacity(cp.goal.len() + clause.body.len());
            goal.extend_from_slice(&cp.goal[..cp.index]);
            goal.extend(clause.body.iter().map(|b| b.to_term().shift(base)));
            goal.extend_from_slice(&cp.goal[cp.index + 1..]);
            let depth = cp.depth + 1;
            let exhausted = match &cp.alts {
                Alternatives::Clauses { clauses, pos, .. } => *pos >= clauses.len(),
                Alternatives::Solutions { sols, pos, .. } => *pos >= sols.len(),
            };
            if exhausted {
                // keep bindings: drop the choice point without undoing
                self.stack.pop();
            }
            return Ok(Some(Frame { goal: Rc::new(goal), state, depth }));
        }
    }
}

fn instance_fact(pred: &str, args: Vec<Term>) -> Clause {
    let head = Atom::new(pred, args);
    Clause::new(head, vec![])
}

/// Renames answer variables apart from the query's canonically, so that
/// answers from different runs can be compared.
pub fn canonical_answer(query_vars: &[Var], s: &Subst) -> Vec<Term> {
    let terms: Vec<Term> = query_vars.iter().map(|v| s.apply(&Term::Var(*v))).collect();
    crate::term::canonical_vars(&terms)
}
