//! Offline partial deduction driven by filter declarations (binding types)
//! and clause annotations: memoized unfolding of generalized calls into a
//! residual program.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::builtins::{self, is_builtin, is_call};
use crate::engine::{solve_ltr, Limits};
use crate::error::{Error, Result};
use crate::parser::{print_term, Parser};
use crate::term::{
    canonical_vars, match_term, rename_apart, unify_trailed, Atom, Clause, PredKey, Program, Subst, Sym, Term, Var,
    VarGen,
};

pub const UNFOLD_BUDGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BindingType {
    Static,
    Dynamic,
    Nonvar,
    Struct(Sym, Vec<BindingType>),
    /// A closed list whose elements have the given type.
    ListOf(Box<BindingType>),
    /// The first applicable alternative.
    Or(Vec<BindingType>),
}

impl BindingType {
    pub fn from_term(t: &Term) -> Result<BindingType> {
        let bad = || Error::Specialize(format!("unknown binding type {}", print_term(t)));
        match t {
            Term::Atom(a) => match &**a {
                "static" => Ok(BindingType::Static),
                "dynamic" => Ok(BindingType::Dynamic),
                "nonvar" => Ok(BindingType::Nonvar),
                _ => Err(bad()),
            },
            Term::App(f, xs) => match (&**f, xs.len()) {
                ("type", 1) => BindingType::from_term(&xs[0]),
                ("list", 1) => Ok(BindingType::ListOf(Box::new(BindingType::from_term(&xs[0])?))),
                (";", 2) => {
                    let mut alts = Vec::new();
                    for x in [&xs[0], &xs[1]] {
                        match BindingType::from_term(x)? {
                            BindingType::Or(more) => alts.extend(more),
                            b => alts.push(b),
                        }
                    }
                    Ok(BindingType::Or(alts))
                }
                ("struct", 2) => {
                    let name = match &xs[0] {
                        Term::Atom(n) => n.clone(),
                        _ => return Err(bad()),
                    };
                    let args = xs[1].as_list().ok_or_else(bad)?;
                    Ok(BindingType::Struct(name, args.iter().map(BindingType::from_term).collect::<Result<_>>()?))
                }
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }

    fn generalize(&self, t: &Term, gen: &mut VarGen) -> std::result::Result<Term, String> {
        match self {
            BindingType::Static => Ok(t.clone()),
            BindingType::Dynamic => Ok(Term::Var(gen.fresh())),
            BindingType::Nonvar => match t {
                Term::Var(_) => Err(format!("nonvar binding type on unbound {}", print_term(t))),
                Term::App(f, xs) => Ok(Term::App(f.clone(), xs.iter().map(|_| Term::Var(gen.fresh())).collect())),
                other => Ok(other.clone()),
            },
            BindingType::Struct(f, tys) => match t {
                Term::Atom(a) if *a == *f && tys.is_empty() => Ok(t.clone()),
                Term::App(g, xs) if *g == *f && xs.len() == tys.len() => Ok(Term::App(
                    g.clone(),
                    xs.iter()
                        .zip(tys)
                        .map(|(x, ty)| ty.generalize(x, gen))
                        .collect::<std::result::Result<Vec<_>, _>>()?
                        .into(),
                )),
                _ => Err(format!("{} is not a {f}/{} structure", print_term(t), tys.len())),
            },
            BindingType::ListOf(ty) => {
                let items = t.as_list().ok_or_else(|| format!("list binding type on open list {}", print_term(t)))?;
                Ok(Term::list(items.iter().map(|x| ty.generalize(x, gen)).collect::<std::result::Result<_, _>>()?))
            }
            BindingType::Or(alts) => {
                let mut last = String::from("empty disjunction");
                for a in alts {
                    let mark = gen.peek();
                    match a.generalize(t, gen) {
                        Ok(r) => return Ok(r),
                        Err(e) => {
                            last = e;
                            *gen = VarGen::starting_at(mark);
                        }
                    }
                }
                Err(format!("no applicable disjunct: {last}"))
            }
        }
    }
}

/// Per-predicate argument binding types.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Filters {
    pub map: BTreeMap<PredKey, Vec<BindingType>>,
}

impl Filters {
    /// One declaration per clause-like line: `mi(type(list(nonvar)),static).`
    pub fn parse(text: &str) -> Result<Filters> {
        let mut p = Parser::new(text)?;
        let mut f = Filters::default();
        while !p.at_eof() {
            let t = p.term(1200)?;
            p.expect_end()?;
            let a = Atom::from_term(&t).ok_or_else(|| Error::Specialize(format!("bad filter {}", print_term(&t))))?;
            let tys = a.args.iter().map(BindingType::from_term).collect::<Result<Vec<_>>>()?;
            f.map.insert(a.key(), tys);
        }
        Ok(f)
    }

    pub fn get(&self, k: &PredKey) -> Option<&[BindingType]> {
        self.map.get(k).map(Vec::as_slice)
    }
}

/// Generalizes `a` per its binding types; the result has fresh variables
/// from `gen` where arguments were abstracted.
pub fn generalize_call(a: &Atom, types: &[BindingType], gen: &mut VarGen) -> Result<Atom> {
    if types.len() != a.args.len() {
        return Err(Error::Specialize(format!("filter arity mismatch for {}", a.key())));
    }
    let args = a
        .args
        .iter()
        .zip(types)
        .map(|(t, ty)| ty.generalize(t, gen))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Specialize(format!("cannot generalize {}: {e}", print_term(&a.to_term()))))?;
    Ok(Atom { pred: a.pred.clone(), args })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ann {
    Unfold,
    Call,
    Rescall,
    Memo,
}

impl std::str::FromStr for Ann {
    type Err = Error;
    fn from_str(s: &str) -> Result<Ann> {
        match s {
            "unfold" => Ok(Ann::Unfold),
            "call" => Ok(Ann::Call),
            "rescall" => Ok(Ann::Rescall),
            "memo" => Ok(Ann::Memo),
            other => Err(Error::Specialize(format!("unknown annotation '{other}'"))),
        }
    }
}

/// An annotation override: body atoms that are instances of `pattern`,
/// optionally restricted to clauses of one predicate (and its n-th clause).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Override {
    pub ann: Ann,
    pub pattern: Atom,
    pub scope: Option<(PredKey, Option<usize>)>,
}

/// Parses `logen(Mode, Pattern[, Name/Arity[, ClauseNumber]]).` lines.
pub fn parse_overrides(text: &str) -> Result<Vec<Override>> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while !p.at_eof() {
        let t = p.term(1200)?;
        p.expect_end()?;
        let bad = || Error::Specialize(format!("bad annotation {}", print_term(&t)));
        let Term::App(f, xs) = &t else { return Err(bad()) };
        if &**f != "logen" || !(2..=4).contains(&xs.len()) {
            return Err(bad());
        }
        let ann: Ann = match &xs[0] {
            Term::Atom(m) => m.parse()?,
            _ => return Err(bad()),
        };
        let pattern = Atom::from_term(&xs[1]).ok_or_else(bad)?;
        let scope = match xs.get(2) {
            None => None,
            Some(Term::App(sl, ys)) if &**sl == "/" && ys.len() == 2 => {
                let key = match (&ys[0], &ys[1]) {
                    (Term::Atom(n), Term::Int(k)) => PredKey::new(n, *k as usize),
                    _ => return Err(bad()),
                };
                let nth = match xs.get(3) {
                    None => None,
                    Some(Term::Int(n)) if *n >= 1 => Some(*n as usize),
                    _ => return Err(bad()),
                };
                Some((key, nth))
            }
            _ => return Err(bad()),
        };
        out.push(Override { ann, pattern, scope });
    }
    Ok(out)
}

/// Annotation of every body atom, keyed by clause id and body position.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Annotations {
    pub map: HashMap<(u32, usize), Ann>,
}

/// Built-ins (and `call/1`) are executed, everything else unfolded.
pub fn default_annotations(p: &Program) -> Annotations {
    let mut map = HashMap::new();
    for c in &p.clauses {
        for (j, b) in c.body.iter().enumerate() {
            let k = b.key();
            let ann = if is_builtin(&k.name, k.arity) || is_call(&k.name, k.arity) { Ann::Call } else { Ann::Unfold };
            map.insert((c.id, j), ann);
        }
    }
    Annotations { map }
}

impl Annotations {
    pub fn apply(&mut self, p: &Program, overrides: &[Override]) {
        let mut nth: HashMap<PredKey, usize> = HashMap::new();
        for c in &p.clauses {
            let key = c.head.key();
            let n = nth.entry(key.clone()).or_insert(0);
            *n += 1;
            for (j, b) in c.body.iter().enumerate() {
                for o in overrides {
                    let in_scope = match &o.scope {
                        None => true,
                        Some((k, None)) => *k == key,
                        Some((k, Some(i))) => *k == key && *i == *n,
                    };
                    if in_scope && match_term(&o.pattern.to_term(), &b.to_term(), &mut Subst::new()) {
                        self.map.insert((c.id, j), o.ann);
                    }
                }
            }
        }
    }

    pub fn get(&self, clause: u32, pos: usize) -> Ann {
        self.map.get(&(clause, pos)).copied().unwrap_or(Ann::Unfold)
    }
}

#[derive(Clone, Debug)]
pub struct Request {
    pub subject: Program,
    pub entry: Atom,
    pub filters: Filters,
    pub annotations: Annotations,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoEntry {
    /// Generalized call, variables numbered from zero.
    pub call: Atom,
    pub name: String,
}

impl MemoEntry {
    pub fn arity(&self) -> usize {
        self.call.vars().len()
    }
}

#[derive(Clone, Debug)]
pub struct Residual {
    /// Calls the residual entry predicate with the entry atom's arguments.
    pub entry: Clause,
    pub clauses: Program,
    /// Subject clauses reachable from residual calls (`rescall` targets).
    pub support: Program,
    pub memo: Vec<MemoEntry>,
}

impl Residual {
    pub fn program(&self) -> Program {
        let mut p = Program::default();
        p.push(self.entry.clone());
        for c in self.clauses.clauses.iter().chain(&self.support.clauses) {
            let mut c = c.clone();
            c.id = 0;
            p.push(c);
        }
        p
    }
}

struct Specializer<'r> {
    req: &'r Request,
    memo: Vec<MemoEntry>,
    index: HashMap<String, usize>,
    per_state: HashMap<String, usize>,
    queue: VecDeque<usize>,
    rescalls: BTreeSet<PredKey>,
    call_any: bool,
}

type Goal = Vec<(Term, Ann)>;

struct Tree {
    gen: VarGen,
    steps: usize,
    leaves: Vec<(Subst, Vec<Term>)>,
}

impl Specializer<'_> {
    fn residual_name(&mut self, call: &Atom) -> String {
        let base = match (call.pred.as_ref(), call.args.get(1)) {
            ("mi", Some(Term::Int(s))) if call.args.len() == 2 => format!("mi__S{s}"),
            _ => call.pred.to_string(),
        };
        let k = self.per_state.entry(base.clone()).or_insert(0);
        *k += 1;
        format!("{base}__{k}")
    }

    /// The residual call standing for `a`, registering its generalization.
    fn memo_call(&mut self, a: &Term) -> Result<Term> {
        let atom =
            Atom::from_term(a).ok_or_else(|| Error::Specialize(format!("memo on non-atom {}", print_term(a))))?;
        let types = self
            .req
            .filters
            .get(&atom.key())
            .ok_or_else(|| Error::Specialize(format!("no filter declaration for memoized {}", atom.key())))?;
        let mut gen = VarGen::starting_at(atom.to_term().max_var().map_or(0, |m| m + 1));
        let g = generalize_call(&atom, types, &mut gen)?;
        let g = Atom::from_term(&canonical_vars(&[g.to_term()])[0]).expect("atom");
        let key = print_term(&g.to_term());
        let i = match self.index.get(&key) {
            Some(&i) => i,
            None => {
                let name = self.residual_name(&g);
                self.memo.push(MemoEntry { call: g.clone(), name });
                let i = self.memo.len() - 1;
                self.index.insert(key, i);
                self.queue.push_back(i);
                i
            }
        };
        let mut theta = Subst::new();
        if !match_term(&self.memo[i].call.to_term(), a, &mut theta) {
            return Err(Error::Specialize(format!(
                "internal: {} is not an instance of its generalization",
                print_term(a)
            )));
        }
        let m = &self.memo[i];
        Ok(Term::app(
            &m.name,
            m.call.vars().into_iter().map(|v| theta.get(v).cloned().unwrap_or(Term::Var(v))).collect(),
        ))
    }

    fn execute(&self, a: &Term) -> Result<Vec<Term>> {
        let a = unwrap_call(a);
        let atom =
            Atom::from_term(&a).ok_or_else(|| Error::Specialize(format!("call of non-callable {}", print_term(&a))))?;
        let k = atom.key();
        if is_builtin(&k.name, k.arity) && !self.req.subject.defines(&k) {
            return Ok(builtins::eval(&atom)?
                .into_iter()
                .map(|args| Atom { pred: atom.pred.clone(), args }.to_term())
                .collect());
        }
        let local = canonical_vars(std::slice::from_ref(&a)).remove(0);
        let q = Atom::from_term(&local).expect("atom");
        let r = solve_ltr(&self.req.subject, &[q], Limits::default())?;
        if !r.exhausted {
            return Err(Error::Specialize(format!("specialization-time call {} did not terminate", print_term(&a))));
        }
        Ok(r.answers.iter().map(|s| canonical_vars(&[s.apply(&local)]).remove(0)).collect())
    }

    /// Unfolds `goal` under `s`; `s` is restored before returning.
    fn derive(&mut self, t: &mut Tree, goal: &[(Term, Ann)], s: &mut Subst, body: Vec<Term>) -> Result<()> {
        let Some(((first, ann), rest)) = goal.split_first() else {
            t.leaves.push((s.clone(), body));
            return Ok(());
        };
        t.steps += 1;
        let a = s.apply(first);
        if t.steps > UNFOLD_BUDGET {
            return Err(Error::Specialize(format!(
                "unfolding budget of {UNFOLD_BUDGET} steps exceeded at {}",
                print_term(&a)
            )));
        }
        let (name, arity) = a
            .functor()
            .map(|(n, k)| (n.to_string(), k))
            .ok_or_else(|| Error::Specialize(format!("non-callable goal {}", print_term(&a))))?;
        let key = PredKey::new(&name, arity);
        let executable = (is_builtin(&name, arity) && !self.req.subject.defines(&key)) || is_call(&name, arity);
        match ann {
            Ann::Unfold if !executable => {
                if !self.req.subject.defines(&key) {
                    return Err(Error::UnknownPredicate(key.to_string()));
                }
                let clauses: Vec<Clause> = self.req.subject.clauses_for(&key).cloned().collect();
                for c in clauses {
                    let r = rename_apart(&c, &mut t.gen);
                    let mut trail = vec![];
                    if unify_trailed(s, &a, &r.head.to_term(), true, &mut trail) {
                        let mut g: Goal = r
                            .body
                            .iter()
                            .enumerate()
                            .map(|(j, b)| (b.to_term(), self.req.annotations.get(c.id, j)))
                            .collect();
                        g.extend_from_slice(rest);
                        let res = self.derive(t, &g, s, body.clone());
                        undo(s, &trail);
                        res?;
                    } else {
                        undo(s, &trail);
                    }
                }
                Ok(())
            }
            Ann::Unfold | Ann::Call => {
                let target = unwrap_call(&a);
                for sol in self.execute(&target)? {
                    let sol = sol.shift(t.gen.reserve(sol.max_var().map_or(0, |m| m + 1)));
                    let mut trail = vec![];
                    let res = if unify_trailed(s, &target, &sol, true, &mut trail) {
                        self.derive(t, rest, s, body.clone())
                    } else {
                        Ok(())
                    };
                    undo(s, &trail);
                    res?;
                }
                Ok(())
            }
            Ann::Rescall => {
                self.note_rescall(&a);
                let mut b = body;
                b.push(a);
                self.derive(t, rest, s, b)
            }
            Ann::Memo => {
                let call = self.memo_call(&a)?;
                let mut b = body;
                b.push(call);
                self.derive(t, rest, s, b)
            }
        }
    }

    fn note_rescall(&mut self, a: &Term) {
        let a = unwrap_call(a);
        if a.is_var() {
            self.call_any = true;
            return;
        }
        if let Some((n, k)) = a.functor() {
            self.rescalls.insert(PredKey::new(n, k));
        }
    }

    fn support(&self) -> Program {
        let subject = &self.req.subject;
        let mut need: BTreeSet<PredKey> =
            if self.call_any { subject.predicates().into_iter().collect() } else { self.rescalls.clone() };
        let mut work: Vec<PredKey> = need.iter().cloned().collect();
        while let Some(k) = work.pop() {
            for c in subject.clauses_for(&k) {
                for b in &c.body {
                    let mut keys = vec![b.key()];
                    if is_call(&b.pred, b.args.len()) {
                        match b.args[0].functor() {
                            Some((n, a)) => keys.push(PredKey::new(n, a)),
                            None => keys.extend(subject.predicates()),
                        }
                    }
                    for k2 in keys {
                        if subject.defines(&k2) && need.insert(k2.clone()) {
                            work.push(k2);
                        }
                    }
                }
            }
        }
        Program::new(subject.clauses.iter().filter(|c| need.contains(&c.head.key())).cloned().collect())
    }
}

/// Stack for one specialization; derivation depth is bounded by [`UNFOLD_BUDGET`].
const SPECIALIZE_STACK: usize = 256 << 20;

/// Specializes the subject for its entry call.
pub fn specialize(req: &Request) -> Result<Residual> {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(SPECIALIZE_STACK)
            .spawn_scoped(s, || specialize_on_stack(req))
            .map_err(|e| Error::Specialize(format!("cannot spawn specializer: {e}")))?
            .join()
            .unwrap_or_else(|p| std::panic::resume_unwind(p))
    })
}

fn specialize_on_stack(req: &Request) -> Result<Residual> {
    if req.filters.get(&req.entry.key()).is_none() {
        return Err(Error::Specialize(format!("entry {} has no filter declaration", req.entry.key())));
    }
    let mut sp = Specializer {
        req,
        memo: vec![],
        index: HashMap::new(),
        per_state: HashMap::new(),
        queue: VecDeque::new(),
        rescalls: BTreeSet::new(),
        call_any: false,
    };
    let entry_call = sp.memo_call(&req.entry.to_term())?;
    let mut clauses = Program::default();
    while let Some(i) = sp.queue.pop_front() {
        let root = sp.memo[i].clone();
        let root_term = root.call.to_term();
        let mut t =
            Tree { gen: VarGen::starting_at(root_term.max_var().map_or(0, |m| m + 1)), steps: 0, leaves: vec![] };
        sp.derive(&mut t, &[(root_term.clone(), Ann::Unfold)], &mut Subst::new(), vec![])?;
        let head_vars = root.call.vars();
        for (s, body) in t.leaves {
            let head = Atom::new(&root.name, head_vars.iter().map(|v| s.apply(&Term::Var(*v))).collect());
            let body = body.iter().map(|b| Atom::from_term(&s.apply(b)).expect("residual atom")).collect();
            clauses.push(Clause::new(head, body).normalized());
        }
    }
    let entry_atom = entry_wrapper_head(&req.entry);
    let mut entry = Clause::new(entry_atom, vec![Atom::from_term(&entry_call).expect("atom")]).normalized();
    let clauses = simplify(clauses, &mut entry);
    let support = sp.support();
    for m in &sp.memo {
        if support.defines(&PredKey::new(&m.name, m.arity())) {
            return Err(Error::Specialize(format!("residual name {} clashes with a subject predicate", m.name)));
        }
    }
    Ok(Residual { entry, clauses, support, memo: sp.memo })
}

fn undo(s: &mut Subst, trail: &[Var]) {
    for v in trail {
        s.bindings.remove(v);
    }
}

fn unwrap_call(a: &Term) -> Term {
    let mut a = a.clone();
    while let Term::App(f, xs) = &a {
        if !is_call(f, xs.len()) {
            break;
        }
        a = xs[0].clone();
    }
    a
}

/// A single clause whose head arguments are distinct variables, with at
/// most one body atom that is not a call to itself.
fn inlinable(cs: &[&Clause]) -> Option<Clause> {
    let [c] = cs else { return None };
    let mut seen = BTreeSet::new();
    let distinct = c.head.args.iter().all(|t| matches!(t, Term::Var(v) if seen.insert(*v)));
    let self_call = c.body.iter().any(|b| b.key() == c.head.key());
    (distinct && c.body.len() <= 1 && !self_call).then(|| (*c).clone())
}

/// Replaces calls to inlinable predicates by their bodies and drops
/// predicates no longer called.
fn simplify(clauses: Program, entry: &mut Clause) -> Program {
    let mut cs: Vec<Clause> = clauses.clauses;
    loop {
        let mut by_key: BTreeMap<PredKey, Vec<&Clause>> = BTreeMap::new();
        for c in &cs {
            by_key.entry(c.head.key()).or_default().push(c);
        }
        let inline: BTreeMap<PredKey, Clause> =
            by_key.iter().filter_map(|(k, v)| inlinable(v).map(|c| (k.clone(), c))).collect();
        let rewrite = |c: &Clause| -> Option<Clause> {
            let pos = c.body.iter().position(|b| inline.contains_key(&b.key()))?;
            let def = &inline[&c.body[pos].key()];
            let mut gen = VarGen::starting_at(c.num_vars());
            let def = rename_apart(def, &mut gen);
            let theta =
                Subst::from_pairs(def.head.args.iter().zip(&c.body[pos].args).map(|(h, a)| (h.vars()[0], a.clone())));
            let mut body = c.body.clone();
            body.splice(pos..=pos, def.body.iter().map(|b| theta.apply_atom(b)));
            Some(Clause::new(c.head.clone(), body).normalized())
        };
        let mut changed = false;
        if let Some(e) = rewrite(entry) {
            *entry = e;
            changed = true;
        }
        for c in cs.iter_mut() {
            if let Some(r) = rewrite(c) {
                *c = r;
                changed = true;
            }
        }
        let mut called: BTreeSet<PredKey> = entry.body.iter().map(Atom::key).collect();
        called.extend(cs.iter().flat_map(|c| c.body.iter().map(Atom::key)));
        let before = cs.len();
        cs.retain(|c| called.contains(&c.head.key()));
        if !changed && cs.len() == before {
            break;
        }
    }
    let mut p = Program::default();
    for c in cs {
        p.push(c);
    }
    p
}

/// `compute([q(X1..Xn)])` → `q(X1..Xn)`; other entries keep their own head.
fn entry_wrapper_head(entry: &Atom) -> Atom {
    if entry.pred.as_ref() == "compute" && entry.args.len() == 1 {
        if let Some(items) = entry.args[0].as_list() {
            if let [single] = items.as_slice() {
                if let Some(a) = Atom::from_term(single) {
                    return a;
                }
            }
        }
    }
    Atom::new(&format!("{}_entry", entry.pred), entry.args.clone())
}

/// Residual body atoms that are neither calls to a memoized root nor
/// residual calls into the support program or built-ins.
pub fn check_closedness(r: &Residual) -> Vec<String> {
    let memo: HashMap<&str, usize> = r.memo.iter().map(|m| (m.name.as_str(), m.arity())).collect();
    let mut out = Vec::new();
    for c in std::iter::once(&r.entry).chain(&r.clauses.clauses) {
        for b in &c.body {
            let k = b.key();
            let ok = match memo.get(k.name.as_ref()) {
                Some(&n) => n == k.arity,
                None => {
                    is_builtin(&k.name, k.arity)
                        || r.support.defines(&k)
                        || (is_call(&k.name, k.arity)
                            && match b.args[0].functor() {
                                Some((n, a)) => is_builtin(n, a) || r.support.defines(&PredKey::new(n, a)),
                                None => true,
                            })
                }
            };
            if !ok {
                out.push(format!("{} in a clause of {}", print_term(&b.to_term()), c.head.key()));
            }
        }
    }
    out
}

/// Fresh-variable concrete atom for an abstract entry pattern's predicate.
pub fn entry_skeleton(key: &PredKey) -> Atom {
    Atom::new(&key.name, (0..key.arity as u32).map(Term::var).collect())
}

/// `compute([p(X1..Xn)])`.
pub fn compute_entry(key: &PredKey) -> Atom {
    crate::metaint::compute_query(&[entry_skeleton(key)])
}

/// Filters shipped for the encoded meta-interpreter.
pub const SIMPLE_FILTERS: &str = "compute(type(list(nonvar))).\nmi(type(list(nonvar)),static).\n";
pub const EXTENDED_FILTERS: &str = "compute(type(list(nonvar))).
mi(type(list((struct(cmulti,[struct('.',[struct(building_block,[type(list(nonvar))]),dynamic])]) ; nonvar))),static).
";
/// Annotation overrides shipped for the encoded meta-interpreter.
pub const MI_ANNOTATIONS: &str = "logen(memo, mi(_,_)).
logen(rescall, call(_)).
logen(rescall, mi_append(_,_,_), group_blocks/4, 3).
";
