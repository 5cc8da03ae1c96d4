//! Concrete terms, atoms, clauses and programs, plus the substitution
//! machinery (unification, application, renaming) that everything else
//! in the crate is built on.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

pub type Sym = Arc<str>;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

pub const NIL: &str = "[]";
pub const CONS: &str = ".";

/// A logic variable. Clause variables are numbered `0..n` locally and
/// shifted by [`rename_apart`] when the clause is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Int(i64),
    /// Arity-0 symbol, including the empty list `[]`.
    Atom(Sym),
    /// Compound term; arity is always at least one.
    App(Sym, Arc<[Term]>),
}

impl Term {
    pub fn var(id: u32) -> Term {
        Term::Var(Var(id))
    }

    pub fn atom(name: &str) -> Term {
        Term::Atom(sym(name))
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::app_sym(sym(f), args)
    }

    /// Builds `f(args)`, collapsing to an atom when `args` is empty.
    pub fn app_sym(f: Sym, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Atom(f)
        } else {
            Term::App(f, Arc::from(args))
        }
    }

    pub fn nil() -> Term {
        Term::Atom(sym(NIL))
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::App(sym(CONS), Arc::from(vec![head, tail]))
    }

    pub fn list(items: Vec<Term>) -> Term {
        Term::list_with_tail(items, Term::nil())
    }

    pub fn list_with_tail(items: Vec<Term>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |acc, x| Term::cons(x, acc))
    }

    /// Splits a closed list into its elements; `None` for partial or
    /// improper lists.
    pub fn as_list(&self) -> Option<Vec<Term>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Atom(a) if &**a == NIL => return Some(out),
                Term::App(f, args) if &**f == CONS && args.len() == 2 => {
                    out.push(args[0].clone());
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::Atom(a) => Some((a, 0)),
            Term::App(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            _ => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn occurs(&self, v: Var) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
            _ => false,
        }
    }

    pub fn max_var(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(v.0),
            Term::App(_, args) => args.iter().filter_map(Term::max_var).max(),
            _ => None,
        }
    }

    /// Rebuilds the term with every variable passed through `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(*v),
            Term::App(name, args) => {
                Term::App(name.clone(), args.iter().map(|a| a.map_vars(f)).collect::<Vec<_>>().into())
            }
            other => other.clone(),
        }
    }

    pub fn shift(&self, offset: u32) -> Term {
        self.map_vars(&mut |v| Term::Var(Var(v.0 + offset)))
    }
}

/// A predicate applied to arguments. Arity-0 atoms are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Sym,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Atom {
        Atom { pred: sym(pred), args }
    }

    pub fn key(&self) -> PredKey {
        PredKey::new(&self.pred, self.args.len())
    }

    pub fn to_term(&self) -> Term {
        Term::app_sym(self.pred.clone(), self.args.clone())
    }

    pub fn from_term(t: &Term) -> Option<Atom> {
        match t {
            Term::Atom(a) => Some(Atom { pred: a.clone(), args: vec![] }),
            Term::App(f, args) => Some(Atom { pred: f.clone(), args: args.to_vec() }),
            _ => None,
        }
    }

    pub fn map_terms(&self, f: impl Fn(&Term) -> Term) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(f).collect() }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredKey {
    pub name: Sym,
    pub arity: usize,
}

impl PredKey {
    pub fn new(name: &str, arity: usize) -> PredKey {
        PredKey { name: sym(name), arity }
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
    pub id: u32,
    /// Source names of the clause variables, where known.
    pub names: BTreeMap<Var, Sym>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<Atom>) -> Clause {
        Clause { head, body, id: 0, names: BTreeMap::new() }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = self.head.vars();
        for a in &self.body {
            for v in a.vars() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn num_vars(&self) -> u32 {
        self.head
            .args
            .iter()
            .chain(self.body.iter().flat_map(|a| a.args.iter()))
            .filter_map(Term::max_var)
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    /// Renumbers variables to `0..n` in first-occurrence order, keeping names.
    pub fn normalized(&self) -> Clause {
        let order = self.vars();
        let map: HashMap<Var, u32> = order.iter().enumerate().map(|(i, v)| (*v, i as u32)).collect();
        let mut f = |v: Var| Term::Var(Var(map[&v]));
        let head =
            Atom { pred: self.head.pred.clone(), args: self.head.args.iter().map(|t| t.map_vars(&mut f)).collect() };
        let body = self
            .body
            .iter()
            .map(|a| Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| t.map_vars(&mut f)).collect() })
            .collect();
        let names = self.names.iter().filter_map(|(v, n)| map.get(v).map(|i| (Var(*i), n.clone()))).collect();
        Clause { head, body, id: self.id, names }
    }
}

/// An ordered knowledge base, indexed by predicate.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub clauses: Vec<Clause>,
    index: HashMap<PredKey, Vec<usize>>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.clauses == other.clauses
    }
}

impl Eq for Program {}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Program {
        let mut p = Program::default();
        for c in clauses {
            p.push(c);
        }
        p
    }

    /// Appends a clause; a zero id is replaced by the next free one.
    pub fn push(&mut self, mut c: Clause) {
        if c.id == 0 {
            c.id = self.clauses.iter().map(|c| c.id).max().unwrap_or(0) + 1;
        }
        self.index.entry(c.head.key()).or_default().push(self.clauses.len());
        self.clauses.push(c);
    }

    pub fn clauses_for(&self, key: &PredKey) -> impl Iterator<Item = &Clause> {
        self.index.get(key).into_iter().flatten().map(move |&i| &self.clauses[i])
    }

    pub fn clause_indices(&self, key: &PredKey) -> &[usize] {
        self.index.get(key).map_or(&[], |v| v.as_slice())
    }

    pub fn defines(&self, key: &PredKey) -> bool {
        self.index.contains_key(key)
    }

    pub fn clause_by_id(&self, id: u32) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.id == id)
    }

    pub fn predicates(&self) -> Vec<PredKey> {
        let mut seen = Vec::new();
        for c in &self.clauses {
            let k = c.head.key();
            if !seen.contains(&k) {
                seen.push(k);
            }
        }
        seen
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

/// Fresh-variable source for renaming clauses apart.
#[derive(Clone, Debug, Default)]
pub struct VarGen {
    next: u32,
}

impl VarGen {
    pub fn starting_at(next: u32) -> VarGen {
        VarGen { next }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var(self.next);
        self.next += 1;
        v
    }

    pub fn reserve(&mut self, n: u32) -> u32 {
        let base = self.next;
        self.next += n;
        base
    }

    pub fn peek(&self) -> u32 {
        self.next
    }

    /// Makes sure no later fresh variable collides with anything up to `v`.
    pub fn bump_past(&mut self, v: u32) {
        self.next = self.next.max(v + 1);
    }
}

/// Returns a variant of `c` whose variables were never issued by `gen` before.
pub fn rename_apart(c: &Clause, gen: &mut VarGen) -> Clause {
    let vars = c.vars();
    if vars.is_empty() {
        return c.clone();
    }
    let map: HashMap<Var, Var> = vars.iter().map(|v| (*v, gen.fresh())).collect();
    let mut f = |v: Var| Term::Var(map[&v]);
    Clause {
        head: Atom { pred: c.head.pred.clone(), args: c.head.args.iter().map(|t| t.map_vars(&mut f)).collect() },
        body: c
            .body
            .iter()
            .map(|a| Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| t.map_vars(&mut f)).collect() })
            .collect(),
        id: c.id,
        names: BTreeMap::new(),
    }
}

/// A finite map from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    pub bindings: BTreeMap<Var, Term>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Subst {
        Subst { bindings: pairs.into_iter().collect() }
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.bindings.get(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    /// Applies the bindings, following chains until a fixpoint (works on
    /// triangular substitutions too).
    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.bindings.get(v) {
                Some(b) => self.apply(b),
                None => t.clone(),
            },
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect::<Vec<_>>().into()),
            other => other.clone(),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        a.map_terms(|t| self.apply(t))
    }

    pub fn apply_all(&self, atoms: &[Atom]) -> Vec<Atom> {
        atoms.iter().map(|a| self.apply_atom(a)).collect()
    }

    /// Fully resolves every range term so the substitution is idempotent.
    pub fn normalize(&self) -> Subst {
        Subst {
            bindings: self
                .bindings
                .iter()
                .map(|(v, t)| (*v, self.apply(t)))
                .filter(|(v, t)| *t != Term::Var(*v))
                .collect(),
        }
    }

    pub fn is_idempotent(&self) -> bool {
        let dom: BTreeSet<Var> = self.bindings.keys().copied().collect();
        self.bindings.values().all(|t| t.vars().iter().all(|v| !dom.contains(v)))
    }

    /// `self` followed by `other`: applying the result equals applying
    /// `self` and then `other`.
    pub fn compose(&self, other: &Subst) -> Subst {
        let mut out: BTreeMap<Var, Term> = self.bindings.iter().map(|(v, t)| (*v, other.apply(t))).collect();
        for (v, t) in &other.bindings {
            out.entry(*v).or_insert_with(|| t.clone());
        }
        Subst { bindings: out.into_iter().filter(|(v, t)| *t != Term::Var(*v)).collect() }
    }

    pub fn restrict(&self, vars: &[Var]) -> Subst {
        Subst { bindings: vars.iter().filter_map(|v| self.bindings.get(v).map(|t| (*v, t.clone()))).collect() }
    }
}

fn walk<'a>(s: &'a Subst, t: &'a Term) -> &'a Term {
    let mut cur = t;
    while let Term::Var(v) = cur {
        match s.bindings.get(v) {
            Some(b) => cur = b,
            None => break,
        }
    }
    cur
}

fn occurs_in(s: &Subst, v: Var, t: &Term) -> bool {
    match walk(s, t) {
        Term::Var(w) => *w == v,
        Term::App(_, args) => args.iter().any(|a| occurs_in(s, v, a)),
        _ => false,
    }
}

/// Extends the (triangular) substitution `s` so that `a` and `b` become equal.
pub fn unify_into(s: &mut Subst, a: &Term, b: &Term, occurs_check: bool) -> bool {
    unify_trailed(s, a, b, occurs_check, &mut Vec::new())
}

/// As [`unify_into`], pushing every newly bound variable onto `trail`, also on failure.
pub fn unify_trailed(s: &mut Subst, a: &Term, b: &Term, occurs_check: bool, trail: &mut Vec<Var>) -> bool {
    let mut stack = vec![(a.clone(), b.clone())];
    while let Some((x, y)) = stack.pop() {
        let x = walk(s, &x).clone();
        let y = walk(s, &y).clone();
        match (&x, &y) {
            (Term::Var(v), Term::Var(w)) if v == w => {}
            (Term::Var(v), other) | (other, Term::Var(v)) => {
                if occurs_check && occurs_in(s, *v, other) {
                    return false;
                }
                s.bindings.insert(*v, other.clone());
                trail.push(*v);
            }
            (Term::Int(i), Term::Int(j)) => {
                if i != j {
                    return false;
                }
            }
            (Term::Atom(p), Term::Atom(q)) => {
                if p != q {
                    return false;
                }
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return false;
                }
                for (p, q) in xs.iter().zip(ys.iter()).rev() {
                    stack.push((p.clone(), q.clone()));
                }
            }
            _ => return false,
        }
    }
    true
}

/// Most general unifier of two terms, or `None` when they do not unify.
pub fn unify(a: &Term, b: &Term, occurs_check: bool) -> Option<Subst> {
    let mut s = Subst::new();
    if !unify_into(&mut s, a, b, occurs_check) {
        return None;
    }
    // Without the occurs check the bindings may be cyclic; those stay triangular.
    Some(if occurs_check || is_acyclic(&s) { s.normalize() } else { s })
}

fn is_acyclic(s: &Subst) -> bool {
    fn visit(s: &Subst, v: Var, on_path: &mut Vec<Var>, done: &mut BTreeSet<Var>) -> bool {
        if done.contains(&v) {
            return true;
        }
        if on_path.contains(&v) {
            return false;
        }
        on_path.push(v);
        let ok = s.bindings.get(&v).is_none_or(|t| t.vars().into_iter().all(|w| visit(s, w, on_path, done)));
        on_path.pop();
        done.insert(v);
        ok
    }
    let mut done = BTreeSet::new();
    s.bindings.keys().all(|v| visit(s, *v, &mut Vec::new(), &mut done))
}

pub fn unify_atoms(a: &Atom, b: &Atom, occurs_check: bool) -> Option<Subst> {
    if a.pred != b.pred || a.args.len() != b.args.len() {
        return None;
    }
    unify(&a.to_term(), &b.to_term(), occurs_check)
}

/// One-way matching: a substitution `m` over the variables of `pattern`
/// with `m(pattern) == target`, treating `target`'s variables as constants.
pub fn match_term(pattern: &Term, target: &Term, m: &mut Subst) -> bool {
    match (pattern, target) {
        (Term::Var(v), t) => match m.bindings.get(v) {
            Some(bound) => bound == t,
            None => {
                m.bindings.insert(*v, t.clone());
                true
            }
        },
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(p, q)| match_term(p, q, m))
        }
        (p, t) => p == t,
    }
}

/// True when `a` and `b` are equal up to a bijective variable renaming.
pub fn is_variant(a: &Term, b: &Term) -> bool {
    let mut m1 = Subst::new();
    let mut m2 = Subst::new();
    match_term(a, b, &mut m1)
        && match_term(b, a, &mut m2)
        && m1.bindings.values().all(Term::is_var)
        && m2.bindings.values().all(Term::is_var)
}

/// Renames variables to `0..n` in first-occurrence order.
pub fn canonical_vars(terms: &[Term]) -> Vec<Term> {
    let mut map: HashMap<Var, u32> = HashMap::new();
    terms
        .iter()
        .map(|t| {
            t.map_vars(&mut |v| {
                let n = map.len() as u32;
                Term::Var(Var(*map.entry(v).or_insert(n)))
            })
        })
        .collect()
}
