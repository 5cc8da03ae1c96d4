//! The abstract domain: terms over `a_i` (any) and `g_j` (ground) variables,
//! conjunctions of abstract atoms and multi abstractions, equivalence by
//! canonical renumbering, instance checks, concretization membership,
//! abstract resolution and depth-k widening.
//!
//! Abstract terms reuse [`Term`]; the variable id encodes kind and index:
//! `a_i` is `Var(2i)` and `g_j` is `Var(2j+1)`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::multi::Multi;
use crate::parser::{flatten_conj, parse_term, Printer};
use crate::term::{match_term, unify, Atom, Clause, Subst, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Any,
    Ground,
}

pub fn avar(kind: Kind, idx: u32) -> Var {
    Var(2 * idx + u32::from(kind == Kind::Ground))
}

pub fn a(idx: u32) -> Term {
    Term::Var(avar(Kind::Any, idx))
}

pub fn g(idx: u32) -> Term {
    Term::Var(avar(Kind::Ground, idx))
}

pub fn kind_of(v: Var) -> Kind {
    if v.0 & 1 == 1 {
        Kind::Ground
    } else {
        Kind::Any
    }
}

pub fn index_of(v: Var) -> u32 {
    v.0 / 2
}

pub fn var_name(v: Var) -> String {
    match kind_of(v) {
        Kind::Any => format!("a{}", index_of(v)),
        Kind::Ground => format!("g{}", index_of(v)),
    }
}

/// True when every concrete instance is ground.
pub fn abs_ground(t: &Term) -> bool {
    t.vars().iter().all(|v| kind_of(*v) == Kind::Ground)
}

/// One element of an abstract conjunction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Conjunct {
    Atom(Atom),
    Multi(Multi),
}

impl Conjunct {
    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            Conjunct::Atom(a) => Some(a),
            Conjunct::Multi(_) => None,
        }
    }

    /// Variables of the enclosing conjunction referenced here.
    pub fn outer_terms(&self) -> Vec<Term> {
        match self {
            Conjunct::Atom(a) => a.args.clone(),
            Conjunct::Multi(m) => m.outer_terms(),
        }
    }

    pub fn apply(&self, s: &Subst) -> Conjunct {
        match self {
            Conjunct::Atom(a) => Conjunct::Atom(s.apply_atom(a)),
            Conjunct::Multi(m) => Conjunct::Multi(m.apply_outer(s)),
        }
    }
}

pub type Conj = Vec<Conjunct>;

pub fn atoms_conj(atoms: Vec<Atom>) -> Conj {
    atoms.into_iter().map(Conjunct::Atom).collect()
}

pub fn apply_conj(c: &[Conjunct], s: &Subst) -> Conj {
    c.iter().map(|x| x.apply(s)).collect()
}

/// Outer variables of a conjunction in first-occurrence order.
pub fn conj_vars(c: &[Conjunct]) -> Vec<Var> {
    let mut out = Vec::new();
    for x in c {
        for t in x.outer_terms() {
            t.collect_vars(&mut out);
        }
    }
    out
}

/// Fresh abstract variables, above every index already in use.
#[derive(Clone, Debug, Default)]
pub struct AbsGen {
    next_a: u32,
    next_g: u32,
}

impl AbsGen {
    pub fn above(vars: &[Var]) -> AbsGen {
        let mut gen = AbsGen { next_a: 1, next_g: 1 };
        gen.reserve(vars);
        gen
    }

    pub fn for_conj(c: &[Conjunct]) -> AbsGen {
        AbsGen::above(&conj_vars(c))
    }

    pub fn for_terms(ts: &[Term]) -> AbsGen {
        let mut vs = Vec::new();
        ts.iter().for_each(|t| t.collect_vars(&mut vs));
        AbsGen::above(&vs)
    }

    pub fn reserve(&mut self, vars: &[Var]) {
        for v in vars {
            let i = index_of(*v) + 1;
            match kind_of(*v) {
                Kind::Any => self.next_a = self.next_a.max(i),
                Kind::Ground => self.next_g = self.next_g.max(i),
            }
        }
    }

    pub fn fresh(&mut self, kind: Kind) -> Var {
        let slot = match kind {
            Kind::Any => &mut self.next_a,
            Kind::Ground => &mut self.next_g,
        };
        let v = avar(kind, *slot);
        *slot += 1;
        v
    }
}

/// Renumbers variables per kind in first-occurrence order, starting at 1.
#[derive(Default)]
pub struct Renumber {
    map: HashMap<Var, Var>,
    next: [u32; 2],
}

impl Renumber {
    pub fn var(&mut self, v: Var) -> Var {
        if let Some(w) = self.map.get(&v) {
            return *w;
        }
        let k = kind_of(v);
        let slot = &mut self.next[usize::from(k == Kind::Ground)];
        *slot += 1;
        let w = avar(k, *slot);
        self.map.insert(v, w);
        w
    }

    pub fn term(&mut self, t: &Term) -> Term {
        t.map_vars(&mut |v| Term::Var(self.var(v)))
    }

    pub fn atom(&mut self, a: &Atom) -> Atom {
        Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| self.term(t)).collect() }
    }
}

/// Canonical representative of the ≈-class of a conjunction.
pub fn canonical(c: &[Conjunct]) -> Conj {
    let mut r = Renumber::default();
    let mut next_id = 0;
    c.iter()
        .map(|x| match x {
            Conjunct::Atom(a) => Conjunct::Atom(r.atom(a)),
            Conjunct::Multi(m) => {
                next_id += 1;
                let m = m.canonical_local();
                let mut m = m.map_outer(&mut |t| r.term(t));
                m.id = next_id;
                Conjunct::Multi(m)
            }
        })
        .collect()
}

pub fn canonical_atom(a: &Atom) -> Atom {
    Renumber::default().atom(a)
}

pub fn equivalent(x: &[Conjunct], y: &[Conjunct]) -> bool {
    canonical(x) == canonical(y)
}

pub fn equivalent_atoms(x: &Atom, y: &Atom) -> bool {
    canonical_atom(x) == canonical_atom(y)
}

fn respects_groundness(m: &Subst) -> bool {
    m.bindings.iter().all(|(v, t)| kind_of(*v) == Kind::Any || abs_ground(t))
}

/// θ with `general·θ = specific`, or `None`.
pub fn abstract_instance(specific: &Term, general: &Term) -> Option<Subst> {
    let mut m = Subst::new();
    (match_term(general, specific, &mut m) && respects_groundness(&m)).then_some(m)
}

pub fn abstract_instance_atom(specific: &Atom, general: &Atom) -> Option<Subst> {
    if specific.key() != general.key() {
        return None;
    }
    abstract_instance(&specific.to_term(), &general.to_term())
}

/// `specific` is an instance of `general` but not vice versa.
pub fn strict_instance(specific: &Atom, general: &Atom) -> bool {
    abstract_instance_atom(specific, general).is_some() && abstract_instance_atom(general, specific).is_none()
}

/// Concrete term membership in γ(abstract): concrete variables act as
/// constants, ground abstract variables only take ground terms.
pub fn gamma_member(concrete: &Term, abstract_: &Term) -> bool {
    let mut m = Subst::new();
    gamma_match(concrete, abstract_, &mut m)
}

/// Extends `m` (abstract var → concrete term) so that `abstract_` maps onto `concrete`.
pub fn gamma_match(concrete: &Term, abstract_: &Term, m: &mut Subst) -> bool {
    let before: Vec<Var> = m.bindings.keys().copied().collect();
    if !match_term(abstract_, concrete, m) {
        return false;
    }
    m.bindings.iter().filter(|(v, _)| !before.contains(v)).all(|(v, t)| kind_of(*v) == Kind::Any || t.is_ground())
}

/// Forces every variable in the range of a ground variable to be ground.
pub fn propagate_groundness(s: Subst, gen: &mut AbsGen) -> Subst {
    let mut to_ground = Vec::new();
    for (v, t) in &s.bindings {
        if kind_of(*v) == Kind::Ground {
            for w in t.vars() {
                if kind_of(w) == Kind::Any && !to_ground.contains(&w) {
                    to_ground.push(w);
                }
            }
        }
    }
    if to_ground.is_empty() {
        return s;
    }
    let g = Subst::from_pairs(to_ground.into_iter().map(|w| (w, Term::Var(gen.fresh(Kind::Ground)))));
    s.compose(&g)
}

/// Abstract unification: syntactic mgu plus groundness propagation.
pub fn abstract_unify(x: &Term, y: &Term, gen: &mut AbsGen) -> Option<Subst> {
    let s = unify(x, y, true)?;
    Some(propagate_groundness(s, gen))
}

/// Abstracts a clause into the conjunction's variable space: clause
/// variables become fresh `a` variables and integers fresh `g` variables.
pub fn abstract_clause(c: &Clause, gen: &mut AbsGen) -> (Atom, Vec<Atom>) {
    let mut map: HashMap<Var, Var> = HashMap::new();
    let mut conv = |t: &Term, gen: &mut AbsGen| abstract_concrete(t, &mut map, gen);
    let head = Atom { pred: c.head.pred.clone(), args: c.head.args.iter().map(|t| conv(t, gen)).collect() };
    let body = c
        .body
        .iter()
        .map(|b| Atom { pred: b.pred.clone(), args: b.args.iter().map(|t| conv(t, gen)).collect() })
        .collect();
    (head, body)
}

fn abstract_concrete(t: &Term, map: &mut HashMap<Var, Var>, gen: &mut AbsGen) -> Term {
    match t {
        Term::Var(v) => Term::Var(*map.entry(*v).or_insert_with(|| gen.fresh(Kind::Any))),
        Term::Int(_) => Term::Var(gen.fresh(Kind::Ground)),
        Term::Atom(_) => t.clone(),
        Term::App(f, args) => {
            Term::App(f.clone(), args.iter().map(|x| abstract_concrete(x, map, gen)).collect::<Vec<_>>().into())
        }
    }
}

/// One abstract resolution step on the atom at `idx`. Returns the new
/// conjunction and the substitution applied to the caller's variables.
pub fn resolve_with_clause(c: &[Conjunct], idx: usize, clause: &Clause) -> Option<(Conj, Subst)> {
    let atom = c[idx].as_atom()?;
    if atom.key() != clause.head.key() {
        return None;
    }
    let mut gen = AbsGen::for_conj(c);
    let (head, body) = abstract_clause(clause, &mut gen);
    let s = abstract_unify(&atom.to_term(), &head.to_term(), &mut gen)?;
    let mut out: Conj = Vec::with_capacity(c.len() + body.len());
    out.extend(c[..idx].iter().map(|x| x.apply(&s)));
    out.extend(body.iter().map(|b| Conjunct::Atom(s.apply_atom(b))));
    out.extend(c[idx + 1..].iter().map(|x| x.apply(&s)));
    Some((out, s.restrict(&conj_vars(c))))
}

/// Truncates every argument to depth `k`. Truncated subterms that are
/// identical share one fresh variable, ground when the subterm is ground.
pub fn widen_atom(a: &Atom, k: usize, gen: &mut AbsGen) -> Atom {
    let mut memo = BTreeMap::new();
    Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| widen_term(t, k, gen, &mut memo)).collect() }
}

pub fn widen(t: &Term, k: usize, gen: &mut AbsGen) -> Term {
    widen_term(t, k, gen, &mut BTreeMap::new())
}

fn widen_term(t: &Term, k: usize, gen: &mut AbsGen, memo: &mut BTreeMap<Term, Var>) -> Term {
    match t {
        Term::App(f, args) if k > 0 => {
            Term::App(f.clone(), args.iter().map(|x| widen_term(x, k - 1, gen, memo)).collect::<Vec<_>>().into())
        }
        Term::App(..) => {
            let kind = if abs_ground(t) { Kind::Ground } else { Kind::Any };
            Term::Var(*memo.entry(t.clone()).or_insert_with(|| gen.fresh(kind)))
        }
        other => other.clone(),
    }
}

pub fn widen_conj(c: &[Conjunct], k: usize) -> Conj {
    let mut gen = AbsGen::for_conj(c);
    c.iter()
        .map(|x| match x {
            Conjunct::Atom(a) => Conjunct::Atom(widen_atom(a, k, &mut gen)),
            m => m.clone(),
        })
        .collect()
}

/// Converts a parsed term whose `a<i>`/`g<j>` atoms denote abstract variables.
pub fn abstractify(t: &Term) -> Result<Term> {
    match t {
        Term::Atom(s) => Ok(parse_var_name(s).map_or_else(|| t.clone(), Term::Var)),
        Term::Var(_) => Err(Error::Syntax { line: 0, col: 0, msg: "concrete variable in abstract term".into() }),
        Term::App(f, args) => {
            Ok(Term::App(f.clone(), args.iter().map(abstractify).collect::<Result<Vec<_>>>()?.into()))
        }
        other => Ok(other.clone()),
    }
}

pub fn parse_var_name(s: &str) -> Option<Var> {
    let kind = match s.as_bytes().first()? {
        b'a' => Kind::Any,
        b'g' => Kind::Ground,
        _ => return None,
    };
    let digits = &s[1..];
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    Some(avar(kind, digits.parse().ok()?))
}

pub fn parse_abs_term(text: &str) -> Result<Term> {
    abstractify(&parse_term(text)?.0)
}

pub fn parse_abs_atom(text: &str) -> Result<Atom> {
    Atom::from_term(&parse_abs_term(text)?).ok_or_else(|| Error::Syntax {
        line: 1,
        col: 1,
        msg: format!("not an atom: {text}"),
    })
}

/// Parses a conjunction of abstract atoms and multis (`perm(g1,a1), ord(a1)`).
/// `empty` denotes the empty conjunction.
pub fn parse_abs_conj(text: &str) -> Result<Conj> {
    let (t, _) = parse_term(text)?;
    if t == Term::atom("empty") {
        return Ok(vec![]);
    }
    flatten_conj(&t)
        .iter()
        .map(|x| {
            let x = abstractify(x)?;
            if let Some(m) = crate::multi::multi_from_term(&x) {
                return Ok(Conjunct::Multi(m));
            }
            Atom::from_term(&x).map(Conjunct::Atom).ok_or_else(|| Error::Syntax {
                line: 1,
                col: 1,
                msg: "conjunct must be an atom".into(),
            })
        })
        .collect()
}

pub fn show_term(t: &Term) -> String {
    Printer::abstract_vars().term(t)
}

pub fn show_atom(a: &Atom) -> String {
    Printer::abstract_vars().atom(a)
}

pub fn show_conj(c: &[Conjunct]) -> String {
    if c.is_empty() {
        return "empty".into();
    }
    c.iter()
        .map(|x| match x {
            Conjunct::Atom(a) => show_atom(a),
            Conjunct::Multi(m) => m.to_string(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}
