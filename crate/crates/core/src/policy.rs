//! Selection policies: the generating pairs of the atom order, quantified
//! rules over named atom sets, fully evaluated atom declarations, the
//! derived strict partial order and atom selection.

use std::collections::BTreeMap;
use std::fmt;

use crate::abs::{
    abstract_instance_atom, abstractify, canonical_atom, parse_abs_atom, show_atom, show_conj, strict_instance, AbsGen,
    Conj, Conjunct,
};
use crate::error::{Error, Result};
use crate::parser::{flatten_conj, Parser, Tok};
use crate::term::{Atom, PredKey, Subst, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkKind {
    Builtin,
    User,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullEvalDecl {
    /// `fullai<N>`, numbered in file order.
    pub id: String,
    pub pattern: Atom,
    /// Alternative output bindings over the pattern's variables and fresh ones.
    pub outputs: Vec<Subst>,
    pub link: LinkKind,
    pub pred: PredKey,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Nothing in the set precedes `target`; `target` precedes the rest.
    NeverBefore { target: Atom, set: String },
    /// Strict instances of set members precede every member.
    InstancesFirst { set: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Policy {
    pub entry: Conj,
    pub preprior: Vec<(Atom, Atom)>,
    pub sets: BTreeMap<String, Vec<Atom>>,
    pub rules: Vec<Rule>,
    pub fulleval: Vec<FullEvalDecl>,
}

fn abs_atom_of(t: &Term) -> Result<Atom> {
    let t = abstractify(t)?;
    Atom::from_term(&t).ok_or_else(|| Error::Policy(format!("not an atom: {}", crate::abs::show_term(&t))))
}

fn set_members(t: &Term) -> Result<Vec<Atom>> {
    match t {
        Term::Atom(c) if &**c == "{}" => Ok(vec![]),
        Term::App(c, xs) if &**c == "{}" && xs.len() == 1 => flatten_conj(&xs[0]).iter().map(abs_atom_of).collect(),
        _ => Err(Error::Policy("expected { ... }".into())),
    }
}

fn output_binding(t: &Term) -> Result<Subst> {
    let t = abstractify(t)?;
    let mut s = Subst::new();
    let pairs = match &t {
        Term::Atom(c) if &**c == "{}" => vec![],
        Term::App(c, xs) if &**c == "{}" && xs.len() == 1 => flatten_conj(&xs[0]),
        _ => return Err(Error::Policy("expected an output binding { v=t, ... }".into())),
    };
    for p in pairs {
        match &p {
            Term::App(eq, xs) if &**eq == "=" && xs.len() == 2 => match &xs[0] {
                Term::Var(v) => {
                    s.bindings.insert(*v, xs[1].clone());
                }
                _ => return Err(Error::Policy("output binding must bind a variable".into())),
            },
            _ => return Err(Error::Policy("output binding entries have the form v=t".into())),
        }
    }
    Ok(s)
}

fn var_name(p: &Parser, t: &Term) -> Result<String> {
    match t {
        Term::Var(v) => {
            p.scope.names.get(v).map(|n| n.to_string()).ok_or_else(|| Error::Policy("anonymous set".into()))
        }
        Term::Atom(a) => Ok(a.to_string()),
        _ => Err(Error::Policy("expected a set name".into())),
    }
}

/// `name/arity`; symbolic names glue onto the slash when lexed.
fn pred_key(p: &mut Parser) -> Result<PredKey> {
    let name = match p.bump() {
        Tok::Op(s) if s.len() > 1 && s.ends_with('/') => s[..s.len() - 1].to_string(),
        Tok::Name(s) | Tok::Quoted(s) | Tok::Op(s) => {
            p.expect_op("/")?;
            s
        }
        _ => return Err(p.error("expected name/arity")),
    };
    match p.bump() {
        Tok::Int(k) if k >= 0 => Ok(PredKey::new(&name, k as usize)),
        _ => Err(p.error("expected name/arity")),
    }
}

impl Policy {
    pub fn parse(text: &str) -> Result<Policy> {
        let mut p = Parser::new(text)?;
        let mut pol = Policy::default();
        while !p.at_eof() {
            let kw = p.expect_name()?;
            match kw.as_str() {
                "entry" => {
                    p.expect_op(":")?;
                    let t = p.term(1200)?;
                    pol.entry =
                        flatten_conj(&t).iter().map(|x| abs_atom_of(x).map(Conjunct::Atom)).collect::<Result<_>>()?;
                }
                "preprior" => {
                    p.expect_op(":")?;
                    match p.term(1200)? {
                        Term::App(lt, xs) if &*lt == "<" && xs.len() == 2 => {
                            pol.preprior.push((abs_atom_of(&xs[0])?, abs_atom_of(&xs[1])?))
                        }
                        _ => return Err(p.error("preprior entries have the form A < B")),
                    }
                }
                "set" => {
                    let name = match p.bump() {
                        Tok::Var(n) | Tok::Name(n) => n,
                        _ => return Err(p.error("expected a set name")),
                    };
                    p.expect_op("=")?;
                    let t = p.term(999)?;
                    pol.sets.insert(name, set_members(&t)?);
                }
                "rule" => {
                    p.expect_op(":")?;
                    let t = p.term(999)?;
                    let rule = match &t {
                        Term::App(f, xs) if &**f == "never_before" && xs.len() == 1 => {
                            if !p.is_name("over") {
                                return Err(p.error("expected 'over'"));
                            }
                            p.bump();
                            let set = p.term(999)?;
                            Rule::NeverBefore { target: abs_atom_of(&xs[0])?, set: var_name(&p, &set)? }
                        }
                        Term::App(f, xs) if &**f == "instances_first" && xs.len() == 1 => {
                            Rule::InstancesFirst { set: var_name(&p, &xs[0])? }
                        }
                        _ => return Err(p.error("unknown rule")),
                    };
                    pol.rules.push(rule);
                }
                "fulleval" => {
                    p.expect_op(":")?;
                    let pattern = abs_atom_of(&p.term(1049)?)?;
                    p.expect_op("->")?;
                    let mut outputs = vec![output_binding(&p.term(999)?)?];
                    while p.is_punct("|") {
                        p.bump();
                        outputs.push(output_binding(&p.term(999)?)?);
                    }
                    if !p.is_name("via") {
                        return Err(p.error("expected 'via builtin|user name/arity'"));
                    }
                    p.bump();
                    let link = match p.expect_name()?.as_str() {
                        "builtin" => LinkKind::Builtin,
                        "user" => LinkKind::User,
                        _ => return Err(p.error("expected 'builtin' or 'user'")),
                    };
                    let pred = pred_key(&mut p)?;
                    if pred != pattern.key() {
                        return Err(Error::Policy(format!("fulleval pattern {} is not {pred}", show_atom(&pattern))));
                    }
                    let id = format!("fullai{}", pol.fulleval.len() + 1);
                    pol.fulleval.push(FullEvalDecl { id, pattern, outputs, link, pred });
                }
                other => return Err(p.error(format!("unknown directive '{other}'"))),
            }
            p.expect_end()?;
        }
        if pol.entry.is_empty() {
            return Err(Error::Policy("missing entry".into()));
        }
        for r in &pol.rules {
            let set = match r {
                Rule::NeverBefore { set, .. } | Rule::InstancesFirst { set } => set,
            };
            if !pol.sets.contains_key(set) {
                return Err(Error::Policy(format!("rule refers to undefined set {set}")));
            }
        }
        pol.derive_order(&[])?;
        Ok(pol)
    }

    /// The first declaration whose pattern the atom instantiates.
    pub fn fulleval_for(&self, a: &Atom) -> Option<(usize, Subst)> {
        self.fulleval.iter().enumerate().find_map(|(i, d)| abstract_instance_atom(a, &d.pattern).map(|th| (i, th)))
    }

    /// Successor substitutions of fully evaluating `a` under declaration `d`,
    /// renamed into `gen`'s variable space.
    pub fn fulleval_outputs(&self, a: &Atom, gen: &mut AbsGen) -> Result<(usize, Vec<Subst>)> {
        let (i, theta) = self.fulleval_for(a).ok_or_else(|| {
            Error::Analysis(format!("{} is not an instance of any fully evaluated pattern", show_atom(a)))
        })?;
        let d = &self.fulleval[i];
        let mut outs = Vec::new();
        for o in &d.outputs {
            let mut fresh: BTreeMap<Var, Var> = BTreeMap::new();
            let mut rename = |t: &Term, gen: &mut AbsGen| {
                t.map_vars(&mut |v| match theta.get(v) {
                    Some(img) => img.clone(),
                    None => Term::Var(*fresh.entry(v).or_insert_with(|| gen.fresh(crate::abs::kind_of(v)))),
                })
            };
            let (mut lhs, mut rhs) = (vec![], vec![]);
            for (v, t) in &o.bindings {
                lhs.push(rename(&Term::Var(*v), gen));
                rhs.push(rename(t, gen));
            }
            if lhs.is_empty() {
                outs.push(Subst::new());
                continue;
            }
            let s = crate::abs::abstract_unify(&Term::app("eq", lhs), &Term::app("eq", rhs), gen).ok_or_else(|| {
                Error::Analysis(format!("output binding of {} does not apply to {}", d.id, show_atom(a)))
            })?;
            outs.push(s);
        }
        Ok((i, outs))
    }

    /// Strict order over the canonical forms of `atoms` plus every atom the
    /// policy mentions.
    #[allow(clippy::needless_range_loop)]
    pub fn derive_order(&self, atoms: &[Atom]) -> Result<Order> {
        let mut universe: Vec<Atom> = Vec::new();
        let mut add = |a: &Atom| {
            let c = canonical_atom(a);
            if !universe.contains(&c) {
                universe.push(c);
            }
        };
        atoms.iter().for_each(&mut add);
        for (x, y) in &self.preprior {
            add(x);
            add(y);
        }
        self.sets.values().flatten().for_each(&mut add);
        if let Some(t) = self.rules.iter().find_map(|r| match r {
            Rule::NeverBefore { target, .. } => Some(target),
            _ => None,
        }) {
            add(t);
        }
        let n = universe.len();
        let idx = |a: &Atom| universe.iter().position(|u| *u == canonical_atom(a));
        let mut edge = vec![vec![false; n]; n];
        let mut why: BTreeMap<(usize, usize), &'static str> = BTreeMap::new();
        let mut put = |edge: &mut Vec<Vec<bool>>, i: usize, j: usize, reason: &'static str| {
            if !edge[i][j] {
                edge[i][j] = true;
                why.insert((i, j), reason);
            }
        };
        for (x, y) in &self.preprior {
            put(&mut edge, idx(x).unwrap(), idx(y).unwrap(), "preprior");
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && strict_instance(&universe[i], &universe[j]) {
                    put(&mut edge, i, j, "instance");
                }
            }
        }
        for r in &self.rules {
            match r {
                Rule::NeverBefore { target, set } => {
                    let t = idx(target).unwrap();
                    for m in &self.sets[set] {
                        let j = idx(m).unwrap();
                        if j != t {
                            put(&mut edge, t, j, "never_before");
                        }
                    }
                }
                Rule::InstancesFirst { set } => {
                    let members: Vec<usize> = self.sets[set].iter().map(|m| idx(m).unwrap()).collect();
                    for i in 0..n {
                        if self.sets[set].iter().any(|m| strict_instance(&universe[i], m)) {
                            for &j in &members {
                                if j != i {
                                    put(&mut edge, i, j, "instances_first");
                                }
                            }
                        }
                    }
                }
            }
        }
        let fe: Vec<bool> = universe.iter().map(|a| self.fulleval_for(a).is_some()).collect();
        for i in 0..n {
            for j in 0..n {
                if fe[i] && !fe[j] {
                    put(&mut edge, i, j, "fulleval");
                }
            }
        }
        let direct = edge.clone();
        let mut lt = edge;
        for k in 0..n {
            for i in 0..n {
                if lt[i][k] {
                    for j in 0..n {
                        if lt[k][j] {
                            lt[i][j] = true;
                        }
                    }
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| lt[i][i]) {
            let chain = cycle_through(&direct, i);
            let text = chain.iter().map(|&k| show_atom(&universe[k])).collect::<Vec<_>>().join(" < ");
            return Err(Error::Policy(format!("cyclic order: {text}")));
        }
        Ok(Order { universe, lt })
    }

    /// Picks the atom to select in `c`.
    pub fn select(&self, c: &[Conjunct]) -> Result<Selection> {
        let mut gen = AbsGen::for_conj(c);
        let mut view: Vec<(usize, Atom)> = Vec::new();
        for (i, x) in c.iter().enumerate() {
            match x {
                Conjunct::Atom(a) => view.push((i, a.clone())),
                Conjunct::Multi(m) => {
                    let (head, _, _) =
                        m.split_many(&mut gen).ok_or_else(|| Error::Analysis(format!("inconsistent multi {m}")))?;
                    view.extend(head.into_iter().map(|a| (i, a)));
                }
            }
        }
        if view.is_empty() {
            return Err(Error::Analysis("nothing to select in the empty conjunction".into()));
        }
        let mark = |i: usize, fe: Option<usize>| match (&c[i], fe) {
            (Conjunct::Multi(_), _) => Mark::Split,
            (_, Some(d)) => Mark::FullEval(d),
            (_, None) => Mark::Unfold,
        };
        if let Some((i, a)) = view.iter().find(|(_, a)| self.fulleval_for(a).is_some()) {
            let d = self.fulleval_for(a).map(|x| x.0);
            return Ok(Selection { index: *i, mark: mark(*i, d) });
        }
        let atoms: Vec<Atom> = view.iter().map(|(_, a)| a.clone()).collect();
        let order = self.derive_order(&atoms)?;
        let canon: Vec<Atom> = atoms.iter().map(canonical_atom).collect();
        for (k, b) in canon.iter().enumerate() {
            if canon.iter().all(|other| other == b || order.less(b, other)) {
                return Ok(Selection { index: view[k].0, mark: mark(view[k].0, None) });
            }
        }
        Err(Error::Completeness(format!("no minimal atom in {}", show_conj(c))))
    }

    pub fn is_complete<'a>(&self, states: impl IntoIterator<Item = &'a Conj>) -> std::result::Result<(), Conj> {
        for s in states {
            if !s.is_empty() && self.select(s).is_err() {
                return Err(s.clone());
            }
        }
        Ok(())
    }
}

fn cycle_through(edge: &[Vec<bool>], start: usize) -> Vec<usize> {
    let n = edge.len();
    let mut prev = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::from([start]);
    let mut seen = vec![false; n];
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if edge[u][v] {
                if v == start {
                    let mut path = vec![start];
                    let mut cur = u;
                    while cur != start {
                        path.push(cur);
                        cur = prev[cur];
                    }
                    path.push(start);
                    let last = path.len() - 1;
                    path[1..last].reverse();
                    return path;
                }
                if !seen[v] {
                    seen[v] = true;
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
    }
    vec![start, start]
}

/// A derived strict partial order over canonical atoms.
#[derive(Clone, Debug)]
pub struct Order {
    pub universe: Vec<Atom>,
    lt: Vec<Vec<bool>>,
}

impl Order {
    pub fn less(&self, x: &Atom, y: &Atom) -> bool {
        let (cx, cy) = (canonical_atom(x), canonical_atom(y));
        match (self.universe.iter().position(|u| *u == cx), self.universe.iter().position(|u| *u == cy)) {
            (Some(i), Some(j)) => self.lt[i][j],
            _ => false,
        }
    }

    pub fn pairs(&self) -> Vec<(Atom, Atom)> {
        let n = self.universe.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.lt[i][j] {
                    out.push((self.universe[i].clone(), self.universe[j].clone()));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Unfold,
    /// Index into the policy's fulleval declarations.
    FullEval(usize),
    /// The selected atom is the first instance of a multi.
    Split,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selection {
    pub index: usize,
    pub mark: Mark,
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mark::Unfold => f.write_str("unfold"),
            Mark::FullEval(_) => f.write_str("fulleval"),
            Mark::Split => f.write_str("split"),
        }
    }
}

/// Parses a single abstract atom (helper for tests and the CLI).
pub fn atom(text: &str) -> Atom {
    parse_abs_atom(text).expect("abstract atom")
}
