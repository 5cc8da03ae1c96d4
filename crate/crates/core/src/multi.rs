//! Multi abstractions: one or more aliased repetitions of a conjunctive
//! pattern, with case split, expansion, membership and the generalization
//! that folds repeated conjuncts into a multi.
//!
//! Pattern variables live in a local namespace. `init` ties slot-1 pattern
//! variables to outer terms, `consec` ties a slot-(i+1) variable to a
//! slot-i variable, and `fin` ties slot-n variables to outer terms.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abs::{
    abstract_unify, canonical, conj_vars, gamma_match, kind_of, show_atom, show_term, AbsGen, Conj, Conjunct, Renumber,
};
use crate::term::{Atom, Subst, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multi {
    pub id: u32,
    pub pattern: Vec<Atom>,
    pub init: Vec<(Var, Term)>,
    pub consec: Vec<(Var, Var)>,
    pub fin: Vec<(Var, Term)>,
}

pub const CMULTI: &str = "cmulti";
pub const BUILDING_BLOCK: &str = "building_block";

impl Multi {
    pub fn outer_terms(&self) -> Vec<Term> {
        self.init.iter().chain(self.fin.iter()).map(|(_, t)| t.clone()).collect()
    }

    pub fn map_outer(&self, f: &mut impl FnMut(&Term) -> Term) -> Multi {
        Multi {
            init: self.init.iter().map(|(l, t)| (*l, f(t))).collect(),
            fin: self.fin.iter().map(|(l, t)| (*l, f(t))).collect(),
            ..self.clone()
        }
    }

    pub fn apply_outer(&self, s: &Subst) -> Multi {
        self.map_outer(&mut |t| s.apply(t))
    }

    pub fn locals(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for a in &self.pattern {
            a.args.iter().for_each(|t| t.collect_vars(&mut out));
        }
        out
    }

    /// Pattern variables renumbered in first-occurrence order; constraints sorted.
    pub fn canonical_local(&self) -> Multi {
        let mut r = Renumber::default();
        let pattern: Vec<Atom> = self.pattern.iter().map(|a| r.atom(a)).collect();
        let mut init: Vec<(Var, Term)> = self.init.iter().map(|(l, t)| (r.var(*l), t.clone())).collect();
        let mut consec: Vec<(Var, Var)> = self.consec.iter().map(|(n, p)| (r.var(*n), r.var(*p))).collect();
        let mut fin: Vec<(Var, Term)> = self.fin.iter().map(|(l, t)| (r.var(*l), t.clone())).collect();
        init.sort_by_key(|x| x.0);
        consec.sort();
        consec.dedup();
        fin.sort_by_key(|x| x.0);
        Multi { id: self.id, pattern, init, consec, fin }
    }

    fn copy_map(&self, gen: &mut AbsGen) -> HashMap<Var, Var> {
        self.locals().into_iter().map(|l| (l, gen.fresh(kind_of(l)))).collect()
    }

    fn rename(&self, map: &HashMap<Var, Var>) -> Vec<Atom> {
        self.pattern.iter().map(|a| a.map_terms(|t| t.map_vars(&mut |v| Term::Var(map[&v])))).collect()
    }

    /// The conjunction of `n ≥ 1` linked instances, and the substitution the
    /// constraints impose on outer variables.
    pub fn expand(&self, n: usize, gen: &mut AbsGen) -> Option<(Vec<Atom>, Subst)> {
        assert!(n >= 1);
        let copies: Vec<HashMap<Var, Var>> = (0..n).map(|_| self.copy_map(gen)).collect();
        let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
        for (l, t) in &self.init {
            lhs.push(Term::Var(copies[0][l]));
            rhs.push(t.clone());
        }
        for j in 0..n - 1 {
            for (next, prev) in &self.consec {
                lhs.push(Term::Var(copies[j + 1][next]));
                rhs.push(Term::Var(copies[j][prev]));
            }
        }
        for (l, t) in &self.fin {
            lhs.push(Term::Var(copies[n - 1][l]));
            rhs.push(t.clone());
        }
        let s = unify_lists(lhs, rhs, gen)?;
        let atoms = copies.iter().flat_map(|c| self.rename(c)).map(|a| s.apply_atom(&a)).collect();
        Some((atoms, s.restrict(&outer_vars(self))))
    }

    /// `one`: a single instance carrying both init and final constraints.
    pub fn split_one(&self, gen: &mut AbsGen) -> Option<(Vec<Atom>, Subst)> {
        self.expand(1, gen)
    }

    /// `many`: the first instance plus a residual multi for the rest.
    pub fn split_many(&self, gen: &mut AbsGen) -> Option<(Vec<Atom>, Multi, Subst)> {
        let copy = self.copy_map(gen);
        let lhs = self.init.iter().map(|(l, _)| Term::Var(copy[l])).collect();
        let rhs = self.init.iter().map(|(_, t)| t.clone()).collect();
        let s = unify_lists(lhs, rhs, gen)?;
        let head = self.rename(&copy).iter().map(|a| s.apply_atom(a)).collect();
        let rest = Multi {
            id: self.id,
            pattern: self.pattern.clone(),
            init: self.consec.iter().map(|(next, prev)| (*next, s.apply(&Term::Var(copy[prev])))).collect(),
            consec: self.consec.clone(),
            fin: self.fin.iter().map(|(l, t)| (*l, s.apply(t))).collect(),
        };
        Some((head, rest, s.restrict(&outer_vars(self))))
    }
}

fn outer_vars(m: &Multi) -> Vec<Var> {
    let mut vs = Vec::new();
    m.outer_terms().iter().for_each(|t| t.collect_vars(&mut vs));
    vs
}

fn unify_lists(lhs: Vec<Term>, rhs: Vec<Term>, gen: &mut AbsGen) -> Option<Subst> {
    if lhs.is_empty() {
        return Some(Subst::new());
    }
    abstract_unify(&Term::app("eq", lhs), &Term::app("eq", rhs), gen)
}

fn show_pairs<T, U>(pairs: &[(T, U)], l: impl Fn(&T) -> String, r: impl Fn(&U) -> String) -> String {
    pairs.iter().map(|(x, y)| format!("{}={}", l(x), r(y))).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Multi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pat = self.pattern.iter().map(show_atom).collect::<Vec<_>>().join(", ");
        let pat = if self.pattern.len() > 1 { format!("({pat})") } else { pat };
        let v = |v: &Var| crate::abs::var_name(*v);
        write!(
            f,
            "multi({}, init{{{}}}, consec{{{}}}, final{{{}}}, id={})",
            pat,
            show_pairs(&self.init, v, show_term),
            show_pairs(&self.consec, v, v),
            show_pairs(&self.fin, v, show_term),
            self.id
        )
    }
}

/// Parses the textual multi form produced by `Display`.
pub fn multi_from_term(t: &Term) -> Option<Multi> {
    let args = match t {
        Term::App(f, args) if &**f == "multi" && args.len() == 5 => args,
        _ => return None,
    };
    let pattern = crate::parser::flatten_conj(&args[0]).iter().map(Atom::from_term).collect::<Option<Vec<_>>>()?;
    let pairs = |t: &Term, name: &str| -> Option<Vec<(Term, Term)>> {
        match t {
            Term::App(f, xs) if &**f == name && xs.len() == 1 => match &xs[0] {
                Term::Atom(c) if &**c == "{}" => Some(vec![]),
                Term::App(c, ys) if &**c == "{}" => crate::parser::flatten_conj(&ys[0])
                    .iter()
                    .map(|e| match e {
                        Term::App(eq, zs) if &**eq == "=" && zs.len() == 2 => Some((zs[0].clone(), zs[1].clone())),
                        _ => None,
                    })
                    .collect(),
                _ => None,
            },
            _ => None,
        }
    };
    let var = |t: &Term| match t {
        Term::Var(v) => Some(*v),
        _ => None,
    };
    let init = pairs(&args[1], "init")?.into_iter().map(|(l, r)| Some((var(&l)?, r))).collect::<Option<_>>()?;
    let consec =
        pairs(&args[2], "consec")?.into_iter().map(|(l, r)| Some((var(&l)?, var(&r)?))).collect::<Option<_>>()?;
    let fin = pairs(&args[3], "final")?.into_iter().map(|(l, r)| Some((var(&l)?, r))).collect::<Option<_>>()?;
    let id = match &args[4] {
        Term::App(eq, xs) if &**eq == "=" && xs.len() == 2 => match (&xs[0], &xs[1]) {
            (Term::Atom(k), Term::Int(i)) if &**k == "id" => *i as u32,
            _ => return None,
        },
        _ => return None,
    };
    Some(Multi { id, pattern, init, consec, fin })
}

/// One range of a grouping: a block of plain goal positions `[start, end)`
/// or an existing cmulti at `start` whose blocks are spliced in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Range {
    Block(usize, usize),
    Existing(usize),
}

impl Range {
    pub fn start(&self) -> usize {
        match self {
            Range::Block(s, _) | Range::Existing(s) => *s,
        }
    }
    pub fn end(&self) -> usize {
        match self {
            Range::Block(_, e) => *e,
            Range::Existing(s) => s + 1,
        }
    }
}

/// Contiguous ranges folded into one cmulti.
pub type Group = Vec<Range>;

/// Replaces the conjunct at `pos` (a multi) by the expansion at `n`.
pub fn expand_at(c: &[Conjunct], pos: usize, n: usize) -> Option<Conj> {
    let Conjunct::Multi(m) = &c[pos] else { return None };
    let mut gen = AbsGen::for_conj(c);
    let (atoms, s) = m.expand(n, &mut gen)?;
    let mut out: Conj = c[..pos].iter().map(|x| x.apply(&s)).collect();
    out.extend(atoms.into_iter().map(Conjunct::Atom));
    out.extend(c[pos + 1..].iter().map(|x| x.apply(&s)));
    Some(out)
}

fn same(x: &[Conjunct], y: &[Conjunct]) -> bool {
    canonical(x) == canonical(y)
}

fn block_atoms(c: &[Conjunct], start: usize, len: usize) -> Option<Vec<Atom>> {
    c.get(start..start + len)?.iter().map(|x| x.as_atom().cloned()).collect()
}

/// Variable renaming ρ with ρ(pattern) = block, when the block is a variant.
fn variant_map(pattern: &[Atom], block: &[Atom]) -> Option<HashMap<Var, Var>> {
    if pattern.len() != block.len() {
        return None;
    }
    let p = Term::app("c", pattern.iter().map(Atom::to_term).collect());
    let b = Term::app("c", block.iter().map(Atom::to_term).collect());
    let mut m = Subst::new();
    if !crate::term::match_term(&p, &b, &mut m) {
        return None;
    }
    let mut out = HashMap::new();
    let mut seen = Vec::new();
    for (v, t) in &m.bindings {
        match t {
            Term::Var(w) if kind_of(*v) == kind_of(*w) && !seen.contains(w) => {
                seen.push(*w);
                out.insert(*v, *w);
            }
            _ => return None,
        }
    }
    Some(out)
}

fn vars_of_atoms(atoms: &[Atom]) -> Vec<Var> {
    let mut vs = Vec::new();
    atoms.iter().for_each(|a| a.args.iter().for_each(|t| t.collect_vars(&mut vs)));
    vs
}

fn local_pattern(block: &[Atom]) -> Vec<Atom> {
    let mut r = Renumber::default();
    block.iter().map(|a| r.atom(a)).collect()
}

fn next_id(c: &[Conjunct]) -> u32 {
    c.iter()
        .filter_map(|x| match x {
            Conjunct::Multi(m) => Some(m.id),
            _ => None,
        })
        .max()
        .unwrap_or(0)
        + 1
}

/// Tries to fold `k ≥ 2` adjacent variant blocks starting at `start`.
fn try_chain(c: &[Conjunct], start: usize, len: usize, k: usize) -> Option<(Conj, Group)> {
    let blocks: Vec<Vec<Atom>> = (0..k).map(|j| block_atoms(c, start + j * len, len)).collect::<Option<_>>()?;
    let pattern = local_pattern(&blocks[0]);
    let maps: Vec<HashMap<Var, Var>> = blocks.iter().map(|b| variant_map(&pattern, b)).collect::<Option<_>>()?;
    let locals = vars_of_atoms(&pattern);
    let mut consec = Vec::new();
    for next in &locals {
        for prev in &locals {
            if maps[1][next] == maps[0][prev] {
                consec.push((*next, *prev));
            }
        }
    }
    if consec.is_empty() {
        return None;
    }
    let end = start + k * len;
    let outside: Vec<Var> = conj_vars(&[&c[..start], &c[end..]].concat());
    // the chain may touch the rest of the conjunction only through its ends
    let is_next = |l: &Var| consec.iter().any(|(n, _)| n == l);
    let is_prev = |l: &Var| consec.iter().any(|(_, p)| p == l);
    if locals.iter().any(|l| outside.contains(&maps[0][l]) && !is_next(l))
        || locals.iter().any(|l| outside.contains(&maps[k - 1][l]) && !is_prev(l))
    {
        return None;
    }
    let init: Vec<(Var, Term)> = locals.iter().filter(|l| is_next(l)).map(|l| (*l, Term::Var(maps[0][l]))).collect();
    let fin: Vec<(Var, Term)> = locals.iter().filter(|l| is_prev(l)).map(|l| (*l, Term::Var(maps[k - 1][l]))).collect();
    let m = Multi { id: next_id(c), pattern, init, consec, fin };
    let mut out: Conj = c[..start].to_vec();
    out.push(Conjunct::Multi(m));
    out.extend_from_slice(&c[end..]);
    let expanded = expand_at(&out, start, k)?;
    if !same(&expanded, c) {
        return None;
    }
    let group = (0..k).map(|j| Range::Block(start + j * len, start + (j + 1) * len)).collect();
    Some((out, group))
}

/// Tries to fold the block right after (or before) the multi at `pos`.
fn try_fold(c: &[Conjunct], pos: usize, after: bool) -> Option<(Conj, Group)> {
    let Conjunct::Multi(m) = &c[pos] else { return None };
    let len = m.pattern.len();
    let bstart = if after { pos + 1 } else { pos.checked_sub(len)? };
    let block = block_atoms(c, bstart, len)?;
    let rho = variant_map(&m.pattern, &block)?;
    let (lo, hi) = if after { (pos, bstart + len) } else { (bstart, pos + 1) };
    let outside: Vec<Var> = conj_vars(&[&c[..lo], &c[hi..]].concat());
    let locals = m.locals();
    let link = |l: &Var| m.consec.iter().any(|(n, p)| if after { p == l } else { n == l });
    if locals.iter().any(|l| outside.contains(&rho[l]) && !link(l)) {
        return None;
    }
    let linked: Vec<(Var, Term)> = locals.iter().filter(|l| link(l)).map(|l| (*l, Term::Var(rho[l]))).collect();
    let folded = if after { Multi { fin: linked, ..m.clone() } } else { Multi { init: linked, ..m.clone() } };
    let mut out: Conj = c[..lo].to_vec();
    out.push(Conjunct::Multi(folded));
    out.extend_from_slice(&c[hi..]);
    for n in 1..=2 {
        let pre = expand_at(c, pos, n)?;
        let post = expand_at(&out, lo, n + 1)?;
        if !same(&pre, &post) {
            return None;
        }
    }
    let group = if after {
        vec![Range::Existing(pos), Range::Block(bstart, bstart + len)]
    } else {
        vec![Range::Block(bstart, bstart + len), Range::Existing(pos)]
    };
    Some((out, group))
}

/// Tries to merge the adjacent multis at `pos` and `pos + 1`.
fn try_merge(c: &[Conjunct], pos: usize) -> Option<(Conj, Group)> {
    let (Conjunct::Multi(m1), Some(Conjunct::Multi(m2))) = (&c[pos], c.get(pos + 1)) else { return None };
    let (l1, l2) = (m1.canonical_local(), m2.canonical_local());
    if l1.pattern != l2.pattern || l1.consec != l2.consec {
        return None;
    }
    let merged = Multi {
        id: m1.id,
        pattern: l1.pattern.clone(),
        init: l1.init.clone(),
        consec: l1.consec.clone(),
        fin: l2.fin.clone(),
    };
    let mut out: Conj = c[..pos].to_vec();
    out.push(Conjunct::Multi(merged));
    out.extend_from_slice(&c[pos + 2..]);
    for (n1, n2) in [(1, 1), (1, 2), (2, 1)] {
        let pre = expand_at(&expand_at(c, pos + 1, n2)?, pos, n1)?;
        let post = expand_at(&out, pos, n1 + n2)?;
        if !same(&pre, &post) {
            return None;
        }
    }
    Some((out, vec![Range::Existing(pos), Range::Existing(pos + 1)]))
}

/// One generalization step, or `None` when nothing folds.
pub fn generalize_step(c: &[Conjunct]) -> Option<(Conj, Group)> {
    for pos in 0..c.len() {
        if matches!(c[pos], Conjunct::Multi(_)) {
            if let Some(r) = try_merge(c, pos).or_else(|| try_fold(c, pos, true)).or_else(|| try_fold(c, pos, false)) {
                return Some(r);
            }
        }
    }
    for start in 0..c.len() {
        for len in 1..=3 {
            let mut k = 0;
            while start + (k + 1) * len <= c.len() && block_atoms(c, start + k * len, len).is_some() {
                let first = local_pattern(&block_atoms(c, start, len)?);
                if local_pattern(&block_atoms(c, start + k * len, len)?) != first {
                    break;
                }
                k += 1;
            }
            for kk in (2..=k).rev() {
                if let Some(r) = try_chain(c, start, len, kk) {
                    return Some(r);
                }
            }
        }
    }
    None
}

/// Repeats [`generalize_step`] to a fixpoint; groups apply in order.
pub fn generalize_to_multi(c: &[Conjunct]) -> (Conj, Vec<Group>) {
    let mut cur = c.to_vec();
    let mut groups = Vec::new();
    while let Some((next, g)) = generalize_step(&cur) {
        cur = next;
        groups.push(g);
    }
    (cur, groups)
}

/// Applies grouping ranges to a concrete goal, producing a cmulti term.
pub fn apply_group(goal: &[Term], group: &Group) -> Option<Vec<Term>> {
    let first = group.first()?.start();
    let last = group.last()?.end();
    if last > goal.len() {
        return None;
    }
    let mut blocks = Vec::new();
    let mut at = first;
    for r in group {
        if r.start() != at {
            return None;
        }
        match r {
            Range::Block(s, e) => {
                if e <= s {
                    return None;
                }
                blocks.push(Term::app(BUILDING_BLOCK, vec![Term::list(goal[*s..*e].to_vec())]));
            }
            Range::Existing(s) => blocks.extend(cmulti_blocks(&goal[*s])?),
        }
        at = r.end();
    }
    let mut out = goal[..first].to_vec();
    out.push(Term::app(CMULTI, vec![Term::list(blocks)]));
    out.extend_from_slice(&goal[last..]);
    Some(out)
}

pub fn apply_groupings(goal: &[Term], groups: &[Group]) -> Option<Vec<Term>> {
    groups.iter().try_fold(goal.to_vec(), |g, grp| apply_group(&g, grp))
}

/// The `building_block(...)` terms of a `cmulti([...])` goal element.
pub fn cmulti_blocks(t: &Term) -> Option<Vec<Term>> {
    match t {
        Term::App(f, args) if &**f == CMULTI && args.len() == 1 => args[0].as_list(),
        _ => None,
    }
}

pub fn block_goals(block: &Term) -> Option<Vec<Term>> {
    match block {
        Term::App(f, args) if &**f == BUILDING_BLOCK && args.len() == 1 => args[0].as_list(),
        _ => None,
    }
}

/// Erases all cmulti wrappers.
pub fn flatten_goal(goal: &[Term]) -> Vec<Term> {
    let mut out = Vec::new();
    for t in goal {
        match cmulti_blocks(t) {
            Some(blocks) => {
                for b in blocks {
                    out.extend(flatten_goal(&block_goals(&b).unwrap_or_default()));
                }
            }
            None => out.push(t.clone()),
        }
    }
    out
}

/// Concrete goal membership in γ(state). Cmulti goal elements must line up
/// with multi conjuncts; plain atoms may also instantiate a multi.
pub fn gamma_member_goal(goal: &[Term], state: &[Conjunct]) -> bool {
    member_from(goal.to_vec(), state.to_vec(), 0)
}

fn member_from(goal: Vec<Term>, state: Conj, from: usize) -> bool {
    let Some(j) = (from..state.len()).find(|&i| matches!(state[i], Conjunct::Multi(_))) else {
        return goal.len() == state.len() && match_all(&goal, &state);
    };
    let Conjunct::Multi(m) = &state[j] else { unreachable!() };
    let len = m.pattern.len();
    if j > goal.len() {
        return false;
    }
    if let Some(blocks) = goal.get(j).and_then(cmulti_blocks) {
        let mut flat = Vec::new();
        for b in &blocks {
            match block_goals(b) {
                Some(gs) if gs.len() == len => flat.extend(gs),
                _ => return false,
            }
        }
        let mut goal2 = goal[..j].to_vec();
        goal2.extend(flat);
        goal2.extend_from_slice(&goal[j + 1..]);
        return expand_at(&state, j, blocks.len()).is_some_and(|st| member_from(goal2, st, j + blocks.len() * len));
    }
    let room = goal.len().saturating_sub(j);
    (1..=room / len.max(1))
        .any(|n| expand_at(&state, j, n).is_some_and(|st| member_from(goal.clone(), st, j + n * len)))
}

fn match_all(goal: &[Term], state: &[Conjunct]) -> bool {
    let mut m = Subst::new();
    goal.iter().zip(state).all(|(g, s)| match s {
        Conjunct::Atom(a) => cmulti_blocks(g).is_none() && gamma_match(g, &a.to_term(), &mut m),
        Conjunct::Multi(_) => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abs::{a, g, parse_abs_conj, show_conj};

    /// The filter multi: multi(filter(g1,a1,a2), init{a1=a1}, consec{a1=a2}, final{a2=a2}).
    fn filter_multi() -> Multi {
        Multi {
            id: 1,
            pattern: vec![Atom::new("filter", vec![g(1), a(1), a(2)])],
            init: vec![(crate::abs::avar(crate::abs::Kind::Any, 1), a(1))],
            consec: vec![(crate::abs::avar(crate::abs::Kind::Any, 1), crate::abs::avar(crate::abs::Kind::Any, 2))],
            fin: vec![(crate::abs::avar(crate::abs::Kind::Any, 2), a(2))],
        }
    }

    #[test]
    fn split_one_and_many() {
        let m = filter_multi();
        let mut gen = AbsGen::above(&[crate::abs::avar(crate::abs::Kind::Any, 2)]);
        let (one, s) = m.split_one(&mut gen).unwrap();
        assert!(s.is_empty());
        assert_eq!(show_conj(&canonical(&crate::abs::atoms_conj(one))), "filter(g1,a1,a2)");
        let (head, rest, _) = m.split_many(&mut gen).unwrap();
        let mut conj = crate::abs::atoms_conj(head);
        conj.push(Conjunct::Multi(rest));
        let expanded = expand_at(&conj, 1, 1).unwrap();
        assert_eq!(show_conj(&canonical(&expanded)), "filter(g1,a1,a2), filter(g2,a2,a3)");
    }

    #[test]
    fn chain_generalizes_to_filter_multi() {
        let c = parse_abs_conj("filter(g1,a1,a3), filter(g2,a3,a2)").unwrap();
        let (out, groups) = generalize_to_multi(&c);
        assert_eq!(out.len(), 1);
        assert_eq!(groups, vec![vec![Range::Block(0, 1), Range::Block(1, 2)]]);
        let Conjunct::Multi(m) = &canonical(&out)[0] else { panic!() };
        assert_eq!(m.to_string(), "multi(filter(g1,a1,a2), init{a1=a1}, consec{a1=a2}, final{a2=a2}, id=1)");
    }

    #[test]
    fn unrelated_atoms_stay() {
        let c = parse_abs_conj("p(a1), q(a2)").unwrap();
        assert_eq!(generalize_to_multi(&c).0, c);
        let c2 = parse_abs_conj("p(a1), p(a2)").unwrap();
        assert_eq!(generalize_to_multi(&c2).0, c2);
    }

    #[test]
    fn adjacent_atom_folds_into_multi() {
        let m = filter_multi();
        let mut c = parse_abs_conj("sift(a3,a4)").unwrap();
        c.insert(0, Conjunct::Multi(m.map_outer(&mut |t| if *t == a(2) { a(5) } else { t.clone() })));
        c.insert(1, Conjunct::Atom(Atom::new("filter", vec![g(1), a(5), a(3)])));
        let (out, groups) = generalize_to_multi(&c);
        assert_eq!(groups, vec![vec![Range::Existing(0), Range::Block(1, 2)]]);
        assert_eq!(
            show_conj(&canonical(&out)),
            "multi(filter(g1,a1,a2), init{a1=a1}, consec{a1=a2}, final{a2=a2}, id=1), sift(a2,a3)"
        );
    }

    #[test]
    fn grouping_positions() {
        let t = |s: &str| Term::atom(s);
        let goal = vec![t("s"), t("f1"), t("f2"), t("l")];
        let out = apply_group(&goal, &vec![Range::Block(1, 2), Range::Block(2, 3)]).unwrap();
        assert_eq!(
            crate::parser::print_term(&Term::list(out.clone())),
            "[s,cmulti([building_block([f1]),building_block([f2])]),l]"
        );
        assert_eq!(apply_groupings(&goal, &[]).unwrap(), goal);
        let again = apply_group(&[out[1].clone(), t("f3")], &vec![Range::Existing(0), Range::Block(1, 2)]).unwrap();
        assert_eq!(flatten_goal(&again), vec![t("f1"), t("f2"), t("f3")]);
        assert!(apply_group(&goal, &vec![Range::Block(3, 5)]).is_none());
    }

    #[test]
    fn concrete_membership() {
        let c = |s: &str| crate::parser::parse_query(s).unwrap().0.iter().map(Atom::to_term).collect::<Vec<_>>();
        let st = vec![Conjunct::Multi(filter_multi())];
        assert!(gamma_member_goal(&c("filter(2,L0,L1), filter(3,L1,L2)"), &st));
        assert!(!gamma_member_goal(&c("filter(2,L0,L1), filter(3,L9,L2)"), &st));
        assert!(gamma_member_goal(&c("filter(2,L0,L2)"), &st));
        let grouped =
            apply_group(&c("filter(2,L0,L1), filter(3,L1,L2)"), &vec![Range::Block(0, 1), Range::Block(1, 2)]).unwrap();
        assert!(gamma_member_goal(&grouped, &st));
    }

    #[test]
    fn text_form_round_trips() {
        let m = filter_multi();
        let t = crate::abs::parse_abs_term(&m.to_string()).unwrap();
        assert_eq!(multi_from_term(&t).unwrap(), m);
    }
}
