//! The analysis phase: a breadth-first worklist over canonical abstract
//! conjunctions that records, per state, the selected atom and every
//! transition, producing a finite state graph and the control tables.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::abs::{apply_conj, canonical, parse_abs_conj, show_atom, show_conj, widen_conj, AbsGen, Conj, Conjunct};
use crate::builtins::is_builtin;
use crate::engine::Cause;
use crate::error::{Error, Result};
use crate::multi::{generalize_to_multi, Group, Range};
use crate::policy::{LinkKind, Mark, Policy, Selection};
use crate::term::{Atom, PredKey, Program};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Options {
    /// Widen successors to this term depth.
    pub depth_k: Option<usize>,
    pub max_states: usize,
    /// Fold repeated patterns into multi abstractions.
    pub multi: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { depth_k: None, max_states: 500, multi: true }
    }
}

/// A transition target: a state id or the empty goal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    State(u32),
    Empty,
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Target::State(s) => write!(f, "{s}"),
            Target::Empty => f.write_str("empty"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: u32,
    pub to: Target,
    pub cause: Cause,
    /// Goal position of the selected element; `None` for groupings.
    pub selected_index: Option<usize>,
}

/// Ranges are 0-based goal positions; groups apply in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupingSpec {
    pub from: u32,
    pub to: u32,
    pub groups: Vec<Group>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateGraph {
    /// State `i + 1` is `states[i]`, in canonical form.
    pub states: Vec<Conj>,
    pub entry: u32,
    pub selections: BTreeMap<u32, Selection>,
    /// Fully evaluated declaration id per state whose selection is a full evaluation.
    pub fulleval: BTreeMap<u32, String>,
    pub transitions: Vec<Transition>,
    pub groupings: Vec<GroupingSpec>,
}

fn state_err(e: Error, c: &[Conjunct]) -> Error {
    match e {
        Error::Completeness(m) => Error::Completeness(m),
        Error::Analysis(m) => Error::Analysis(format!("{m} (in state {})", show_conj(c))),
        other => other,
    }
}

fn check_policy(p: &Program, pol: &Policy) -> Result<()> {
    for d in &pol.fulleval {
        match d.link {
            LinkKind::Builtin if !is_builtin(&d.pred.name, d.pred.arity) => {
                return Err(Error::Policy(format!("{} is not a built-in", d.pred)));
            }
            LinkKind::User if !p.defines(&d.pred) => return Err(Error::UnknownPredicate(d.pred.to_string())),
            _ => {}
        }
    }
    Ok(())
}

struct Builder<'a> {
    program: &'a Program,
    policy: &'a Policy,
    opts: &'a Options,
    states: Vec<Conj>,
    parent: Vec<Option<u32>>,
    index: HashMap<String, u32>,
    queue: VecDeque<u32>,
}

impl Builder<'_> {
    fn intern(&mut self, c: Conj, from: Option<u32>) -> Result<Target> {
        let c = match self.opts.depth_k {
            Some(k) => widen_conj(&c, k),
            None => c,
        };
        if c.is_empty() {
            return Ok(Target::Empty);
        }
        let c = canonical(&c);
        let key = show_conj(&c);
        if let Some(&id) = self.index.get(&key) {
            return Ok(Target::State(id));
        }
        if self.states.len() >= self.opts.max_states {
            return Err(self.overflow(c, from));
        }
        self.states.push(c);
        self.parent.push(from);
        let id = self.states.len() as u32;
        self.index.insert(key, id);
        self.queue.push_back(id);
        Ok(Target::State(id))
    }

    fn overflow(&self, c: Conj, from: Option<u32>) -> Error {
        let mut chain = vec![show_conj(&c)];
        let mut cur = from;
        while let Some(id) = cur {
            let s = &self.states[id as usize - 1];
            if s.len() < c.len() && chain.len() < 6 {
                chain.push(show_conj(s));
            }
            cur = self.parent[id as usize - 1];
        }
        chain.reverse();
        Error::Analysis(format!(
            "max_states ({}) exceeded; growing chain: {}; consider depth-k widening or multi generalization",
            self.opts.max_states,
            chain.join(" ~> ")
        ))
    }

    fn successors(&self, c: &[Conjunct], sel: Selection) -> Result<Vec<(Cause, Conj)>> {
        let i = sel.index;
        let splice = |s: &crate::term::Subst, mid: Vec<Conjunct>| -> Conj {
            let mut out = apply_conj(&c[..i], s);
            out.extend(mid);
            out.extend(apply_conj(&c[i + 1..], s));
            out
        };
        match sel.mark {
            Mark::Split => {
                let Conjunct::Multi(m) = &c[i] else { unreachable!("split marks a multi") };
                let mut gen = AbsGen::for_conj(c);
                let mut out = Vec::new();
                if let Some((atoms, s)) = m.split_one(&mut gen) {
                    out.push((Cause::One, splice(&s, atoms.into_iter().map(Conjunct::Atom).collect())));
                }
                if let Some((head, rest, s)) = m.split_many(&mut gen) {
                    let mut mid: Conj = head.into_iter().map(Conjunct::Atom).collect();
                    mid.push(Conjunct::Multi(rest));
                    out.push((Cause::Many, splice(&s, mid)));
                }
                Ok(out)
            }
            Mark::FullEval(_) => {
                let atom = c[i].as_atom().expect("full evaluation selects an atom");
                let mut gen = AbsGen::for_conj(c);
                let (d, outs) = self.policy.fulleval_outputs(atom, &mut gen)?;
                let id = self.policy.fulleval[d].id.clone();
                let mut seen: Vec<(String, Conj)> = Vec::new();
                for s in outs {
                    let next = splice(&s, vec![]);
                    let key = show_conj(&canonical(&next));
                    if !seen.iter().any(|(k, _)| *k == key) {
                        seen.push((key, next));
                    }
                }
                if seen.len() > 1 {
                    return Err(Error::Analysis(format!(
                        "output bindings of {id} lead to distinct states: {}",
                        seen.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(" | ")
                    )));
                }
                Ok(seen.into_iter().map(|(_, n)| (Cause::FullEval(id.clone()), n)).collect())
            }
            Mark::Unfold => {
                let atom = c[i].as_atom().expect("unfolding selects an atom");
                let key = atom.key();
                if !self.program.defines(&key) {
                    if is_builtin(&key.name, key.arity) {
                        return Err(Error::Analysis(format!(
                            "built-in {} selected without a fulleval declaration",
                            show_atom(atom)
                        )));
                    }
                    return Err(Error::UnknownPredicate(key.to_string()));
                }
                Ok(self
                    .program
                    .clauses_for(&key)
                    .filter_map(|cl| crate::abs::resolve_with_clause(c, i, cl).map(|(n, _)| (Cause::Clause(cl.id), n)))
                    .collect())
            }
        }
    }
}

/// Builds the state graph of `p` under `policy`, starting from its entry.
pub fn analyze(p: &Program, policy: &Policy, opts: &Options) -> Result<StateGraph> {
    check_policy(p, policy)?;
    let mut b = Builder {
        program: p,
        policy,
        opts,
        states: vec![],
        parent: vec![],
        index: HashMap::new(),
        queue: VecDeque::new(),
    };
    let entry = match b.intern(policy.entry.clone(), None)? {
        Target::State(s) => s,
        Target::Empty => return Err(Error::Analysis("empty entry".into())),
    };
    let mut g = StateGraph {
        states: vec![],
        entry,
        selections: BTreeMap::new(),
        fulleval: BTreeMap::new(),
        transitions: vec![],
        groupings: vec![],
    };
    while let Some(id) = b.queue.pop_front() {
        let c = b.states[id as usize - 1].clone();
        if opts.multi {
            let (folded, groups) = generalize_to_multi(&c);
            if !groups.is_empty() {
                let Target::State(to) = b.intern(folded, Some(id))? else { unreachable!("folding keeps conjuncts") };
                g.transitions.push(Transition {
                    from: id,
                    to: Target::State(to),
                    cause: Cause::Grouping,
                    selected_index: None,
                });
                g.groupings.push(GroupingSpec { from: id, to, groups });
                continue;
            }
        }
        let sel = policy.select(&c).map_err(|e| state_err(e, &c))?;
        g.selections.insert(id, sel);
        if let Mark::FullEval(d) = sel.mark {
            g.fulleval.insert(id, policy.fulleval[d].id.clone());
        }
        for (cause, next) in b.successors(&c, sel).map_err(|e| state_err(e, &c))? {
            let to = b.intern(next, Some(id))?;
            g.transitions.push(Transition { from: id, to, cause, selected_index: Some(sel.index) });
        }
    }
    g.states = b.states;
    Ok(g)
}

impl StateGraph {
    pub fn state(&self, id: u32) -> Option<&Conj> {
        self.states.get((id as usize).checked_sub(1)?)
    }

    pub fn transitions_from(&self, id: u32) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.from == id)
    }

    pub fn grouping(&self, id: u32) -> Option<&GroupingSpec> {
        self.groupings.iter().find(|g| g.from == id)
    }

    pub fn has_multi(&self) -> bool {
        self.states.iter().flatten().any(|c| matches!(c, Conjunct::Multi(_)))
    }

    /// Transition targets that are neither states nor the empty goal.
    pub fn closedness_violations(&self) -> Vec<Transition> {
        self.transitions
            .iter()
            .filter(|t| match t.to {
                Target::State(s) => self.state(s).is_none(),
                Target::Empty => false,
            })
            .cloned()
            .collect()
    }

    pub fn check_closed(&self) -> Result<()> {
        match self.closedness_violations().first() {
            Some(t) => Err(Error::Synthesis(format!("transition {} -> {} leaves the state set", t.from, t.to))),
            None => Ok(()),
        }
    }

    /// Atoms occurring in any state, multis contributing their patterns.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        for c in &self.states {
            for x in c {
                match x {
                    Conjunct::Atom(a) => out.push(a.clone()),
                    Conjunct::Multi(m) => out.extend(m.pattern.iter().cloned()),
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------- tables

/// The relations consumed by the table-driven meta-interpreter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateTables {
    pub entry: u32,
    pub selected_index: BTreeMap<u32, usize>,
    pub state_transition: Vec<(u32, Target, Cause)>,
    pub mi_clause: Program,
    /// State → fully evaluated declaration id.
    pub mi_full_eval: BTreeMap<u32, String>,
    pub grouping: Vec<GroupingSpec>,
    /// State → pattern predicates of the multi being split.
    pub extracted_patt: BTreeMap<u32, Vec<PredKey>>,
}

pub fn emit_tables(g: &StateGraph, p: &Program) -> StateTables {
    let mut extracted_patt = BTreeMap::new();
    for (&s, sel) in &g.selections {
        if sel.mark == Mark::Split {
            if let Some(Conjunct::Multi(m)) = g.state(s).and_then(|c| c.get(sel.index)) {
                extracted_patt.insert(s, m.pattern.iter().map(Atom::key).collect());
            }
        }
    }
    StateTables {
        entry: g.entry,
        selected_index: g.selections.iter().map(|(s, sel)| (*s, sel.index)).collect(),
        state_transition: g.transitions.iter().map(|t| (t.from, t.to, t.cause.clone())).collect(),
        mi_clause: p.clone(),
        mi_full_eval: g.fulleval.clone(),
        grouping: g.groupings.clone(),
        extracted_patt,
    }
}

impl StateTables {
    pub fn next(&self, from: u32, cause: &Cause) -> Option<Target> {
        self.state_transition.iter().find(|(f, _, c)| *f == from && c == cause).map(|(_, t, _)| *t)
    }

    pub fn grouping_for(&self, from: u32) -> Option<&GroupingSpec> {
        self.grouping.iter().find(|g| g.from == from)
    }
}

// ---------------------------------------------------------------- rendering

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Dot,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "text" => Ok(Format::Text),
            "dot" => Ok(Format::Dot),
            "json" => Ok(Format::Json),
            other => Err(Error::Usage(format!("unknown graph format '{other}'"))),
        }
    }
}

/// State text with the selected conjunct underlined: `_atom_` when
/// unfolded, `==atom==` when fully evaluated.
fn marked(c: &[Conjunct], sel: Option<&Selection>) -> String {
    if c.is_empty() {
        return "empty".into();
    }
    c.iter()
        .enumerate()
        .map(|(i, x)| {
            let s = show_conj(std::slice::from_ref(x));
            match sel {
                Some(sel) if sel.index == i => match sel.mark {
                    Mark::FullEval(_) => format!("=={s}=="),
                    _ => format!("_{s}_"),
                },
                _ => s,
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn show_group(g: &Group) -> String {
    let parts: Vec<String> = g
        .iter()
        .map(|r| match r {
            Range::Block(s, e) => format!("({s},{e})"),
            Range::Existing(p) => format!("m({p})"),
        })
        .collect();
    format!("[{}]", parts.join(","))
}

pub fn render(g: &StateGraph, format: Format) -> String {
    match format {
        Format::Json => to_json(g),
        Format::Text => {
            let mut out = String::new();
            for (i, c) in g.states.iter().enumerate() {
                let id = i as u32 + 1;
                let _ = writeln!(out, "{id}: {}", marked(c, g.selections.get(&id)));
                for t in g.transitions_from(id) {
                    match (&t.cause, g.grouping(id)) {
                        (Cause::Grouping, Some(spec)) => {
                            let gs: Vec<String> = spec.groups.iter().map(show_group).collect();
                            let _ = writeln!(out, "  --grouping [{}]--> {}", gs.join(","), t.to);
                        }
                        _ => {
                            let _ = writeln!(out, "  --{}--> {}", t.cause, t.to);
                        }
                    }
                }
            }
            out
        }
        Format::Dot => {
            let mut out = String::from("digraph states {\n  node [shape=box];\n  empty [shape=doublecircle];\n");
            for (i, c) in g.states.iter().enumerate() {
                let id = i as u32 + 1;
                let label = format!("{id}: {}", marked(c, g.selections.get(&id))).replace('"', "\\\"");
                let _ = writeln!(out, "  s{id} [label=\"{label}\"];");
            }
            for t in &g.transitions {
                let to = match t.to {
                    Target::State(s) => format!("s{s}"),
                    Target::Empty => "empty".into(),
                };
                let _ = writeln!(out, "  s{} -> {to} [label=\"{}\"];", t.from, t.cause);
            }
            out.push_str("}\n");
            out
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StateDoc {
    id: u32,
    conjunction: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    selected_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    mark: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct TransitionDoc {
    from: u32,
    to: serde_json::Value,
    cause: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    selected_index: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct GroupingDoc {
    from: u32,
    to: u32,
    groups: Vec<Group>,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    entry: u32,
    states: Vec<StateDoc>,
    transitions: Vec<TransitionDoc>,
    groupings: Vec<GroupingDoc>,
}

fn cause_json(c: &Cause) -> serde_json::Value {
    match c {
        Cause::Clause(id) => serde_json::Value::from(*id),
        other => serde_json::Value::from(other.to_string()),
    }
}

fn cause_from_json(v: &serde_json::Value) -> Result<Cause> {
    if let Some(n) = v.as_u64() {
        return Ok(Cause::Clause(n as u32));
    }
    match v.as_str() {
        Some("one") => Ok(Cause::One),
        Some("many") => Ok(Cause::Many),
        Some("grouping") => Ok(Cause::Grouping),
        Some(id) if id.starts_with("fullai") => Ok(Cause::FullEval(id.to_string())),
        _ => Err(Error::Analysis(format!("bad transition cause {v}"))),
    }
}

pub fn to_json(g: &StateGraph) -> String {
    let doc = GraphDoc {
        entry: g.entry,
        states: g
            .states
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let id = i as u32 + 1;
                let sel = g.selections.get(&id);
                StateDoc {
                    id,
                    conjunction: show_conj(c),
                    selected_index: sel.map(|s| s.index),
                    mark: sel.map(|s| match s.mark {
                        Mark::FullEval(_) => g.fulleval[&id].clone(),
                        m => m.to_string(),
                    }),
                }
            })
            .collect(),
        transitions: g
            .transitions
            .iter()
            .map(|t| TransitionDoc {
                from: t.from,
                to: match t.to {
                    Target::State(s) => serde_json::Value::from(s),
                    Target::Empty => serde_json::Value::from("empty"),
                },
                cause: cause_json(&t.cause),
                selected_index: t.selected_index,
            })
            .collect(),
        groupings: g
            .groupings
            .iter()
            .map(|s| GroupingDoc { from: s.from, to: s.to, groups: s.groups.clone() })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("graph serializes");
    s.push('\n');
    s
}

/// Reads a graph written by [`to_json`].
pub fn from_json(text: &str) -> Result<StateGraph> {
    let doc: GraphDoc = serde_json::from_str(text)?;
    let mut g = StateGraph {
        states: vec![],
        entry: doc.entry,
        selections: BTreeMap::new(),
        fulleval: BTreeMap::new(),
        transitions: vec![],
        groupings: vec![],
    };
    for (i, s) in doc.states.iter().enumerate() {
        if s.id as usize != i + 1 {
            return Err(Error::Analysis(format!("state ids must be consecutive from 1, found {}", s.id)));
        }
        g.states.push(parse_abs_conj(&s.conjunction)?);
        if let (Some(index), Some(mark)) = (s.selected_index, &s.mark) {
            let mark = match mark.as_str() {
                "unfold" => Mark::Unfold,
                "split" => Mark::Split,
                id => {
                    let n: usize = id
                        .strip_prefix("fullai")
                        .and_then(|n| n.parse().ok())
                        .filter(|&n| n >= 1)
                        .ok_or_else(|| Error::Analysis(format!("bad mark {id}")))?;
                    g.fulleval.insert(s.id, id.to_string());
                    Mark::FullEval(n - 1)
                }
            };
            g.selections.insert(s.id, Selection { index, mark });
        }
    }
    for t in &doc.transitions {
        let to = match t.to.as_u64() {
            Some(n) => Target::State(n as u32),
            None if t.to.as_str() == Some("empty") => Target::Empty,
            None => return Err(Error::Analysis(format!("bad transition target {}", t.to))),
        };
        g.transitions.push(Transition {
            from: t.from,
            to,
            cause: cause_from_json(&t.cause)?,
            selected_index: t.selected_index,
        });
    }
    g.groupings =
        doc.groupings.into_iter().map(|d| GroupingSpec { from: d.from, to: d.to, groups: d.groups }).collect();
    g.check_closed().map_err(|e| Error::Analysis(e.to_string()))?;
    Ok(g)
}

/// Predicates of the program reachable as selected atoms.
pub fn unfolded_predicates(g: &StateGraph) -> Vec<PredKey> {
    let mut out: Vec<PredKey> = Vec::new();
    for (s, sel) in &g.selections {
        if sel.mark == Mark::Unfold {
            if let Some(Conjunct::Atom(a)) = g.state(*s).and_then(|c| c.get(sel.index)) {
                if !out.contains(&a.key()) {
                    out.push(a.key());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    const PERMSORT: &str = include_str!("../corpus/permsort.lp");
    const PERMSORT_POLICY: &str = include_str!("../corpus/permsort.policy");
    const PRIMES: &str = include_str!("../corpus/primes.lp");
    const PRIMES_POLICY: &str = include_str!("../corpus/primes.policy");

    fn graph(lp: &str, pol: &str, opts: &Options) -> Result<StateGraph> {
        analyze(&parse_program(lp).unwrap(), &Policy::parse(pol).unwrap(), opts)
    }

    #[test]
    fn permsort_graph_interleaves_perm_and_ord() {
        let g = graph(PERMSORT, PERMSORT_POLICY, &Options::default()).unwrap();
        let shown: Vec<String> = g.states.iter().map(|c| show_conj(c)).collect();
        assert_eq!(
            shown,
            [
                "permsort(g1,a1)",
                "perm(g1,a1), ord(a1)",
                "ord([])",
                "select(a1,[g1|g2],a2), perm(a2,a3), ord([a1|a3])",
                "perm(g1,a1), ord([g2|a1])",
                "ord([g1])",
                "select(a1,[g1|g2],a2), perm(a2,a3), ord([g3,a1|a3])",
                "perm(g1,a1), ord([g2,g3|a1])",
                "perm(g1,a1), g2 =< g3, ord([g3|a1])",
            ]
        );
        assert_eq!(g.transitions.len(), 11);
        assert_eq!(g.transitions.iter().filter(|t| t.to == Target::Empty).count(), 2);
        assert_eq!(g.fulleval.keys().copied().collect::<Vec<_>>(), [4, 7, 9]);
        assert_eq!(g.selections[&8].index, 1);
        assert!(!g.has_multi());
        assert!(g.check_closed().is_ok());
        assert_eq!(g.transitions_from(9).map(|t| t.to).collect::<Vec<_>>(), [Target::State(5)]);
    }

    #[test]
    fn primes_needs_multi_and_overflows_without_it() {
        let g = graph(PRIMES, PRIMES_POLICY, &Options::default()).unwrap();
        assert!(g.has_multi());
        assert!(!g.groupings.is_empty());
        assert!(g.transitions.iter().any(|t| t.cause == Cause::Many));
        assert!(g.transitions.iter().any(|t| t.cause == Cause::One));
        assert!(g.check_closed().is_ok());
        let no_multi = Options { multi: false, ..Options::default() };
        let err = graph(PRIMES, PRIMES_POLICY, &no_multi).unwrap_err().to_string();
        assert!(err.contains("max_states (500) exceeded"), "{err}");
        assert!(err.contains("growing chain: integers(g1,a1), filter("), "{err}");
    }

    #[test]
    fn grouping_states_select_nothing() {
        let g = graph(PRIMES, PRIMES_POLICY, &Options::default()).unwrap();
        for gs in &g.groupings {
            assert!(!g.selections.contains_key(&gs.from));
            let out: Vec<_> = g.transitions_from(gs.from).collect();
            assert_eq!(out.len(), 1);
            assert_eq!(out[0].cause, Cause::Grouping);
            assert!(g.state(gs.to).unwrap().iter().any(|c| matches!(c, Conjunct::Multi(_))));
        }
    }

    #[test]
    fn json_round_trips() {
        for (lp, pol) in [(PERMSORT, PERMSORT_POLICY), (PRIMES, PRIMES_POLICY)] {
            let g = graph(lp, pol, &Options::default()).unwrap();
            let text = to_json(&g);
            let back = from_json(&text).unwrap();
            assert_eq!(back, g);
            assert_eq!(to_json(&back), text);
        }
    }

    #[test]
    fn depth_k_widening_bounds_a_growing_argument() {
        let lp = "grow(X) :- grow(s(X)).\ngrow(stop).\n";
        let pol = "entry: grow(g1).\n";
        let small = Options { max_states: 20, ..Options::default() };
        assert!(graph(lp, pol, &small).unwrap_err().to_string().contains("max_states"));
        let g = graph(lp, pol, &Options { depth_k: Some(2), ..small }).unwrap();
        assert!(g.states.len() <= 3, "{}", render(&g, Format::Text));
        assert!(g.check_closed().is_ok());
    }

    #[test]
    fn tables_answer_transition_lookups() {
        let p = parse_program(PERMSORT).unwrap();
        let g = graph(PERMSORT, PERMSORT_POLICY, &Options::default()).unwrap();
        let t = emit_tables(&g, &p);
        assert_eq!(t.entry, 1);
        assert_eq!(t.selected_index[&8], 1);
        assert_eq!(t.next(9, &Cause::FullEval("fullai2".into())), Some(Target::State(5)));
        assert_eq!(t.next(3, &Cause::Clause(4)), Some(Target::Empty));
        assert_eq!(t.next(3, &Cause::Clause(5)), None);
        assert!(t.extracted_patt.is_empty());
        assert_eq!(t.mi_full_eval[&4], "fullai1");
    }

    #[test]
    fn unfolded_predicates_exclude_fully_evaluated_ones() {
        let g = graph(PERMSORT, PERMSORT_POLICY, &Options::default()).unwrap();
        let keys: Vec<String> = unfolded_predicates(&g).iter().map(ToString::to_string).collect();
        assert_eq!(keys, ["permsort/2", "perm/2", "ord/1"]);
    }

    #[test]
    fn dot_output_names_every_state() {
        let g = graph(PERMSORT, PERMSORT_POLICY, &Options::default()).unwrap();
        let dot = render(&g, Format::Dot);
        assert!(dot.starts_with("digraph"));
        for id in 1..=9 {
            assert!(dot.contains(&format!("s{id} ")), "{dot}");
        }
    }
}
