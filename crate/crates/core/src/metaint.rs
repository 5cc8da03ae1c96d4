//! Table-driven meta-interpretation: a [`Control`] that follows the state
//! tables directly, and an encoding of the same interpreter as a logic
//! program (the subject of specialization).

use std::cell::RefCell;

use crate::analysis::{StateGraph, StateTables, Target};
use crate::engine::{solve, Cause, Control, Limits, RunResult, Step, Store};
use crate::error::{Error, Result};
use crate::multi::{apply_groupings, block_goals, cmulti_blocks, gamma_member_goal, Range, BUILDING_BLOCK, CMULTI};
use crate::parser::parse_program;
use crate::term::{Atom, Clause, PredKey, Program, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Selection and full evaluation only.
    Simple,
    /// Adds multi case splits and groupings.
    Extended,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Variant> {
        match s {
            "simple" => Ok(Variant::Simple),
            "extended" => Ok(Variant::Extended),
            other => Err(Error::Usage(format!("unknown meta-interpreter variant '{other}'"))),
        }
    }
}

/// Splits `goal` around position `idx`.
pub fn divide_goals<T: Clone>(goal: &[T], idx: usize) -> Result<(Vec<T>, T, Vec<T>)> {
    if idx >= goal.len() {
        return Err(Error::Meta(format!("selected index {idx} out of range for a goal of length {}", goal.len())));
    }
    Ok((goal[..idx].to_vec(), goal[idx].clone(), goal[idx + 1..].to_vec()))
}

/// Follows the state tables: the control state is the current analysis state.
pub struct TableControl<'t> {
    pub tables: &'t StateTables,
    pub variant: Variant,
}

impl TableControl<'_> {
    fn mismatch(state: u32, what: impl std::fmt::Display) -> Error {
        Error::Meta(format!("state {state}: {what}"))
    }
}

impl Control for TableControl<'_> {
    type State = Target;

    fn start(&self) -> Target {
        Target::State(self.tables.entry)
    }

    fn step(&self, state: &Target, goal: &[Term], store: &Store) -> Result<Step> {
        let s = match state {
            Target::State(s) => *s,
            Target::Empty => return Err(Error::Meta("non-empty goal in the empty state".into())),
        };
        if let Some(spec) = self.tables.grouping_for(s) {
            if self.variant == Variant::Simple {
                return Err(Self::mismatch(s, "grouping requires the extended meta-interpreter"));
            }
            let resolved: Vec<Term> = goal.iter().map(|t| store.deref(t)).collect();
            let grouped = apply_groupings(&resolved, &spec.groups)
                .ok_or_else(|| Self::mismatch(s, "goal does not fit the grouping ranges"))?;
            return Ok(Step::Rewrite { goal: grouped, cause: Cause::Grouping });
        }
        let idx = *self.tables.selected_index.get(&s).ok_or_else(|| Self::mismatch(s, "no selected index"))?;
        let (before, selected, after) = divide_goals(goal, idx).map_err(|e| Self::mismatch(s, e))?;
        if let Some(blocks) = cmulti_blocks(&store.deref(&selected)) {
            if self.variant == Variant::Simple {
                return Err(Self::mismatch(s, "cmulti goal requires the extended meta-interpreter"));
            }
            let bad = || Self::mismatch(s, "malformed cmulti");
            let first = block_goals(&blocks[0]).ok_or_else(bad)?;
            let mut next = before;
            next.extend(first);
            let cause = if blocks.len() == 1 {
                Cause::One
            } else {
                next.push(Term::app(CMULTI, vec![Term::list(blocks[1..].to_vec())]));
                Cause::Many
            };
            next.extend(after);
            return Ok(Step::Rewrite { goal: next, cause });
        }
        Ok(Step::Select { index: idx, full_eval: self.tables.mi_full_eval.contains_key(&s) })
    }

    fn next(&self, state: &Target, cause: &Cause) -> Result<Target> {
        let Target::State(s) = *state else { return Err(Error::Meta("transition out of the empty state".into())) };
        let cause = match cause {
            Cause::FullEval(id) if id.is_empty() => Cause::FullEval(
                self.tables
                    .mi_full_eval
                    .get(&s)
                    .cloned()
                    .ok_or_else(|| Self::mismatch(s, "not a full evaluation state"))?,
            ),
            c => c.clone(),
        };
        self.tables.next(s, &cause).ok_or_else(|| Self::mismatch(s, format!("no transition for cause {cause}")))
    }
}

/// Wraps [`TableControl`] and records, for each goal it is asked about,
/// whether the goal lies in γ of the current state.
pub struct GammaTrace<'t> {
    pub inner: TableControl<'t>,
    pub graph: &'t StateGraph,
    pub seen: RefCell<Vec<(u32, bool)>>,
}

impl<'t> GammaTrace<'t> {
    pub fn new(graph: &'t StateGraph, tables: &'t StateTables, variant: Variant) -> GammaTrace<'t> {
        GammaTrace { inner: TableControl { tables, variant }, graph, seen: RefCell::new(vec![]) }
    }
}

impl Control for GammaTrace<'_> {
    type State = Target;

    fn start(&self) -> Target {
        self.inner.start()
    }

    fn step(&self, state: &Target, goal: &[Term], store: &Store) -> Result<Step> {
        if let Target::State(s) = state {
            let resolved: Vec<Term> = goal.iter().map(|t| store.resolve(t)).collect();
            let member = self.graph.state(*s).is_some_and(|c| gamma_member_goal(&resolved, c));
            self.seen.borrow_mut().push((*s, member));
        }
        self.inner.step(state, goal, store)
    }

    fn next(&self, state: &Target, cause: &Cause) -> Result<Target> {
        self.inner.next(state, cause)
    }
}

/// Runs `query` under the table-driven strategy.
pub fn mi_run(tables: &StateTables, query: &[Atom], variant: Variant, limits: Limits) -> Result<RunResult> {
    solve(&tables.mi_clause, query, &TableControl { tables, variant }, limits)
}

// ---------------------------------------------------------------- encoding

const CORE: &str = "
compute(Gs) :- entry_state(S), mi(Gs,S).
mi([],S).
mi([G|Gs],State) :-
  selected_index(State,Idx),
  divide_goals([G|Gs],Idx,Before,Selected,After),
  mi_clause(Selected,Body,RuleIdx),
  state_transition(State,NewState,RuleIdx),
  mi_append(Before,Body,NewGsA),
  mi_append(NewGsA,After,NewGs),
  mi(NewGs,NewState).
mi([G|Gs],State) :-
  selected_index(State,Idx),
  divide_goals([G|Gs],Idx,Before,Selected,After),
  mi_full_eval(State,FullAIIdx),
  call(Selected),
  state_transition(State,NewState,FullAIIdx),
  mi_append(Before,After,NewGs),
  mi(NewGs,NewState).
";

const SPLIT: &str = "
mi([G|Gs],State) :-
  selected_index(State,Idx),
  extracted_patt_one(State,Patt1),
  divide_goals([G|Gs],Idx,Before,cmulti([building_block(Patt1)]),After),
  state_transition(State,NewState,one),
  mi_append(Patt1,After,NewGsA),
  mi_append(Before,NewGsA,NewGs),
  mi(NewGs,NewState).
mi([G|Gs],State) :-
  selected_index(State,Idx),
  extracted_patts_many(State,Patt1,[building_block(Patt2)|BBs]),
  divide_goals([G|Gs],Idx,Before,cmulti([building_block(Patt1),building_block(Patt2)|BBs]),After),
  state_transition(State,NewState,many),
  mi_append(Before,Patt1,NewGsA),
  mi_append(NewGsA,[cmulti([building_block(Patt2)|BBs])],NewGsB),
  mi_append(NewGsB,After,NewGs),
  mi(NewGs,NewState).
";

const GROUPING: &str = "
mi([G|Gs],State) :-
  grouping(State,NextState,Groupings),
  apply_groupings([G|Gs],Groupings,NewGs),
  mi(NewGs,NextState).
apply_groupings(Gs,[],Gs).
apply_groupings(Gs,[Group|Groups],Out) :-
  apply_group(Gs,Group,Gs1),
  apply_groupings(Gs1,Groups,Out).
apply_group(Gs,[R|Rs],Out) :-
  range_start(R,S),
  mi_length(Before,S),
  mi_append(Before,Rest,Gs),
  group_blocks([R|Rs],Rest,Blocks,After),
  mi_append(Before,[cmulti(Blocks)|After],Out).
range_start(r(S,E),S).
range_start(m(S),S).
group_blocks([],Rest,[],Rest).
group_blocks([r(S,E)|Rs],Gs,[building_block(Block)|Blocks],After) :-
  minus(E,S,N),
  mi_length(Block,N),
  mi_append(Block,Gs1,Gs),
  group_blocks(Rs,Gs1,Blocks,After).
group_blocks([m(S)|Rs],[cmulti(Bs)|Gs1],Blocks,After) :-
  group_blocks(Rs,Gs1,Blocks1,After),
  mi_append(Bs,Blocks1,Blocks).
";

const SUPPORT: &str = "
divide_goals(Goals,Idx,Before,Selected,After) :-
  mi_length(Before,Idx),
  mi_append(Before,[Selected|After],Goals).
mi_length([],0).
mi_length([H|T],N) :- 1 =< N, minus(N,1,M), mi_length(T,M).
mi_append([],L,L).
mi_append([H|T],L,[H|R]) :- mi_append(T,L,R).
";

/// Predicates the encoding defines; a subject program must not define them.
pub const RESERVED: &[(&str, usize)] = &[
    ("compute", 1),
    ("entry_state", 1),
    ("mi", 2),
    ("divide_goals", 5),
    ("mi_length", 2),
    ("mi_append", 3),
    ("mi_clause", 3),
    ("mi_full_eval", 2),
    ("selected_index", 2),
    ("state_transition", 3),
    ("grouping", 3),
    ("apply_groupings", 3),
    ("apply_group", 3),
    ("range_start", 2),
    ("group_blocks", 4),
    ("extracted_patt_one", 2),
    ("extracted_patts_many", 3),
];

pub fn target_term(t: Target) -> Term {
    match t {
        Target::State(s) => Term::Int(s as i64),
        Target::Empty => Term::atom("empty"),
    }
}

pub fn cause_term(c: &Cause) -> Term {
    match c {
        Cause::Clause(id) => Term::Int(*id as i64),
        other => Term::atom(&other.to_string()),
    }
}

pub fn groups_term(groups: &[crate::multi::Group]) -> Term {
    Term::list(
        groups
            .iter()
            .map(|g| {
                Term::list(
                    g.iter()
                        .map(|r| match r {
                            Range::Block(s, e) => Term::app("r", vec![Term::Int(*s as i64), Term::Int(*e as i64)]),
                            Range::Existing(p) => Term::app("m", vec![Term::Int(*p as i64)]),
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

fn fact(pred: &str, args: Vec<Term>) -> Clause {
    Clause::new(Atom::new(pred, args), vec![])
}

/// A pattern of `len` atoms with fresh arguments, numbered from `base`.
fn skeleton(pattern: &[PredKey], base: &mut u32) -> Term {
    Term::list(
        pattern
            .iter()
            .map(|k| {
                let args = (0..k.arity)
                    .map(|_| {
                        *base += 1;
                        Term::var(*base - 1)
                    })
                    .collect();
                Atom::new(&k.name, args).to_term()
            })
            .collect(),
    )
}

/// The meta-interpreter, its tables and the subject clauses as one program.
pub fn encode_as_logic_program(tables: &StateTables, variant: Variant) -> Result<Program> {
    for (name, arity) in RESERVED {
        let key = PredKey::new(name, *arity);
        if tables.mi_clause.defines(&key) {
            return Err(Error::Meta(format!("the program defines {key}, which the encoding reserves")));
        }
    }
    if variant == Variant::Simple && !(tables.grouping.is_empty() && tables.extracted_patt.is_empty()) {
        return Err(Error::Meta("the tables need the extended meta-interpreter (they contain groupings)".into()));
    }
    let mut text = String::from(CORE);
    if variant == Variant::Extended && !tables.extracted_patt.is_empty() {
        text.push_str(SPLIT);
    }
    if variant == Variant::Extended && !tables.grouping.is_empty() {
        text.push_str(GROUPING);
    }
    text.push_str(SUPPORT);
    let mut p = parse_program(&text)?;
    let mut facts = vec![fact("entry_state", vec![Term::Int(tables.entry as i64)])];
    for (s, i) in &tables.selected_index {
        facts.push(fact("selected_index", vec![Term::Int(*s as i64), Term::Int(*i as i64)]));
    }
    for (from, to, cause) in &tables.state_transition {
        if *cause != Cause::Grouping {
            facts.push(fact("state_transition", vec![Term::Int(*from as i64), target_term(*to), cause_term(cause)]));
        }
    }
    for (s, id) in &tables.mi_full_eval {
        facts.push(fact("mi_full_eval", vec![Term::Int(*s as i64), Term::atom(id)]));
    }
    for c in &tables.mi_clause.clauses {
        let body = Term::list(c.body.iter().map(Atom::to_term).collect());
        let mut f = fact("mi_clause", vec![c.head.to_term(), body, Term::Int(c.id as i64)]);
        f.names = c.names.clone();
        facts.push(f);
    }
    if variant == Variant::Extended {
        for g in &tables.grouping {
            facts
                .push(fact("grouping", vec![Term::Int(g.from as i64), Term::Int(g.to as i64), groups_term(&g.groups)]));
        }
        for (s, keys) in &tables.extracted_patt {
            let mut base = 0;
            let one = skeleton(keys, &mut base);
            facts.push(fact("extracted_patt_one", vec![Term::Int(*s as i64), one]));
            let p1 = skeleton(keys, &mut base);
            let p2 = skeleton(keys, &mut base);
            let rest = Term::var(base);
            let bbs = Term::list_with_tail(vec![Term::app(BUILDING_BLOCK, vec![p2])], rest);
            facts.push(fact("extracted_patts_many", vec![Term::Int(*s as i64), p1, bbs]));
        }
    }
    for f in facts {
        p.push(f);
    }
    // subject clauses back fully evaluated user predicates under call/1
    for c in &tables.mi_clause.clauses {
        let mut c = c.clone();
        c.id = 0;
        p.push(c);
    }
    Ok(p)
}

/// `compute([G1,...,Gn])` for a query.
pub fn compute_query(query: &[Atom]) -> Atom {
    Atom::new("compute", vec![Term::list(query.iter().map(Atom::to_term).collect())])
}
