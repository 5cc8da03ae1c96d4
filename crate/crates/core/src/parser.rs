//! Lexer, operator-precedence parser and printer for the `.lp` surface syntax.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::term::{sym, Atom, Clause, Program, Sym, Term, Var, CONS, NIL};

pub const RESERVED: [&str; 2] = ["cmulti", "building_block"];

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Name(String),
    /// A quoted atom; never treated as an operator.
    Quoted(String),
    Var(String),
    Int(i64),
    Punct(&'static str),
    Op(String),
    End,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Whitespace directly before the token.
    pub spaced: bool,
}

const SYMBOL_CHARS: &str = "+-*/\\<>=:?@#&$~^";

pub fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out: Vec<Spanned> = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut spaced = true;
    let err = |line, col, msg: &str| Error::Syntax { line, col, msg: msg.to_string() };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            spaced = true;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            spaced = true;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (sl, sc) = (line, col);
        let start = i;
        let prev_ends_term = matches!(
            out.last().map(|s| &s.tok),
            Some(Tok::Name(_) | Tok::Quoted(_) | Tok::Var(_) | Tok::Int(_) | Tok::Punct(")" | "]" | "}"))
        );
        let tok = if c.is_ascii_digit()
            || (c == '-' && !prev_ends_term && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            Tok::Int(s.parse().map_err(|_| err(sl, sc, "integer out of range"))?)
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if c.is_uppercase() || c == '_' {
                Tok::Var(s)
            } else {
                Tok::Name(s)
            }
        } else if c == '\'' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(err(sl, sc, "unterminated quoted atom")),
                    Some('\'') if chars.get(i + 1) == Some(&'\'') => {
                        s.push('\'');
                        i += 2;
                    }
                    Some('\'') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some('n') => s.push('\n'),
                            Some(&e) => s.push(e),
                            None => return Err(err(sl, sc, "unterminated quoted atom")),
                        }
                        i += 2;
                    }
                    Some('\n') => return Err(err(sl, sc, "newline in quoted atom")),
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            Tok::Quoted(s)
        } else if c == '.' {
            i += 1;
            match chars.get(i) {
                None => Tok::End,
                Some(n) if n.is_whitespace() || *n == '%' => Tok::End,
                _ => return Err(err(sl, sc, "unexpected '.'")),
            }
        } else if let Some(p) = ["(", ")", "[", "]", "{", "}", ",", "|"].iter().find(|p| p.starts_with(c)) {
            i += 1;
            Tok::Punct(p)
        } else if c == ';' || c == '!' {
            i += 1;
            Tok::Op(c.to_string())
        } else if SYMBOL_CHARS.contains(c) {
            while i < chars.len() && SYMBOL_CHARS.contains(chars[i]) {
                i += 1;
            }
            Tok::Op(chars[start..i].iter().collect())
        } else {
            return Err(err(sl, sc, &format!("unexpected character {c:?}")));
        };
        col += i - start;
        out.push(Spanned { tok, line: sl, col: sc, spaced });
        spaced = false;
    }
    out.push(Spanned { tok: Tok::Eof, line, col, spaced: true });
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Assoc {
    Xfx,
    Xfy,
    Yfx,
}

fn infix_op(name: &str) -> Option<(u32, Assoc)> {
    Some(match name {
        ":-" => (1200, Assoc::Xfx),
        ";" => (1100, Assoc::Xfy),
        "->" => (1050, Assoc::Xfy),
        "," => (1000, Assoc::Xfy),
        "=" | "=<" | "<" | ">" | ">=" | "==" => (700, Assoc::Xfx),
        "/" => (400, Assoc::Yfx),
        _ => return None,
    })
}

/// Variable scope for one clause or query: names map to clause-local ids.
#[derive(Clone, Debug, Default)]
pub struct VarScope {
    pub by_name: HashMap<String, Var>,
    pub names: BTreeMap<Var, Sym>,
    next: u32,
}

impl VarScope {
    pub fn get(&mut self, name: &str) -> Var {
        if name == "_" {
            let v = Var(self.next);
            self.next += 1;
            return v;
        }
        if let Some(v) = self.by_name.get(name) {
            return *v;
        }
        let v = Var(self.next);
        self.next += 1;
        self.by_name.insert(name.to_string(), v);
        self.names.insert(v, sym(name));
        v
    }

    pub fn len(&self) -> u32 {
        self.next
    }

    pub fn is_empty(&self) -> bool {
        self.next == 0
    }

    /// Named (non-anonymous) query variables in order of first occurrence.
    pub fn named(&self) -> Vec<(String, Var)> {
        self.names.iter().map(|(v, n)| (n.to_string(), *v)).collect()
    }
}

pub struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    pub scope: VarScope,
}

impl Parser {
    pub fn new(text: &str) -> Result<Parser> {
        Ok(Parser { toks: lex(text)?, pos: 0, scope: VarScope::default() })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        let s = &self.toks[self.pos];
        Error::Syntax { line: s.line, col: s.col, msg: msg.into() }
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    pub fn is_op(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Op(q) if q == p)
    }

    pub fn is_name(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Name(q) if q == p)
    }

    pub fn expect_punct(&mut self, p: &str) -> Result<()> {
        if self.is_punct(p) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected '{p}'")))
        }
    }

    pub fn expect_op(&mut self, p: &str) -> Result<()> {
        if self.is_op(p) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected '{p}'")))
        }
    }

    pub fn expect_end(&mut self) -> Result<()> {
        if *self.peek() == Tok::End {
            self.bump();
            Ok(())
        } else {
            Err(self.error("expected '.'"))
        }
    }

    pub fn expect_name(&mut self) -> Result<String> {
        match self.bump() {
            Tok::Name(n) | Tok::Quoted(n) => Ok(n),
            _ => {
                self.pos -= 1;
                Err(self.error("expected a name"))
            }
        }
    }

    fn peek_infix(&self) -> Option<(String, u32, Assoc)> {
        let name = match self.peek() {
            Tok::Op(o) => o.clone(),
            Tok::Punct(",") => ",".to_string(),
            _ => return None,
        };
        infix_op(&name).map(|(p, a)| (name, p, a))
    }

    /// Parses a term whose priority is at most `max`.
    pub fn term(&mut self, max: u32) -> Result<Term> {
        let mut left = self.primary()?;
        let mut left_prec = 0;
        while let Some((name, prec, assoc)) = self.peek_infix() {
            if prec > max {
                break;
            }
            let left_max = if assoc == Assoc::Yfx { prec } else { prec - 1 };
            if left_prec > left_max {
                break;
            }
            self.bump();
            let right_max = if assoc == Assoc::Xfy { prec } else { prec - 1 };
            let right = self.term(right_max)?;
            left = Term::app(&name, vec![left, right]);
            left_prec = prec;
        }
        Ok(left)
    }

    fn arglist(&mut self) -> Result<Vec<Term>> {
        let mut args = vec![self.term(999)?];
        while self.is_punct(",") {
            self.bump();
            args.push(self.term(999)?);
        }
        self.expect_punct(")")?;
        Ok(args)
    }

    fn primary(&mut self) -> Result<Term> {
        let glued_paren = |p: &Parser| p.is_punct("(") && !p.toks[p.pos].spaced;
        match self.bump() {
            Tok::Int(i) => Ok(Term::Int(i)),
            Tok::Var(n) => Ok(Term::Var(self.scope.get(&n))),
            Tok::Name(n) | Tok::Quoted(n) => {
                if glued_paren(self) {
                    self.bump();
                    let args = self.arglist()?;
                    Ok(Term::app(&n, args))
                } else if self.is_punct("{") && !self.toks[self.pos].spaced {
                    // `name{...}` is shorthand for `name({...})`
                    let inner = self.primary()?;
                    Ok(Term::app(&n, vec![inner]))
                } else {
                    Ok(Term::atom(&n))
                }
            }
            Tok::Op(o) => {
                if glued_paren(self) {
                    self.bump();
                    let args = self.arglist()?;
                    Ok(Term::app(&o, args))
                } else if infix_op(&o).is_some() && !self.is_punct(")") {
                    self.pos -= 1;
                    Err(self.error(format!("unexpected operator '{o}'")))
                } else {
                    Ok(Term::atom(&o))
                }
            }
            Tok::Punct("(") => {
                let t = self.term(1200)?;
                self.expect_punct(")")?;
                Ok(t)
            }
            Tok::Punct("[") => {
                if self.is_punct("]") {
                    self.bump();
                    return Ok(Term::nil());
                }
                let mut items = vec![self.term(999)?];
                while self.is_punct(",") {
                    self.bump();
                    items.push(self.term(999)?);
                }
                let tail = if self.is_punct("|") {
                    self.bump();
                    self.term(999)?
                } else {
                    Term::nil()
                };
                self.expect_punct("]")?;
                Ok(Term::list_with_tail(items, tail))
            }
            Tok::Punct("{") => {
                if self.is_punct("}") {
                    self.bump();
                    return Ok(Term::atom("{}"));
                }
                let t = self.term(1200)?;
                self.expect_punct("}")?;
                Ok(Term::app("{}", vec![t]))
            }
            _ => {
                self.pos -= 1;
                let msg = match self.peek() {
                    Tok::Eof => "unexpected end of input".to_string(),
                    Tok::End => "unexpected '.'".to_string(),
                    t => format!("unexpected {t:?}"),
                };
                Err(self.error(msg))
            }
        }
    }

    /// Parses one clause (terminated by `.`) with a fresh variable scope.
    pub fn clause(&mut self) -> Result<Clause> {
        self.scope = VarScope::default();
        let start = self.pos;
        let t = self.term(1200)?;
        self.expect_end()?;
        let (head, body) = match &t {
            Term::App(f, args) if &**f == ":-" && args.len() == 2 => (args[0].clone(), flatten_conj(&args[1])),
            _ => (t.clone(), vec![]),
        };
        let at = |p: &Parser, msg: String| {
            let s = &p.toks[start];
            Error::Syntax { line: s.line, col: s.col, msg }
        };
        let head = Atom::from_term(&head).ok_or_else(|| at(self, "clause head must be an atom".into()))?;
        if RESERVED.contains(&&*head.pred) {
            return Err(at(self, format!("reserved predicate {} cannot be defined", head.pred)));
        }
        let body = body
            .iter()
            .map(|g| match g {
                Term::App(f, _) if [";", "->", ":-"].contains(&&**f) => {
                    Err(at(self, format!("{f} is not allowed in pure clause bodies")))
                }
                _ => Atom::from_term(g).ok_or_else(|| at(self, "body goal must be an atom".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut c = Clause::new(head, body);
        c.names = self.scope.names.clone();
        Ok(c)
    }
}

pub fn flatten_conj(t: &Term) -> Vec<Term> {
    match t {
        Term::App(f, args) if &**f == "," && args.len() == 2 => {
            let mut v = flatten_conj(&args[0]);
            v.extend(flatten_conj(&args[1]));
            v
        }
        Term::Atom(a) if &**a == "true" => vec![],
        other => vec![other.clone()],
    }
}

pub fn parse_program(text: &str) -> Result<Program> {
    let mut p = Parser::new(text)?;
    let mut prog = Program::default();
    while !p.at_eof() {
        prog.push(p.clause()?);
    }
    Ok(prog)
}

/// Parses a standalone term; variables are numbered in first-occurrence order.
pub fn parse_term(text: &str) -> Result<(Term, VarScope)> {
    let mut p = Parser::new(text)?;
    let t = p.term(1200)?;
    if *p.peek() == Tok::End {
        p.bump();
    }
    if !p.at_eof() {
        return Err(p.error("trailing input after term"));
    }
    Ok((t, p.scope))
}

/// Parses a query conjunction such as `permsort([2,1],Y)` (final `.` optional).
pub fn parse_query(text: &str) -> Result<(Vec<Atom>, VarScope)> {
    let (t, scope) = parse_term(text)?;
    let atoms = flatten_conj(&t)
        .iter()
        .map(|g| {
            Atom::from_term(g).ok_or_else(|| Error::Syntax { line: 1, col: 1, msg: "goal must be an atom".into() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((atoms, scope))
}

fn is_plain_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_lowercase()) && cs.all(|c| c.is_alphanumeric() || c == '_')
}

fn is_symbolic(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| SYMBOL_CHARS.contains(c)) || s == ";" || s == "!"
}

pub fn quote_atom(s: &str) -> String {
    if is_plain_name(s) || s == NIL || s == "{}" || is_symbolic(s) {
        s.to_string()
    } else {
        let mut out = String::from("'");
        for c in s.chars() {
            match c {
                '\'' => out.push_str("\\'"),
                '\\' => out.push_str("\\\\"),
                '\n' => out.push_str("\\n"),
                c => out.push(c),
            }
        }
        out.push('\'');
        out
    }
}

/// Renders terms; variables print through `names` or as `_G<n>`.
pub struct Printer<'a> {
    pub names: Option<&'a BTreeMap<Var, Sym>>,
    /// Print variables as abstract `a<i>` / `g<j>`.
    pub abstract_vars: bool,
}

impl<'a> Printer<'a> {
    pub fn plain() -> Printer<'static> {
        Printer { names: None, abstract_vars: false }
    }

    pub fn with_names(names: &'a BTreeMap<Var, Sym>) -> Printer<'a> {
        Printer { names: Some(names), abstract_vars: false }
    }

    pub fn abstract_vars() -> Printer<'static> {
        Printer { names: None, abstract_vars: true }
    }

    fn var(&self, v: Var, out: &mut String) {
        if self.abstract_vars {
            out.push_str(&crate::abs::var_name(v));
            return;
        }
        match self.names.and_then(|m| m.get(&v)) {
            Some(n) => out.push_str(n),
            None => {
                let _ = write!(out, "_G{}", v.0);
            }
        }
    }

    pub fn term(&self, t: &Term) -> String {
        let mut s = String::new();
        self.write(t, 1200, &mut s);
        s
    }

    pub fn write(&self, t: &Term, max: u32, out: &mut String) {
        match t {
            Term::Var(v) => self.var(*v, out),
            Term::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Term::Atom(a) => {
                let q = quote_atom(a);
                if infix_op(a).is_some() && max < 1200 {
                    out.push('(');
                    out.push_str(&q);
                    out.push(')');
                } else {
                    out.push_str(&q);
                }
            }
            Term::App(f, args) if &**f == CONS && args.len() == 2 => {
                out.push('[');
                self.write(&args[0], 999, out);
                let mut tail = &args[1];
                loop {
                    match tail {
                        Term::App(g, xs) if &**g == CONS && xs.len() == 2 => {
                            out.push(',');
                            self.write(&xs[0], 999, out);
                            tail = &xs[1];
                        }
                        Term::Atom(a) if &**a == NIL => break,
                        other => {
                            out.push('|');
                            self.write(other, 999, out);
                            break;
                        }
                    }
                }
                out.push(']');
            }
            Term::App(f, args)
                if args.len() == 1
                    && is_plain_name(f)
                    && (matches!(&args[0], Term::Atom(c) if &**c == "{}")
                        || matches!(&args[0], Term::App(c, xs) if &**c == "{}" && xs.len() == 1)) =>
            {
                out.push_str(f);
                self.write(&args[0], 0, out);
            }
            Term::App(f, args) if &**f == "{}" && args.len() == 1 => {
                out.push('{');
                self.write(&args[0], 1200, out);
                out.push('}');
            }
            Term::App(f, args) if args.len() == 2 && infix_op(f).is_some() => {
                let (prec, assoc) = infix_op(f).unwrap();
                let paren = prec > max;
                if paren {
                    out.push('(');
                }
                let lmax = if assoc == Assoc::Yfx { prec } else { prec - 1 };
                let rmax = if assoc == Assoc::Xfy { prec } else { prec - 1 };
                self.write(&args[0], lmax, out);
                if &**f == "," {
                    out.push_str(", ");
                } else {
                    let _ = write!(out, " {f} ");
                }
                self.write(&args[1], rmax, out);
                if paren {
                    out.push(')');
                }
            }
            Term::App(f, args) => {
                out.push_str(&quote_atom(f));
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    self.write(a, 999, out);
                }
                out.push(')');
            }
        }
    }

    pub fn atom(&self, a: &Atom) -> String {
        let mut s = String::new();
        self.write(&a.to_term(), 999, &mut s);
        s
    }

    pub fn conj(&self, atoms: &[Atom]) -> String {
        atoms.iter().map(|a| self.atom(a)).collect::<Vec<_>>().join(", ")
    }
}

pub fn print_term(t: &Term) -> String {
    Printer::plain().term(t)
}

pub fn print_atom(a: &Atom) -> String {
    Printer::plain().atom(a)
}

pub fn print_clause(c: &Clause) -> String {
    let p = Printer::with_names(&c.names);
    if c.body.is_empty() {
        format!("{}.", p.atom(&c.head))
    } else {
        format!("{} :- {}.", p.atom(&c.head), p.conj(&c.body))
    }
}

/// One clause per line, in program order.
pub fn print_program(p: &Program) -> String {
    p.clauses.iter().map(|c| print_clause(c) + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::PredKey;

    pub const PERMSORT: &str = "permsort(X,Y) :- perm(X,Y), ord(Y).
perm([],[]).
perm([X|Y],[U|V]) :- select(U,[X|Y],W), perm(W,V).
ord([]).
ord([X]).
ord([X,Y|Z]) :- X =< Y, ord([Y|Z]).
";

    #[test]
    fn single_fact() {
        let p = parse_program("p(a).").unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.clauses[0].head, Atom::new("p", vec![Term::atom("a")]));
        assert!(p.clauses[0].is_fact());
    }

    #[test]
    fn permsort_listing_shape() {
        let p = parse_program(PERMSORT).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p.clauses_for(&PredKey::new("perm", 2)).count(), 2);
        assert_eq!(p.clauses_for(&PredKey::new("ord", 1)).count(), 3);
        let ids: Vec<u32> = p.clauses.iter().map(|c| c.id).collect();
        assert_eq!(ids, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn stray_neck_is_reported_at_its_position() {
        match parse_program("p(X :-.") {
            Err(Error::Syntax { line, col, .. }) => assert_eq!((line, col), (1, 5)),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn reserved_predicates_rejected() {
        assert!(matches!(parse_program("cmulti(X)."), Err(Error::Syntax { .. })));
        assert!(matches!(parse_program("building_block(a) :- p."), Err(Error::Syntax { .. })));
    }

    #[test]
    fn round_trip_permsort() {
        let p = parse_program(PERMSORT).unwrap();
        let printed = print_program(&p);
        assert_eq!(parse_program(&printed).unwrap(), p);
        assert!(printed.contains("ord([X,Y|Z]) :- X =< Y, ord([Y|Z])."));
    }

    #[test]
    fn comments_negatives_and_quotes() {
        let p = parse_program("% c\nq(-3, 'Hello w', f(- ), X) :- X = 'it''s'.\n").unwrap();
        let c = &p.clauses[0];
        assert_eq!(c.head.args[0], Term::Int(-3));
        assert_eq!(c.head.args[1], Term::atom("Hello w"));
        assert_eq!(c.body[0].pred.as_ref(), "=");
        let again = parse_program(&print_program(&p)).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let c = &parse_program("p(_, _).").unwrap().clauses[0];
        assert_ne!(c.head.args[0], c.head.args[1]);
    }

    #[test]
    fn query_scope_lists_named_vars() {
        let (atoms, scope) = parse_query("permsort([2,1,3],Y)").unwrap();
        assert_eq!(atoms.len(), 1);
        assert_eq!(scope.named(), vec![("Y".to_string(), Var(0))]);
    }
}
