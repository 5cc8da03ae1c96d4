//! Built-in predicates that are always fully evaluated.
//!
//! Each built-in receives its arguments with all bindings applied and
//! returns every solution as an instance of the call's argument tuple.

use crate::error::{Error, Result};
use crate::parser::print_atom;
use crate::term::{Atom, Term};

pub const BUILTINS: [(&str, usize); 6] =
    [("select", 3), ("=<", 2), ("plus", 3), ("minus", 3), ("divides", 2), ("does_not_divide", 2)];

pub fn is_builtin(pred: &str, arity: usize) -> bool {
    BUILTINS.contains(&(pred, arity))
}

/// `call/1` is handled by the engine as a full-evaluation escape.
pub fn is_call(pred: &str, arity: usize) -> bool {
    pred == "call" && arity == 1
}

fn mode_error(a: &Atom) -> Error {
    Error::Mode(print_atom(a))
}

fn int(t: &Term) -> Option<i64> {
    match t {
        Term::Int(i) => Some(*i),
        _ => None,
    }
}

/// Evaluates a built-in call. The result lists solution argument tuples;
/// the caller unifies each with the original arguments.
pub fn eval(a: &Atom) -> Result<Vec<Vec<Term>>> {
    let args = &a.args;
    let ints = |n: usize| args.iter().take(n).map(int).collect::<Vec<_>>();
    match (&*a.pred, args.len()) {
        ("select", 3) => {
            let items = args[1].as_list().ok_or_else(|| mode_error(a))?;
            Ok((0..items.len())
                .map(|i| {
                    let mut rest = items.clone();
                    let x = rest.remove(i);
                    vec![x, args[1].clone(), Term::list(rest)]
                })
                .collect())
        }
        ("=<", 2) => match ints(2)[..] {
            [Some(x), Some(y)] => Ok(if x <= y { vec![args.clone()] } else { vec![] }),
            _ => Err(mode_error(a)),
        },
        ("plus", 3) | ("minus", 3) => {
            let sign = if &*a.pred == "plus" { 1 } else { -1 };
            // plus(X,Y,Z): X + Y = Z; minus(X,Y,Z): X - Y = Z
            let solved = match ints(3)[..] {
                [Some(x), Some(y), _] => Some([x, y, x.checked_add(sign * y).ok_or_else(|| mode_error(a))?]),
                [Some(x), None, Some(z)] => Some([x, sign * (z - x), z]),
                [None, Some(y), Some(z)] => Some([z - sign * y, y, z]),
                _ => None,
            };
            let [x, y, z] = solved.ok_or_else(|| mode_error(a))?;
            let fits = args.iter().zip([x, y, z]).all(|(t, v)| int(t).is_none_or(|i| i == v));
            Ok(if fits { vec![vec![Term::Int(x), Term::Int(y), Term::Int(z)]] } else { vec![] })
        }
        ("divides", 2) | ("does_not_divide", 2) => match ints(2)[..] {
            [Some(n), Some(m)] if n != 0 => {
                let divides = m % n == 0;
                Ok(if divides == (&*a.pred == "divides") { vec![args.clone()] } else { vec![] })
            }
            _ => Err(mode_error(a)),
        },
        _ => Err(Error::UnknownPredicate(format!("{}/{}", a.pred, args.len()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(xs: &[i64]) -> Term {
        Term::list(xs.iter().map(|x| Term::Int(*x)).collect())
    }

    #[test]
    fn select_enumerates_removals() {
        let a = Atom::new("select", vec![Term::var(0), ints(&[1, 2]), Term::var(1)]);
        let sols = eval(&a).unwrap();
        assert_eq!(sols.len(), 2);
        assert_eq!((sols[0][0].clone(), sols[0][2].clone()), (Term::Int(1), ints(&[2])));
        assert_eq!((sols[1][0].clone(), sols[1][2].clone()), (Term::Int(2), ints(&[1])));
    }

    #[test]
    fn arithmetic_modes() {
        let plus = |a: Term, b: Term, c: Term| eval(&Atom::new("plus", vec![a, b, c]));
        assert_eq!(plus(Term::Int(2), Term::Int(1), Term::var(0)).unwrap()[0][2], Term::Int(3));
        assert_eq!(plus(Term::Int(2), Term::var(0), Term::Int(5)).unwrap()[0][1], Term::Int(3));
        assert!(plus(Term::Int(2), Term::Int(1), Term::Int(4)).unwrap().is_empty());
        assert!(matches!(plus(Term::var(0), Term::Int(1), Term::var(1)), Err(Error::Mode(_))));
        let minus = eval(&Atom::new("minus", vec![Term::Int(5), Term::Int(1), Term::var(0)])).unwrap();
        assert_eq!(minus[0][2], Term::Int(4));
    }

    #[test]
    fn divisibility_and_comparison() {
        let d = |p: &str, n, m| eval(&Atom::new(p, vec![Term::Int(n), Term::Int(m)])).unwrap().len();
        assert_eq!(d("divides", 2, 5), 0);
        assert_eq!(d("divides", 2, 6), 1);
        assert_eq!(d("does_not_divide", 2, 5), 1);
        assert_eq!(d("=<", 3, 3), 1);
        assert_eq!(d("=<", 4, 3), 0);
        let bad = eval(&Atom::new("=<", vec![Term::atom("a"), Term::Int(1)]));
        assert!(matches!(bad, Err(Error::Mode(m)) if m.contains("a =< 1")));
    }
}
