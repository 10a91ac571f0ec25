//! A small prefix language for entourage arithmetic on one tower.
//!
//! ```text
//! expr  := atom
//!        | (sum expr expr ...)          left-to-right composition
//!        | (mul k expr)                 k-fold multiple, k ≥ 1
//!        | (sigma k [expr ...] tail)    sum of a sequence starting at level k
//!        | (ball point expr)            a ball, only at the outermost position
//! tail  := last | n | expr              ω-sum repeating the last entry,
//!                                       finite sum up to level n, or ω-sum
//!                                       with the given top-level tail
//! atom  := NAME | diag:n | full:n | zero:n | lt:n:eps
//! ```
//!
//! `NAME` refers to an entourage of the tower file; `lt:n:eps` is
//! `{d⁽ⁿ⁾ < eps}`. A point is an index or a label.

use std::collections::BTreeMap;

use crate::bits::PointSet;
use crate::error::{Error, Result};
use crate::rational;
use crate::relation::{ball, compose, multiple, sigma_sum, Entourage, EntourageSequence, TailPolicy, Upto};
use crate::tower::Tower;

#[derive(Clone, PartialEq, Eq, Debug)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
    Bracket(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_whitespace() || "()[]".contains(c) {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            if !c.is_whitespace() {
                tokens.push(c.to_string());
            }
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn parse_sexp(tokens: &[String], pos: &mut usize) -> Result<Sexp> {
    let token = tokens
        .get(*pos)
        .ok_or_else(|| Error::Expr("unexpected end of expression".into()))?;
    *pos += 1;
    let close = match token.as_str() {
        "(" => ")",
        "[" => "]",
        ")" | "]" => return Err(Error::Expr(format!("unexpected {token:?}"))),
        _ => return Ok(Sexp::Atom(token.clone())),
    };
    let mut items = Vec::new();
    loop {
        match tokens.get(*pos) {
            None => return Err(Error::Expr(format!("missing {close:?}"))),
            Some(t) if t == close => {
                *pos += 1;
                break;
            }
            Some(_) => items.push(parse_sexp(tokens, pos)?),
        }
    }
    Ok(if close == ")" {
        Sexp::List(items)
    } else {
        Sexp::Bracket(items)
    })
}

fn parse(text: &str) -> Result<Sexp> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let sexp = parse_sexp(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(Error::Expr(format!("trailing input after {:?}", tokens[pos - 1])));
    }
    Ok(sexp)
}

/// What an expression evaluates to.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Value {
    Entourage(Entourage),
    Ball { center: usize, set: PointSet },
}

struct Env<'a> {
    tower: &'a Tower,
    named: &'a BTreeMap<String, Entourage>,
}

fn number(text: &str) -> Result<usize> {
    text.parse()
        .map_err(|_| Error::Expr(format!("expected a natural number, got {text:?}")))
}

impl Env<'_> {
    fn point(&self, text: &str) -> Result<usize> {
        let x = match self.tower.index_of(text) {
            Some(x) => x,
            None => number(text)?,
        };
        self.tower.check_index(x)?;
        Ok(x)
    }

    fn atom(&self, name: &str) -> Result<Entourage> {
        if let Some(e) = self.named.get(name) {
            return Ok(e.clone());
        }
        let parts: Vec<&str> = name.split(':').collect();
        let level = |s: &str| -> Result<usize> {
            let n = number(s)?;
            self.tower.check_level(n)?;
            Ok(n)
        };
        match parts.as_slice() {
            ["diag", n] => Ok(Entourage::diagonal(self.tower, level(n)?)),
            ["full", n] => Ok(Entourage::full(self.tower, level(n)?)),
            ["zero", n] => Ok(self.tower.zero_entourage(level(n)?)),
            ["lt", n, eps] => {
                let eps = rational::parse(eps)?;
                if !rational::is_positive(&eps) {
                    return Err(Error::Expr(format!("radius of {name:?} must be positive")));
                }
                Ok(self.tower.grid_entourage(level(n)?, &eps))
            }
            _ => Err(Error::Expr(format!("unknown entourage {name:?}"))),
        }
    }

    fn entourage(&self, e: &Sexp) -> Result<Entourage> {
        let items = match e {
            Sexp::Atom(name) => return self.atom(name),
            Sexp::Bracket(_) => return Err(Error::Expr("a [list] is only allowed inside sigma".into())),
            Sexp::List(items) => items,
        };
        let head = match items.first() {
            Some(Sexp::Atom(h)) => h.as_str(),
            _ => return Err(Error::Expr("a list must start with an operator".into())),
        };
        let args = &items[1..];
        match (head, args) {
            ("sum", [first, rest @ ..]) if !rest.is_empty() => {
                let mut acc = self.entourage(first)?;
                for e in rest {
                    acc = compose(&acc, &self.entourage(e)?)?;
                }
                Ok(acc)
            }
            ("mul", [Sexp::Atom(k), u]) => multiple(&self.entourage(u)?, number(k)?),
            ("sigma", [Sexp::Atom(k), Sexp::Bracket(entries), tail]) => {
                let start = number(k)?;
                let entries = entries.iter().map(|e| self.entourage(e)).collect::<Result<Vec<_>>>()?;
                let (policy, upto) = match tail {
                    Sexp::Atom(t) if t == "last" => (TailPolicy::RepeatLast, Upto::Omega),
                    Sexp::Atom(t) if t.chars().all(|c| c.is_ascii_digit()) => {
                        (TailPolicy::RepeatLast, Upto::Level(number(t)?))
                    }
                    other => (TailPolicy::Given(self.entourage(other)?), Upto::Omega),
                };
                let seq = EntourageSequence::new(self.tower, start, entries, policy)?;
                sigma_sum(&seq, upto)
            }
            ("ball", _) => Err(Error::Expr("ball must be the outermost operator".into())),
            _ => Err(Error::Expr(format!("bad arguments for {head:?}"))),
        }
    }
}

/// Evaluates `text` over `tower` and the named entourages of its file.
pub fn evaluate(tower: &Tower, named: &BTreeMap<String, Entourage>, text: &str) -> Result<Value> {
    let env = Env { tower, named };
    let sexp = parse(text)?;
    if let Sexp::List(items) = &sexp {
        if let [Sexp::Atom(head), Sexp::Atom(x), u] = items.as_slice() {
            if head == "ball" {
                let center = env.point(x)?;
                let u = env.entourage(u)?;
                return Ok(Value::Ball {
                    center,
                    set: ball(center, &u)?,
                });
            }
        }
    }
    env.entourage(&sexp).map(Value::Entourage)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t1;

    fn eval(text: &str) -> Result<Value> {
        let t = t1();
        let mut named = BTreeMap::new();
        named.insert("U".to_string(), t.grid_entourage(2, &rational::int(2)));
        evaluate(&t, &named, text)
    }

    fn pairs(v: Value) -> Vec<(usize, usize)> {
        match v {
            Value::Entourage(e) => e.relation().pairs().filter(|(i, j)| i != j).collect(),
            other => panic!("not an entourage: {other:?}"),
        }
    }

    #[test]
    fn arithmetic() {
        assert_eq!(pairs(eval("U").unwrap()), vec![(0, 1), (1, 0), (1, 2), (2, 1)]);
        assert_eq!(pairs(eval("(sum U U)").unwrap()).len(), 6);
        assert_eq!(eval("(mul 2 U)").unwrap(), eval("(sum U U)").unwrap());
        assert_eq!(
            pairs(eval("(sum diag:0 lt:2:3/2)").unwrap()),
            vec![(0, 1), (1, 0), (1, 2), (2, 1)]
        );
    }

    #[test]
    fn balls_and_sums() {
        // A diagonal on level 0 promoted through level 1 (full) reaches b,
        // and level 2 (diagonal) adds nothing more.
        let v = eval("(ball a (sigma 0 [diag:0 full:1 diag:2] 2))").unwrap();
        assert_eq!(
            v,
            Value::Ball {
                center: 0,
                set: PointSet::from_indices(3, [0, 1])
            }
        );
        let v = eval("(ball 0 (sigma 0 [diag:0 full:1 diag:2] lt:2:2))").unwrap();
        assert_eq!(
            v,
            Value::Ball {
                center: 0,
                set: PointSet::full(3)
            }
        );
        let v = eval("(ball c (sigma 2 [diag:2] last))").unwrap();
        assert_eq!(
            v,
            Value::Ball {
                center: 2,
                set: PointSet::singleton(3, 2)
            }
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(eval("(sum U").unwrap_err(), Error::Expr(_)));
        assert!(matches!(eval("V").unwrap_err(), Error::Expr(_)));
        assert!(matches!(eval("lt:2:0").unwrap_err(), Error::Expr(_)));
        assert_eq!(eval("(mul 0 U)").unwrap_err(), Error::ZeroMultiple);
        assert_eq!(
            eval("full:7").unwrap_err(),
            Error::LevelOutOfRange { level: 7, levels: 3 }
        );
        assert!(matches!(eval("(sum (ball a U) U)").unwrap_err(), Error::Expr(_)));
        assert!(matches!(eval("U U").unwrap_err(), Error::Expr(_)));
    }
}
