//! Concrete syntax.
//!
//! ```text
//! formula := ("exists" | "forall") ident ("," ident)* "." formula | or
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "~" unary | "(" formula ")" | term "=" term
//! term    := prod (("+" | "-") prod)*
//! prod    := factor ("*" factor)*
//! factor  := integer | ident | "[" element "]" | "(" term ")" | "-" factor
//! ```
//!
//! Bracketed literals are elements of the ambient global field, e.g.
//! `[1/5]` or `[T^2+1]`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;

use super::{Const, Formula, Term};
use crate::error::{Error, Result};
use crate::field::FieldDesc;

pub(super) fn write_term(t: &Term, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Const(Const::Int(n)) if n.is_negative() => write!(f, "({n})"),
        Term::Const(Const::Int(n)) => write!(f, "{n}"),
        Term::Const(Const::Elem(x)) => write!(f, "[{x}]"),
        Term::Var(v) => write!(f, "{v}"),
        Term::Add(a, b) | Term::Sub(a, b) => {
            if ctx > 1 {
                write!(f, "(")?;
            }
            write_term(a, 1, f)?;
            write!(f, "{}", if matches!(t, Term::Add(..)) { " + " } else { " - " })?;
            write_term(b, 2, f)?;
            if ctx > 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Mul(a, b) => {
            if ctx > 2 {
                write!(f, "(")?;
            }
            write_term(a, 2, f)?;
            write!(f, "*")?;
            write_term(b, 3, f)?;
            if ctx > 2 {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

fn write_prec(phi: &Formula, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = match phi {
        Formula::Exists(..) | Formula::Forall(..) => 0,
        Formula::Or(_) => 1,
        Formula::And(_) => 2,
        Formula::Not(_) => 3,
        Formula::Eq(..) => 4,
    };
    let paren = ctx > own;
    if paren {
        write!(f, "(")?;
    }
    match phi {
        Formula::Eq(a, b) => {
            write_term(a, 0, f)?;
            write!(f, " = ")?;
            write_term(b, 0, f)?;
        }
        Formula::Not(g) => {
            write!(f, "~")?;
            write_prec(g, 5, f)?;
        }
        Formula::And(gs) | Formula::Or(gs) => {
            let sep = if own == 2 { " & " } else { " | " };
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    write!(f, "{sep}")?;
                }
                write_prec(g, own + 1, f)?;
            }
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let kw = if matches!(phi, Formula::Exists(..)) {
                "exists"
            } else {
                "forall"
            };
            write!(f, "{kw} {v}. ")?;
            write_prec(g, 0, f)?;
        }
    }
    if paren {
        write!(f, ")")?;
    }
    Ok(())
}

pub(super) fn write_formula(phi: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write_prec(phi, 0, f)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Lit(String),
    Sym(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let (pos, ch) = bytes[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].1.is_ascii_alphanumeric() || bytes[i].1 == '_') {
                i += 1;
            }
            let word: String = bytes[start..i].iter().map(|&(_, c)| c).collect();
            out.push((pos, Tok::Ident(word)));
        } else if ch.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].1.is_ascii_digit() {
                i += 1;
            }
            let digits: String = bytes[start..i].iter().map(|&(_, c)| c).collect();
            out.push((pos, Tok::Int(digits.parse().unwrap())));
        } else if ch == '[' {
            let start = i + 1;
            while i < bytes.len() && bytes[i].1 != ']' {
                i += 1;
            }
            if i == bytes.len() {
                return Err(Error::parse(pos, "unterminated literal"));
            }
            let lit: String = bytes[start..i].iter().map(|&(_, c)| c).collect();
            out.push((pos, Tok::Lit(lit)));
            i += 1;
        } else if "+-*()=~&|.,".contains(ch) {
            out.push((pos, Tok::Sym(ch)));
            i += 1;
        } else {
            return Err(Error::parse(pos, format!("unexpected character '{ch}'")));
        }
    }
    Ok(out)
}

struct Parser {
    field: FieldDesc,
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::parse(self.pos(), format!("expected '{c}'")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(w)) if w != "exists" && w != "forall" => {
                let w = w.clone();
                self.at += 1;
                Ok(w)
            }
            _ => Err(Error::parse(self.pos(), "expected a variable name")),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        if let Some(Tok::Ident(w)) = self.peek() {
            if w == "exists" || w == "forall" {
                let exists = w == "exists";
                self.at += 1;
                let mut vars = vec![self.ident()?];
                while self.eat(',') {
                    vars.push(self.ident()?);
                }
                self.expect('.')?;
                let body = self.formula()?;
                return Ok(if exists {
                    Formula::exists(&vars, body)
                } else {
                    Formula::forall(&vars, body)
                });
            }
        }
        self.or()
    }

    fn or(&mut self) -> Result<Formula> {
        let mut parts = vec![self.and()?];
        while self.eat('|') {
            parts.push(self.and()?);
        }
        Ok(Formula::or(parts))
    }

    fn and(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while self.eat('&') {
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat('~') {
            return Ok(Formula::not(self.unary()?));
        }
        if let Some(Tok::Ident(w)) = self.peek() {
            if w == "exists" || w == "forall" {
                return self.formula();
            }
        }
        if self.peek() == Some(&Tok::Sym('(')) {
            let save = self.at;
            match self.atom() {
                Ok(f) => return Ok(f),
                Err(atom_err) => {
                    let atom_at = self.at;
                    self.at = save + 1;
                    match self.formula().and_then(|f| self.expect(')').map(|_| f)) {
                        Ok(f) => return Ok(f),
                        Err(e) => {
                            return Err(if self.at >= atom_at { e } else { atom_err });
                        }
                    }
                }
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula> {
        let lhs = self.term()?;
        self.expect('=')?;
        let rhs = self.term()?;
        Ok(Formula::Eq(lhs, rhs))
    }

    fn term(&mut self) -> Result<Term> {
        let mut acc = self.prod()?;
        loop {
            if self.eat('+') {
                acc = Term::Add(Box::new(acc), Box::new(self.prod()?));
            } else if self.eat('-') {
                acc = Term::Sub(Box::new(acc), Box::new(self.prod()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn prod(&mut self) -> Result<Term> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            acc = Term::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Term> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.at += 1;
                Ok(Term::Const(Const::Int(n)))
            }
            Some(Tok::Lit(s)) => {
                self.at += 1;
                let x = self
                    .field
                    .parse_element(&s)
                    .map_err(|e| Error::parse(pos, format!("bad literal [{s}]: {e}")))?;
                Ok(Term::Const(Const::from_element(&x)))
            }
            Some(Tok::Ident(_)) => Ok(Term::Var(self.ident()?)),
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let t = self.term()?;
                self.expect(')')?;
                Ok(t)
            }
            Some(Tok::Sym('-')) => {
                self.at += 1;
                match self.factor()? {
                    Term::Const(Const::Int(n)) => Ok(Term::Const(Const::Int(-n))),
                    t => Ok(Term::Mul(Box::new(Term::int(-1)), Box::new(t))),
                }
            }
            _ => Err(Error::parse(pos, "expected a term")),
        }
    }
}

/// Parses a formula whose bracketed literals live in `field`.
pub fn parse_in(field: FieldDesc, s: &str) -> Result<Formula> {
    let mut p = Parser {
        field,
        toks: lex(s)?,
        at: 0,
        end: s.len(),
    };
    let f = p.formula()?;
    if p.at != p.toks.len() {
        return Err(Error::parse(p.pos(), "unexpected trailing input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(s: &str) {
        let f = Formula::parse(s).unwrap();
        let printed = f.to_string();
        let g = Formula::parse(&printed).unwrap();
        assert!(f.alpha_eq(&g), "{s} -> {printed}");
        assert_eq!(printed, g.to_string());
    }

    #[test]
    fn parse_and_print() {
        let f = Formula::parse("exists y. x*y = 1").unwrap();
        assert_eq!(f.rank().unwrap(), 1);
        assert_eq!(f.to_string(), "exists y. x*y = 1");
        roundtrip("~(x = 0) & (exists y. (x - 1)*y = 1 | x = 2)");
        roundtrip("forall z. x = 0 | ~(x*z = 1) | ~(exists y. z = y*y)");
        roundtrip("x - (y - z) = (-3)*x*(y*z)");
        roundtrip("(x = 0 & y = 0) | (x = 1 & (y = 1 | y = 2))");
        roundtrip("exists a, b. a*a + b*b = x - -2");
    }

    #[test]
    fn literals_in_function_fields() {
        let f2 = FieldDesc::function_field(2).unwrap();
        let f = parse_in(f2, "x*x - [T] = [T^2+1]").unwrap();
        let g = parse_in(f2, &f.to_string()).unwrap();
        assert_eq!(f, g);
        let q = parse_in(FieldDesc::Rationals, "x = [1/5]").unwrap();
        assert_eq!(q.to_string(), "x = [1/5]");
        assert_eq!(parse_in(FieldDesc::Rationals, "x = [4/2]").unwrap().to_string(), "x = 2");
    }

    #[test]
    fn errors_carry_positions() {
        match Formula::parse("exists . x = 1") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 7),
            other => panic!("{other:?}"),
        }
        match Formula::parse("x = 1 &") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 7),
            other => panic!("{other:?}"),
        }
        match Formula::parse("x = $") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(Formula::parse("(x = 1").is_err());
        assert!(Formula::parse("x + 1").is_err());
    }
}
