//! First-order formulas in the language of rings with constants, together
//! with the builders for the definitions of `Σ`, `J^c`, `H^c`, `Φ^S_u` and
//! `⋃_{v ∉ S} m_v`, rank bookkeeping, transformations and evaluation.

mod build;
mod eval;
mod syntax;
mod transform;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{FieldDesc, FieldElement};

pub use build::*;
pub use eval::{eval_fq, eval_global, fq_defined_set, GlobalEval, Truth};
pub use syntax::parse_in;
pub use transform::{combine, dualize, nnf, prenex, root_free_form, to_diophantine, Ambient, Connective};

/// A constant: an integer, meaningful in every ring, or an element of a
/// specific global field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Const {
    Int(BigInt),
    Elem(FieldElement),
}

impl Const {
    /// Integers and constant field elements are stored as `Int`.
    pub fn from_element(x: &FieldElement) -> Const {
        match x {
            FieldElement::Rat(r) if r.is_integer() => Const::Int(r.numer().clone()),
            FieldElement::Fun(f) if f.den().is_one() && f.num().is_constant() => {
                Const::Int(BigInt::from(f.num().coeff(0)))
            }
            _ => Const::Elem(x.clone()),
        }
    }

    pub fn to_element(&self, field: FieldDesc) -> Result<FieldElement> {
        match self {
            Const::Int(n) => {
                let p = field.characteristic();
                if p == 0 {
                    Ok(FieldElement::Rat(num_rational::BigRational::from_integer(n.clone())))
                } else {
                    let r = crate::arith::mod_bigint(n, &BigInt::from(p));
                    Ok(field.from_int(r.to_i64().unwrap()))
                }
            }
            Const::Elem(x) if x.field() == field => Ok(x.clone()),
            Const::Elem(x) => Err(Error::Formula(format!("constant {x} does not live in {field}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Const),
    Var(String),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn int(n: i64) -> Term {
        Term::Const(Const::Int(BigInt::from(n)))
    }

    pub fn elem(x: &FieldElement) -> Term {
        Term::Const(Const::from_element(x))
    }

    fn as_int(&self) -> Option<&BigInt> {
        match self {
            Term::Const(Const::Int(n)) => Some(n),
            _ => None,
        }
    }

    /// Sum with the obvious `0 + t = t` folding.
    pub fn add(a: Term, b: Term) -> Term {
        if a.as_int().is_some_and(Zero::is_zero) {
            return b;
        }
        if b.as_int().is_some_and(Zero::is_zero) {
            return a;
        }
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        if b.as_int().is_some_and(Zero::is_zero) {
            return a;
        }
        Term::Sub(Box::new(a), Box::new(b))
    }

    /// Product with `1 * t = t` folding.
    pub fn mul(a: Term, b: Term) -> Term {
        if a.as_int().is_some_and(One::is_one) {
            return b;
        }
        if b.as_int().is_some_and(One::is_one) {
            return a;
        }
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn square(&self) -> Term {
        Term::mul(self.clone(), self.clone())
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
        }
    }

    pub fn subst(&self, map: &HashMap<String, Term>) -> Term {
        match self {
            Term::Const(_) => self.clone(),
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Add(a, b) => Term::Add(Box::new(a.subst(map)), Box::new(b.subst(map))),
            Term::Sub(a, b) => Term::Sub(Box::new(a.subst(map)), Box::new(b.subst(map))),
            Term::Mul(a, b) => Term::Mul(Box::new(a.subst(map)), Box::new(b.subst(map))),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Const(_) | Term::Var(_) => 1,
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => 1 + a.size() + b.size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

/// Shape of a formula once negations are pushed to the atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    QuantifierFree,
    Existential,
    Universal,
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn is_zero(t: Term) -> Formula {
        Formula::Eq(t, Term::int(0))
    }

    pub fn nonzero(t: Term) -> Formula {
        Formula::Not(Box::new(Formula::is_zero(t)))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(parts: Vec<Formula>) -> Formula {
        assert!(!parts.is_empty());
        if parts.len() == 1 {
            return parts.into_iter().next().unwrap();
        }
        Formula::And(parts)
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        assert!(!parts.is_empty());
        if parts.len() == 1 {
            return parts.into_iter().next().unwrap();
        }
        Formula::Or(parts)
    }

    pub fn exists(vars: &[String], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::Exists(v.clone(), Box::new(acc)))
    }

    pub fn forall(vars: &[String], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::Forall(v.clone(), Box::new(acc)))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Eq(a, b) => {
                let mut s = BTreeSet::new();
                a.free_vars(&mut s);
                b.free_vars(&mut s);
                out.extend(s.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> HashSet<String> {
        let mut out = HashSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut HashSet<String>) {
        match self {
            Formula::Eq(a, b) => {
                let mut s = BTreeSet::new();
                a.free_vars(&mut s);
                b.free_vars(&mut s);
                out.extend(s);
            }
            Formula::Not(f) => f.collect_all(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_all(out)),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                out.insert(v.clone());
                f.collect_all(out);
            }
        }
    }

    /// Simultaneous capture-avoiding substitution of terms for free
    /// variables.
    pub fn subst(&self, map: &HashMap<String, Term>) -> Formula {
        let mut avoid: HashSet<String> = self.all_vars();
        for t in map.values() {
            let mut s = BTreeSet::new();
            t.free_vars(&mut s);
            avoid.extend(s);
        }
        self.subst_inner(map, &mut avoid)
    }

    fn subst_inner(&self, map: &HashMap<String, Term>, avoid: &mut HashSet<String>) -> Formula {
        match self {
            Formula::Eq(a, b) => Formula::Eq(a.subst(map), b.subst(map)),
            Formula::Not(f) => Formula::not(f.subst_inner(map, avoid)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.subst_inner(map, avoid)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.subst_inner(map, avoid)).collect()),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let mut inner = map.clone();
                inner.remove(v);
                let captures = inner.values().any(|t| {
                    let mut s = BTreeSet::new();
                    t.free_vars(&mut s);
                    s.contains(v)
                });
                let (name, body) = if captures {
                    let fresh = fresh_name(v, avoid);
                    avoid.insert(fresh.clone());
                    inner.insert(v.clone(), Term::Var(fresh.clone()));
                    (fresh, f.subst_inner(&inner, avoid))
                } else {
                    (v.clone(), f.subst_inner(&inner, avoid))
                };
                match self {
                    Formula::Exists(..) => Formula::Exists(name, Box::new(body)),
                    _ => Formula::Forall(name, Box::new(body)),
                }
            }
        }
    }

    /// Renames every bound variable to a name outside `avoid`, recording
    /// the new names in `avoid`.
    pub fn rename_bound(&self, avoid: &mut HashSet<String>) -> Formula {
        match self {
            Formula::Eq(..) => self.clone(),
            Formula::Not(f) => Formula::not(f.rename_bound(avoid)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.rename_bound(avoid)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.rename_bound(avoid)).collect()),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let fresh = fresh_name(v, avoid);
                avoid.insert(fresh.clone());
                let map = HashMap::from([(v.clone(), Term::Var(fresh.clone()))]);
                let body = f.subst(&map).rename_bound(avoid);
                match self {
                    Formula::Exists(..) => Formula::Exists(fresh, Box::new(body)),
                    _ => Formula::Forall(fresh, Box::new(body)),
                }
            }
        }
    }

    /// Polarity and rank, following the counting rules: for existential
    /// formulas conjunction adds and disjunction takes the maximum, dually
    /// for universal ones.
    pub fn measure(&self) -> Result<(Polarity, usize)> {
        measure(self, false)
    }

    pub fn rank(&self) -> Result<usize> {
        self.measure().map(|(_, r)| r)
    }

    pub fn polarity(&self) -> Result<Polarity> {
        self.measure().map(|(p, _)| p)
    }

    /// Number of quantifier symbols.
    pub fn quantifier_count(&self) -> usize {
        match self {
            Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_count(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::quantifier_count).sum(),
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.quantifier_count(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Eq(a, b) => 1 + a.size() + b.size(),
            Formula::Not(f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.size(),
        }
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        alpha(self, other, &mut Vec::new())
    }

    pub fn parse(s: &str) -> Result<Formula> {
        syntax::parse_in(FieldDesc::Rationals, s)
    }
}

fn merge_polarity(a: Polarity, b: Polarity) -> Result<Polarity> {
    use Polarity::*;
    match (a, b) {
        (QuantifierFree, p) | (p, QuantifierFree) => Ok(p),
        (p, q) if p == q => Ok(p),
        _ => Err(Error::Formula("mixed existential and universal quantifiers".into())),
    }
}

fn measure(f: &Formula, negated: bool) -> Result<(Polarity, usize)> {
    match f {
        Formula::Eq(..) => Ok((Polarity::QuantifierFree, 0)),
        Formula::Not(g) => measure(g, !negated),
        Formula::And(fs) | Formula::Or(fs) => {
            let conj = matches!(f, Formula::And(_)) != negated;
            let mut pol = Polarity::QuantifierFree;
            let mut parts = Vec::with_capacity(fs.len());
            for g in fs {
                let (p, r) = measure(g, negated)?;
                pol = merge_polarity(pol, p)?;
                parts.push(r);
            }
            let adds = match pol {
                Polarity::QuantifierFree => true,
                Polarity::Existential => conj,
                Polarity::Universal => !conj,
            };
            let r = if adds {
                parts.iter().sum()
            } else {
                parts.iter().copied().max().unwrap_or(0)
            };
            Ok((pol, r))
        }
        Formula::Exists(_, g) | Formula::Forall(_, g) => {
            let exists = matches!(f, Formula::Exists(..)) != negated;
            let here = if exists {
                Polarity::Existential
            } else {
                Polarity::Universal
            };
            let (p, r) = measure(g, negated)?;
            Ok((merge_polarity(here, p)?, r + 1))
        }
    }
}

fn alpha_term(a: &Term, b: &Term, env: &[(String, String)]) -> bool {
    match (a, b) {
        (Term::Const(x), Term::Const(y)) => x == y,
        (Term::Var(x), Term::Var(y)) => {
            for (l, r) in env.iter().rev() {
                if l == x || r == y {
                    return l == x && r == y;
                }
            }
            x == y
        }
        (Term::Add(a1, a2), Term::Add(b1, b2))
        | (Term::Sub(a1, a2), Term::Sub(b1, b2))
        | (Term::Mul(a1, a2), Term::Mul(b1, b2)) => {
            alpha_term(a1, b1, env) && alpha_term(a2, b2, env)
        }
        _ => false,
    }
}

fn alpha(a: &Formula, b: &Formula, env: &mut Vec<(String, String)>) -> bool {
    match (a, b) {
        (Formula::Eq(a1, a2), Formula::Eq(b1, b2)) => {
            alpha_term(a1, b1, env) && alpha_term(a2, b2, env)
        }
        (Formula::Not(x), Formula::Not(y)) => alpha(x, y, env),
        (Formula::And(xs), Formula::And(ys)) | (Formula::Or(xs), Formula::Or(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| alpha(x, y, env))
        }
        (Formula::Exists(u, x), Formula::Exists(v, y))
        | (Formula::Forall(u, x), Formula::Forall(v, y)) => {
            env.push((u.clone(), v.clone()));
            let ok = alpha(x, y, env);
            env.pop();
            ok
        }
        _ => false,
    }
}

/// `base` itself if unused, otherwise `base` with the smallest numeric
/// suffix that is.
pub fn fresh_name(base: &str, avoid: &HashSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !avoid.contains(n))
        .unwrap()
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        syntax::write_term(self, 0, f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        syntax::write_formula(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_rules() {
        let e3 = Formula::parse("exists a. exists b. exists c. x = a*b*c").unwrap();
        let e4 = Formula::parse("exists a. exists b. exists c. exists d. x = a + b + c + d").unwrap();
        assert_eq!(e3.rank().unwrap(), 3);
        assert_eq!(combine(&e3, &e4, Connective::And).unwrap().rank().unwrap(), 7);
        assert_eq!(combine(&e3, &e4, Connective::Or).unwrap().rank().unwrap(), 4);
        let mixed = Formula::parse("(exists y. x = y) & (forall y. x = y)").unwrap();
        assert!(mixed.rank().is_err());
        let neg = Formula::parse("~(exists y. x*y = 1) | ~(exists z. z*z = x)").unwrap();
        assert_eq!(neg.measure().unwrap(), (Polarity::Universal, 2));
    }

    #[test]
    fn substitution_avoids_capture() {
        let f = Formula::parse("exists y. x*y = 1").unwrap();
        let g = f.subst(&HashMap::from([("x".to_string(), Term::var("y"))]));
        assert!(g.free_vars().contains("y"));
        assert!(g.alpha_eq(&Formula::parse("exists z. y*z = 1").unwrap()));
        assert!(!g.alpha_eq(&Formula::parse("exists y. y*y = 1").unwrap()));
    }

    #[test]
    fn fresh_names() {
        let avoid: HashSet<String> = ["y".to_string(), "y1".to_string()].into();
        assert_eq!(fresh_name("y", &avoid), "y2");
        assert_eq!(fresh_name("z", &avoid), "z");
    }
}
