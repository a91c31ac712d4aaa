//! Semantics. Over a finite field every quantifier is exhausted. Over a
//! global field existential quantifiers are searched within a budget and
//! universal ones refuted within a budget, so the answer may be unknown.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{Const, Formula, Term};
use crate::error::{Error, Result};
use crate::ff::FqTable;
use crate::field::{FieldDesc, FieldElement};

/// Three-valued truth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

impl std::fmt::Display for Truth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Truth::True => "true",
            Truth::False => "false",
            Truth::Unknown => "unknown",
        };
        write!(f, "{s}")
    }
}

enum CTerm {
    Const(u16),
    Var(usize),
    Add(Box<CTerm>, Box<CTerm>),
    Sub(Box<CTerm>, Box<CTerm>),
    Mul(Box<CTerm>, Box<CTerm>),
}

enum CForm {
    Eq(CTerm, CTerm),
    Not(Box<CForm>),
    And(Vec<CForm>),
    Or(Vec<CForm>),
    Exists(usize, Box<CForm>),
    Forall(usize, Box<CForm>),
}

fn fq_const(c: &Const, t: &FqTable) -> Result<u16> {
    let p = BigInt::from(t.characteristic());
    let small = |n: &BigInt| -> u16 {
        let r = ((n % &p) + &p) % &p;
        t.from_int(r.to_i64().unwrap())
    };
    match c {
        Const::Int(n) => Ok(small(n)),
        Const::Elem(FieldElement::Rat(r)) => {
            let d = small(r.denom());
            let inv = t
                .inv(d)
                .ok_or_else(|| Error::Formula(format!("{r} has no image in F_{}", t.size())))?;
            Ok(t.mul(small(r.numer()), inv))
        }
        Const::Elem(x) => Err(Error::Formula(format!("{x} has no image in F_{}", t.size()))),
    }
}

struct Compiler<'a> {
    table: &'a FqTable,
    scope: Vec<(String, usize)>,
    slots: usize,
}

impl Compiler<'_> {
    fn lookup(&self, v: &str) -> Result<usize> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, s)| *s)
            .ok_or_else(|| Error::Formula(format!("variable '{v}' is not assigned")))
    }

    fn term(&self, t: &Term) -> Result<CTerm> {
        Ok(match t {
            Term::Const(c) => CTerm::Const(fq_const(c, self.table)?),
            Term::Var(v) => CTerm::Var(self.lookup(v)?),
            Term::Add(a, b) => CTerm::Add(Box::new(self.term(a)?), Box::new(self.term(b)?)),
            Term::Sub(a, b) => CTerm::Sub(Box::new(self.term(a)?), Box::new(self.term(b)?)),
            Term::Mul(a, b) => CTerm::Mul(Box::new(self.term(a)?), Box::new(self.term(b)?)),
        })
    }

    fn formula(&mut self, f: &Formula) -> Result<CForm> {
        Ok(match f {
            Formula::Eq(a, b) => CForm::Eq(self.term(a)?, self.term(b)?),
            Formula::Not(g) => CForm::Not(Box::new(self.formula(g)?)),
            Formula::And(gs) => CForm::And(gs.iter().map(|g| self.formula(g)).collect::<Result<_>>()?),
            Formula::Or(gs) => CForm::Or(gs.iter().map(|g| self.formula(g)).collect::<Result<_>>()?),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let slot = self.slots;
                self.slots += 1;
                self.scope.push((v.clone(), slot));
                let body = Box::new(self.formula(g)?);
                self.scope.pop();
                if matches!(f, Formula::Exists(..)) {
                    CForm::Exists(slot, body)
                } else {
                    CForm::Forall(slot, body)
                }
            }
        })
    }
}

fn fq_term(t: &CTerm, tab: &FqTable, env: &[u16]) -> u16 {
    match t {
        CTerm::Const(c) => *c,
        CTerm::Var(s) => env[*s],
        CTerm::Add(a, b) => tab.add(fq_term(a, tab, env), fq_term(b, tab, env)),
        CTerm::Sub(a, b) => tab.sub(fq_term(a, tab, env), fq_term(b, tab, env)),
        CTerm::Mul(a, b) => tab.mul(fq_term(a, tab, env), fq_term(b, tab, env)),
    }
}

fn fq_form(f: &CForm, tab: &FqTable, env: &mut Vec<u16>) -> bool {
    match f {
        CForm::Eq(a, b) => fq_term(a, tab, env) == fq_term(b, tab, env),
        CForm::Not(g) => !fq_form(g, tab, env),
        CForm::And(gs) => gs.iter().all(|g| fq_form(g, tab, env)),
        CForm::Or(gs) => gs.iter().any(|g| fq_form(g, tab, env)),
        CForm::Exists(s, g) => tab.elements().any(|x| {
            env[*s] = x;
            fq_form(g, tab, env)
        }),
        CForm::Forall(s, g) => tab.elements().all(|x| {
            env[*s] = x;
            fq_form(g, tab, env)
        }),
    }
}

/// Exact truth value over the finite field described by `table`, with
/// field elements indexed as in [`FqTable`].
pub fn eval_fq(phi: &Formula, table: &FqTable, assignment: &HashMap<String, u16>) -> Result<bool> {
    let free: Vec<String> = phi.free_vars().into_iter().collect();
    let mut c = Compiler {
        table,
        scope: Vec::new(),
        slots: 0,
    };
    let mut env = Vec::new();
    for v in &free {
        let val = *assignment
            .get(v)
            .ok_or_else(|| Error::Formula(format!("no value for free variable '{v}'")))?;
        c.scope.push((v.clone(), c.slots));
        c.slots += 1;
        env.push(val);
    }
    let cf = c.formula(phi)?;
    env.resize(c.slots, 0);
    Ok(fq_form(&cf, table, &mut env))
}

/// All values of `var` satisfying `φ`, the other free variables being fixed
/// by `params`.
pub fn fq_defined_set(
    phi: &Formula,
    table: &FqTable,
    var: &str,
    params: &HashMap<String, u16>,
) -> Result<Vec<u16>> {
    let mut env = params.clone();
    let mut out = Vec::new();
    for x in table.elements() {
        env.insert(var.to_string(), x);
        if eval_fq(phi, table, &env)? {
            out.push(x);
        }
    }
    Ok(out)
}

/// Budgets for evaluation over a global field.
#[derive(Clone, Debug)]
pub struct GlobalEval {
    pub field: FieldDesc,
    /// Candidates tried per quantifier when no equation pins the variable
    /// down.
    pub candidates: usize,
    /// Total number of atomic evaluations before giving up.
    pub fuel: usize,
    /// Values tried first for particular bound variables.
    pub hints: HashMap<String, Vec<FieldElement>>,
}

impl GlobalEval {
    pub fn new(field: FieldDesc, candidates: usize, fuel: usize) -> Self {
        GlobalEval {
            field,
            candidates,
            fuel,
            hints: HashMap::new(),
        }
    }
}

struct GlobalState<'a> {
    cfg: &'a GlobalEval,
    pool: Vec<FieldElement>,
    fuel: usize,
    env: Vec<(String, FieldElement)>,
    trail: Vec<(String, FieldElement)>,
}

/// A univariate polynomial in the variable being solved for.
type UPoly = Vec<FieldElement>;

fn u_trim(mut p: UPoly) -> UPoly {
    while p.last().is_some_and(FieldElement::is_zero) {
        p.pop();
    }
    p
}

fn u_add(a: &UPoly, b: &UPoly, sign: bool, zero: &FieldElement) -> UPoly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).unwrap_or(zero);
            let y = b.get(i).unwrap_or(zero);
            if sign {
                x + y
            } else {
                x - y
            }
        })
        .collect();
    u_trim(out)
}

fn u_mul(a: &UPoly, b: &UPoly, zero: &FieldElement) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![zero.clone(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    u_trim(out)
}

const MAX_SOLVE_DEGREE: usize = 8;

impl GlobalState<'_> {
    fn lookup(&self, v: &str) -> Option<&FieldElement> {
        self.env.iter().rev().find(|(n, _)| n == v).map(|(_, x)| x)
    }

    fn term(&self, t: &Term) -> Result<FieldElement> {
        Ok(match t {
            Term::Const(c) => c.to_element(self.cfg.field)?,
            Term::Var(v) => self
                .lookup(v)
                .cloned()
                .ok_or_else(|| Error::Formula(format!("no value for free variable '{v}'")))?,
            Term::Add(a, b) => &self.term(a)? + &self.term(b)?,
            Term::Sub(a, b) => &self.term(a)? - &self.term(b)?,
            Term::Mul(a, b) => &self.term(a)? * &self.term(b)?,
        })
    }

    /// `t` as a polynomial in `var`, if every other variable has a value
    /// and the degree stays small.
    fn upoly(&self, t: &Term, var: &str) -> Option<UPoly> {
        let zero = self.cfg.field.zero();
        let p = match t {
            Term::Const(c) => u_trim(vec![c.to_element(self.cfg.field).ok()?]),
            Term::Var(v) if v == var => vec![zero, self.cfg.field.one()],
            Term::Var(v) => u_trim(vec![self.lookup(v)?.clone()]),
            Term::Add(a, b) => u_add(&self.upoly(a, var)?, &self.upoly(b, var)?, true, &zero),
            Term::Sub(a, b) => u_add(&self.upoly(a, var)?, &self.upoly(b, var)?, false, &zero),
            Term::Mul(a, b) => u_mul(&self.upoly(a, var)?, &self.upoly(b, var)?, &zero),
        };
        (p.len() <= MAX_SOLVE_DEGREE + 1).then_some(p)
    }

    /// The roots of a nonzero polynomial when they can be computed.
    fn roots(&self, p: &UPoly) -> Option<Vec<FieldElement>> {
        let field = self.cfg.field;
        match p.len() {
            0 => None,
            1 => Some(Vec::new()),
            2 => Some(vec![-(&p[0] / &p[1])]),
            3 if field.characteristic() != 2 => {
                let (c, b, a) = (&p[0], &p[1], &p[2]);
                let disc = &(b * b) - &(&field.from_int(4) * &(a * c));
                let Some(s) = disc.sqrt() else {
                    return Some(Vec::new());
                };
                let two_a = &field.from_int(2) * a;
                let mut out = vec![&(&-b + &s) / &two_a];
                if !s.is_zero() {
                    out.push(&(&-b - &s) / &two_a);
                }
                Some(out)
            }
            3 if p[1].is_zero() => {
                let r = (&-&p[0] / &p[2]).sqrt();
                Some(r.into_iter().collect())
            }
            _ => None,
        }
    }

    /// Equations that must hold for `φ` (or, when `negated`, for `¬φ`) to
    /// be true.
    fn guards<'f>(f: &'f Formula, negated: bool, out: &mut Vec<(&'f Term, &'f Term)>) {
        match (f, negated) {
            (Formula::Eq(a, b), false) => out.push((a, b)),
            (Formula::Not(g), _) => Self::guards(g, !negated, out),
            (Formula::And(gs), false) | (Formula::Or(gs), true) => {
                gs.iter().for_each(|g| Self::guards(g, negated, out))
            }
            _ => {}
        }
    }

    /// Values to try for `v`: the roots of the first solvable guard
    /// equation, otherwise the hints followed by the height pool.
    fn candidates(&self, v: &str, body: &Formula, negated: bool) -> Vec<FieldElement> {
        let mut gs = Vec::new();
        Self::guards(body, negated, &mut gs);
        for (a, b) in gs {
            let Some(p) = self.upoly(&Term::Sub(Box::new(a.clone()), Box::new(b.clone())), v) else {
                continue;
            };
            if let Some(roots) = self.roots(&p) {
                return roots;
            }
        }
        let mut out = self.cfg.hints.get(v).cloned().unwrap_or_default();
        out.extend(self.pool.iter().cloned());
        out
    }

    fn eval(&mut self, f: &Formula) -> Result<Truth> {
        match f {
            Formula::Eq(a, b) => {
                if self.fuel == 0 {
                    return Ok(Truth::Unknown);
                }
                self.fuel -= 1;
                Ok(Truth::from_bool(self.term(a)? == self.term(b)?))
            }
            Formula::Not(g) => {
                let mark = self.trail.len();
                let r = self.eval(g)?.not();
                self.trail.truncate(mark);
                Ok(r)
            }
            Formula::And(gs) => {
                let mut acc = Truth::True;
                for g in gs {
                    match self.eval(g)? {
                        Truth::False => return Ok(Truth::False),
                        Truth::Unknown => acc = Truth::Unknown,
                        Truth::True => {}
                    }
                }
                Ok(acc)
            }
            Formula::Or(gs) => {
                let mut acc = Truth::False;
                for g in gs {
                    let mark = self.trail.len();
                    match self.eval(g)? {
                        Truth::True => return Ok(Truth::True),
                        Truth::Unknown => acc = Truth::Unknown,
                        Truth::False => {}
                    }
                    self.trail.truncate(mark);
                }
                Ok(acc)
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let exists = matches!(f, Formula::Exists(..));
                let hit = if exists { Truth::True } else { Truth::False };
                for x in self.candidates(v, g, !exists) {
                    let mark = self.trail.len();
                    self.env.push((v.clone(), x.clone()));
                    let r = self.eval(g);
                    self.env.pop();
                    let r = r?;
                    if r == hit {
                        if exists {
                            self.trail.insert(mark, (v.clone(), x));
                        }
                        return Ok(hit);
                    }
                    self.trail.truncate(mark);
                    if self.fuel == 0 {
                        break;
                    }
                }
                Ok(Truth::Unknown)
            }
        }
    }
}

/// Truth value over a global field within the budgets of `cfg`, together
/// with the existential witnesses used when the answer is `True`.
pub fn eval_global(
    phi: &Formula,
    cfg: &GlobalEval,
    assignment: &HashMap<String, FieldElement>,
) -> Result<(Truth, Vec<(String, FieldElement)>)> {
    let free: BTreeSet<String> = phi.free_vars();
    let mut env = Vec::new();
    for v in &free {
        let x = assignment
            .get(v)
            .ok_or_else(|| Error::Formula(format!("no value for free variable '{v}'")))?;
        if x.field() != cfg.field {
            return Err(Error::FieldMismatch);
        }
        env.push((v.clone(), x.clone()));
    }
    let mut h = 0;
    let mut pool = Vec::new();
    while pool.len() < cfg.candidates && h < 64 {
        pool = cfg.field.enumerate_by_height(h);
        h += 1;
    }
    if cfg.field == FieldDesc::Rationals {
        pool.insert(0, cfg.field.zero());
    }
    pool.truncate(cfg.candidates);
    let mut st = GlobalState {
        cfg,
        pool,
        fuel: cfg.fuel,
        env,
        trail: Vec::new(),
    };
    let t = st.eval(phi)?;
    let witnesses = if t == Truth::True { st.trail } else { Vec::new() };
    Ok((t, witnesses))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, u16)]) -> HashMap<String, u16> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn squares_mod_5() {
        let t = FqTable::new(5).unwrap();
        let f = Formula::parse("exists y. y*y = x").unwrap();
        assert!(eval_fq(&f, &t, &env(&[("x", 4)])).unwrap());
        assert!(!eval_fq(&f, &t, &env(&[("x", 2)])).unwrap());
        assert_eq!(fq_defined_set(&f, &t, "x", &HashMap::new()).unwrap(), vec![0, 1, 4]);
    }

    #[test]
    fn global_search_cannot_refute() {
        let q = FieldDesc::Rationals;
        let cfg = GlobalEval::new(q, 200, 1_000_000);
        let f = Formula::parse("exists y. y*y = x").unwrap();
        let at = |x: i64| HashMap::from([("x".to_string(), q.from_int(x))]);
        let (t, w) = eval_global(&f, &cfg, &at(4)).unwrap();
        assert_eq!(t, Truth::True);
        assert_eq!(w[0].0, "y");
        assert_eq!(w[0].1.square(), q.from_int(4));
        assert_eq!(eval_global(&f, &cfg, &at(2)).unwrap().0, Truth::Unknown);
        let g = Formula::parse("exists y. y*y = 2").unwrap();
        assert_eq!(eval_global(&g, &cfg, &HashMap::new()).unwrap().0, Truth::Unknown);
    }

    #[test]
    fn universal_counterexamples() {
        let q = FieldDesc::Rationals;
        let cfg = GlobalEval::new(q, 100, 1_000_000);
        let f = Formula::parse("forall z. ~(x*z = 1) | ~(z = 3)").unwrap();
        let at = |n: i64, d: i64| HashMap::from([("x".to_string(), q.from_ratio(n, d))]);
        assert_eq!(eval_global(&f, &cfg, &at(1, 3)).unwrap().0, Truth::False);
        assert_eq!(eval_global(&f, &cfg, &at(1, 2)).unwrap().0, Truth::Unknown);
        let g = Formula::parse("x = 0 | ~(x = 0)").unwrap();
        assert_eq!(eval_global(&g, &cfg, &at(1, 2)).unwrap().0, Truth::True);
    }
}
