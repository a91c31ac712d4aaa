//! Rank-respecting transformations: combination, negation normal form,
//! prenex form, dualization and conversion to a single equation.

use std::collections::{HashMap, HashSet};

use super::{fresh_name, merge_polarity, Const, Formula, Polarity, Term};
use crate::error::{Error, Result};
use crate::ff::prime_power;
use crate::field::FieldDesc;
use crate::poly::monic_irreducibles;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connective {
    And,
    Or,
}

/// Where a formula is meant to be interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ambient {
    Global(FieldDesc),
    /// The finite field with `q` elements.
    Finite(u64),
}

/// `φ ∧ ψ` or `φ ∨ ψ` with the bound variables renamed apart. Both inputs
/// must have the same polarity.
pub fn combine(phi: &Formula, psi: &Formula, op: Connective) -> Result<Formula> {
    merge_polarity(phi.polarity()?, psi.polarity()?)?;
    let mut avoid: HashSet<String> = phi.free_vars().into_iter().collect();
    avoid.extend(psi.free_vars());
    let left = phi.rename_bound(&mut avoid);
    let right = psi.rename_bound(&mut avoid);
    Ok(match op {
        Connective::And => Formula::And(vec![left, right]),
        Connective::Or => Formula::Or(vec![left, right]),
    })
}

/// Negation normal form: negations only in front of equations.
pub fn nnf(phi: &Formula) -> Formula {
    push(phi, false)
}

fn push(phi: &Formula, neg: bool) -> Formula {
    match phi {
        Formula::Eq(..) if neg => Formula::not(phi.clone()),
        Formula::Eq(..) => phi.clone(),
        Formula::Not(g) => push(g, !neg),
        Formula::And(gs) | Formula::Or(gs) => {
            let parts = gs.iter().map(|g| push(g, neg)).collect();
            if matches!(phi, Formula::And(_)) != neg {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let body = Box::new(push(g, neg));
            if matches!(phi, Formula::Exists(..)) != neg {
                Formula::Exists(v.clone(), body)
            } else {
                Formula::Forall(v.clone(), body)
            }
        }
    }
}

/// Prenex form `(quantified variables, quantifier-free matrix)` of an
/// existential or universal formula whose prefix length equals the rank:
/// the blocks of the arms of a disjunction (dually conjunction) share
/// variables.
pub fn prenex(phi: &Formula) -> Result<(Polarity, Vec<String>, Formula)> {
    let pol = phi.polarity()?;
    let mut avoid: HashSet<String> = phi.free_vars().into_iter().collect();
    let f = nnf(phi).rename_bound(&mut avoid);
    let (vars, m) = prenex_rec(&f, pol);
    Ok((pol, vars, m))
}

fn prenex_rec(phi: &Formula, pol: Polarity) -> (Vec<String>, Formula) {
    match phi {
        Formula::Eq(..) | Formula::Not(_) => (Vec::new(), phi.clone()),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let (mut vars, m) = prenex_rec(g, pol);
            vars.insert(0, v.clone());
            (vars, m)
        }
        Formula::And(gs) | Formula::Or(gs) => {
            let conj = matches!(phi, Formula::And(_));
            let parts: Vec<(Vec<String>, Formula)> = gs.iter().map(|g| prenex_rec(g, pol)).collect();
            let shares = (pol == Polarity::Existential) != conj;
            let rebuild = |ms: Vec<Formula>| {
                if conj {
                    Formula::And(ms)
                } else {
                    Formula::Or(ms)
                }
            };
            if shares {
                let shared = parts
                    .iter()
                    .max_by_key(|(vs, _)| vs.len())
                    .map(|(vs, _)| vs.clone())
                    .unwrap_or_default();
                let ms = parts
                    .into_iter()
                    .map(|(vs, m)| {
                        let map: HashMap<String, Term> = vs
                            .iter()
                            .zip(&shared)
                            .map(|(a, b)| (a.clone(), Term::Var(b.clone())))
                            .collect();
                        m.subst(&map)
                    })
                    .collect();
                (shared, rebuild(ms))
            } else {
                let mut vars = Vec::new();
                let mut ms = Vec::new();
                for (vs, m) in parts {
                    vars.extend(vs);
                    ms.push(m);
                }
                (vars, rebuild(ms))
            }
        }
    }
}

/// `∀z: x = 0 ∨ ¬(xz = 1) ∨ ¬φ(z)`: if `φ(x)` defines `U`, the result
/// defines `(K \ U^{-1}) ∪ {0}`, with rank one more than `φ`.
pub fn dualize(phi: &Formula, x: &str) -> Result<Formula> {
    match phi.polarity()? {
        Polarity::Universal => {
            return Err(Error::Formula("dualize expects an existential formula".into()))
        }
        _ if !phi.free_vars().contains(x) => {
            return Err(Error::Formula(format!("'{x}' is not free in the formula")))
        }
        _ => {}
    }
    let mut avoid = phi.all_vars();
    avoid.insert(x.to_string());
    let z = fresh_name("z", &avoid);
    let body = phi.subst(&HashMap::from([(x.to_string(), Term::Var(z.clone()))]));
    let xv = Term::var(x);
    let zv = Term::Var(z.clone());
    Ok(Formula::Forall(
        z,
        Box::new(Formula::Or(vec![
            Formula::is_zero(xv.clone()),
            Formula::not(Formula::eq(Term::mul(xv, zv), Term::int(1))),
            nnf(&Formula::not(body)),
        ])),
    ))
}

/// A binary form `H` with `H(x, y) = 0` only for `x = y = 0` in the given
/// field: the homogenization of a root-free polynomial.
pub fn root_free_form(ambient: Ambient, x: &Term, y: &Term) -> Result<Term> {
    let coeffs: Vec<Term> = match ambient {
        Ambient::Global(FieldDesc::Rationals) => vec![Term::int(1), Term::int(1), Term::int(1)],
        Ambient::Global(field @ FieldDesc::RationalFunctions { .. }) => {
            vec![Term::elem(&-field.t().unwrap()), Term::int(0), Term::int(1)]
        }
        Ambient::Finite(q) => {
            let (p, k) = prime_power(q)
                .ok_or_else(|| Error::Unsupported(format!("{q} is not a prime power")))?;
            let f = monic_irreducibles(p)
                .find(|f| {
                    let d = f.deg().unwrap() as u32;
                    d >= 2 && k % d != 0
                })
                .unwrap();
            f.coeffs()
                .iter()
                .map(|&c| Term::int(c as i64))
                .collect()
        }
    };
    let d = coeffs.len() - 1;
    let mut acc: Option<Term> = None;
    for (i, c) in coeffs.into_iter().enumerate() {
        if matches!(&c, Term::Const(Const::Int(n)) if n == &0.into()) {
            continue;
        }
        let mut mono = c;
        for _ in 0..i {
            mono = Term::mul(mono, x.clone());
        }
        for _ in 0..d - i {
            mono = Term::mul(mono, y.clone());
        }
        acc = Some(match acc {
            None => mono,
            Some(a) => Term::add(a, mono),
        });
    }
    Ok(acc.unwrap())
}

const MAX_DISJUNCTS: usize = 1 << 14;

type Clause = (Vec<Term>, Vec<Term>);

fn dnf(m: &Formula) -> Result<Vec<Clause>> {
    match m {
        Formula::Eq(a, b) => Ok(vec![(vec![diff(a, b)], vec![])]),
        Formula::Not(g) => match g.as_ref() {
            Formula::Eq(a, b) => Ok(vec![(vec![], vec![diff(a, b)])]),
            _ => Err(Error::Formula("matrix is not in negation normal form".into())),
        },
        Formula::Or(gs) => {
            let mut out = Vec::new();
            for g in gs {
                out.extend(dnf(g)?);
                if out.len() > MAX_DISJUNCTS {
                    return Err(Error::Unsupported("disjunctive normal form too large".into()));
                }
            }
            Ok(out)
        }
        Formula::And(gs) => {
            let mut acc: Vec<Clause> = vec![(vec![], vec![])];
            for g in gs {
                let d = dnf(g)?;
                if acc.len() * d.len() > MAX_DISJUNCTS {
                    return Err(Error::Unsupported("disjunctive normal form too large".into()));
                }
                let mut next = Vec::with_capacity(acc.len() * d.len());
                for (e1, n1) in &acc {
                    for (e2, n2) in &d {
                        let mut e = e1.clone();
                        e.extend(e2.iter().cloned());
                        let mut n = n1.clone();
                        n.extend(n2.iter().cloned());
                        next.push((e, n));
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            Err(Error::Formula("quantifier inside a prenex matrix".into()))
        }
    }
}

fn diff(a: &Term, b: &Term) -> Term {
    Term::sub(a.clone(), b.clone())
}

fn merge(eqs: &[Term], ambient: Ambient) -> Result<Term> {
    match eqs.len() {
        0 => Ok(Term::int(0)),
        1 => Ok(eqs[0].clone()),
        n => {
            let (l, r) = eqs.split_at(n / 2);
            root_free_form(ambient, &merge(l, ambient)?, &merge(r, ambient)?)
        }
    }
}

/// A single equation `∃ y. P = 0` defining the same set as the existential
/// formula `φ`, with at most one extra quantifier.
pub fn to_diophantine(phi: &Formula, ambient: Ambient) -> Result<Formula> {
    let (pol, mut vars, m) = prenex(phi)?;
    if pol == Polarity::Universal {
        return Err(Error::Formula("to_diophantine expects an existential formula".into()));
    }
    let clauses = dnf(&m)?;
    let mut avoid = phi.all_vars();
    avoid.extend(vars.iter().cloned());
    let needs_z = clauses.iter().any(|(_, n)| !n.is_empty());
    let z = fresh_name("z", &avoid);
    let mut factors = Vec::new();
    for (mut eqs, neqs) in clauses {
        if !neqs.is_empty() {
            let prod = neqs
                .into_iter()
                .fold(Term::Var(z.clone()), |acc, g| Term::mul(g, acc));
            eqs.push(Term::sub(prod, Term::int(1)));
        }
        if eqs.is_empty() {
            factors = vec![Term::int(0)];
            break;
        }
        factors.push(merge(&eqs, ambient)?);
    }
    let poly = factors
        .into_iter()
        .reduce(Term::mul)
        .unwrap_or_else(|| Term::int(1));
    if needs_z {
        vars.push(z);
    }
    Ok(Formula::exists(&vars, Formula::is_zero(poly)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diophantine_examples() {
        let q = Ambient::Global(FieldDesc::Rationals);
        let f = Formula::parse("x = 0 & y = 0").unwrap();
        let d = to_diophantine(&f, q).unwrap();
        assert_eq!(d.rank().unwrap(), 0);
        assert_eq!(d.to_string(), "y*y + x*y + x*x = 0");
        let g = Formula::parse("~(x = 0)").unwrap();
        let d = to_diophantine(&g, q).unwrap();
        assert_eq!(d.rank().unwrap(), 1);
        assert_eq!(d.to_string(), "exists z. x*z - 1 = 0");
    }

    #[test]
    fn dualize_adds_one() {
        let f = Formula::parse("exists y. x*y = 1").unwrap();
        let d = dualize(&f, "x").unwrap();
        assert_eq!(d.measure().unwrap(), (Polarity::Universal, 2));
        assert!(dualize(&d, "x").is_err());
    }

    #[test]
    fn prenex_shares_disjunct_blocks() {
        let f = Formula::parse("(exists a, b. x = a*b) | (exists c. x = c*c) & (exists d. d = x)").unwrap();
        let (_, vars, _) = prenex(&f).unwrap();
        assert_eq!(vars.len(), f.rank().unwrap());
    }

    #[test]
    fn root_free_choices() {
        let x = Term::var("x");
        let y = Term::var("y");
        assert_eq!(
            root_free_form(Ambient::Finite(9), &x, &y).unwrap().to_string(),
            "y*y*y + 2*x*y*y + x*x*x"
        );
        assert_eq!(
            root_free_form(Ambient::Finite(5), &x, &y).unwrap().to_string(),
            "2*y*y + x*x"
        );
    }
}
