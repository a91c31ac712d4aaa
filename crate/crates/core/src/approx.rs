//! Weak approximation: given targets `(v_i, a_i, γ_i)` at distinct places,
//! find `x` with `v_i(x - a_i) > γ_i` for every `i`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::arith::{crt, inv_mod_bigint};
use crate::error::{Error, Result};
use crate::field::{FieldDesc, FieldElement, RatFunc};
use crate::place::{valuation, Place};
use crate::poly::{monic_irreducibles, Poly};

/// One approximation target.
#[derive(Clone, Debug)]
pub struct Target {
    pub place: Place,
    pub value: FieldElement,
    pub precision: i64,
}

impl Target {
    pub fn new(place: Place, value: FieldElement, precision: i64) -> Self {
        Target {
            place,
            value,
            precision,
        }
    }

    pub fn is_met(&self, x: &FieldElement) -> bool {
        valuation(&(x - &self.value), &self.place).at_least(self.precision + 1)
    }
}

/// Solves a weak-approximation problem.
///
/// If one of the target values already meets every condition it is
/// returned unchanged; otherwise the result is built by clearing
/// denominators and solving a Chinese-remainder problem, taking the
/// least residue (symmetric over `Q`).
pub fn weak_approximate(targets: &[Target]) -> Result<FieldElement> {
    let first = targets
        .first()
        .ok_or_else(|| Error::pre("weak approximation needs at least one target"))?;
    let field = first.value.field();
    let mut seen = HashSet::new();
    for t in targets {
        if t.value.field() != field {
            return Err(Error::FieldMismatch);
        }
        t.place.validate(field)?;
        if !seen.insert(t.place.clone()) {
            return Err(Error::DuplicatePlace(t.place.to_string()));
        }
    }
    if let Some(t) = targets.iter().find(|t| targets.iter().all(|s| s.is_met(&t.value))) {
        return Ok(t.value.clone());
    }
    let x = match field {
        FieldDesc::Rationals => approx_rational(targets),
        FieldDesc::RationalFunctions { p } => approx_function(p, targets),
    };
    debug_assert!(targets.iter().all(|t| t.is_met(&x)));
    Ok(x)
}

fn pole_order(t: &Target) -> u32 {
    match valuation(&t.value, &t.place).finite() {
        Some(v) if v < 0 => (-v) as u32,
        _ => 0,
    }
}

fn approx_rational(targets: &[Target]) -> FieldElement {
    let mut m = BigInt::one();
    for t in targets {
        let Place::Prime(p) = t.place else { unreachable!() };
        m *= BigInt::from(p).pow(pole_order(t));
    }
    let mut congruences = Vec::new();
    for t in targets {
        let Place::Prime(p) = t.place else { unreachable!() };
        let k = t.precision + 1 + pole_order(t) as i64;
        if k <= 0 {
            continue;
        }
        let modulus = BigInt::from(p).pow(k as u32);
        let r = t.value.as_rational().unwrap() * BigRational::from_integer(m.clone());
        let inv = inv_mod_bigint(r.denom(), &modulus).expect("denominator is a unit");
        congruences.push(((r.numer() * inv).mod_floor(&modulus), modulus));
    }
    let (y, n) = crt(&congruences);
    let alt = &y - &n;
    let y = if alt.abs() < y.abs() { alt } else { y };
    FieldElement::Rat(BigRational::new(y, m))
}

fn approx_function(p: u64, targets: &[Target]) -> FieldElement {
    let finite: Vec<&Target> = targets
        .iter()
        .filter(|t| t.place != Place::Infinity)
        .collect();
    let at_inf = targets.iter().find(|t| t.place == Place::Infinity);
    let place_poly = |t: &Target| match &t.place {
        Place::Poly(f) => f.clone(),
        _ => unreachable!(),
    };
    let mut m = Poly::one(p);
    for t in &finite {
        m = m.mul(&place_poly(t).pow(pole_order(t) as u64));
    }
    let mut moduli = Vec::new();
    for t in &finite {
        let k = t.precision + 1 + pole_order(t) as i64;
        if k > 0 {
            moduli.push((t, place_poly(t).pow(k as u64)));
        }
    }
    let n_deg: i64 = moduli.iter().map(|(_, q)| q.deg_i()).sum();
    let mut md = m.clone();
    let mut head = Poly::zero(p);
    if let Some(t) = at_inf {
        let g = monic_irreducibles(p)
            .find(|g| finite.iter().all(|t| place_poly(t) != *g))
            .unwrap();
        let mut l = md.deg_i() - t.precision;
        while l < n_deg.max(1) {
            md = md.mul(&g);
            l = md.deg_i() - t.precision;
        }
        let a = t.value.as_ratfunc().unwrap();
        let (q, _) = md.mul(a.num()).div_rem(a.den());
        let keep: Vec<u64> = q
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, &c)| if (i as i64) >= l { c } else { 0 })
            .collect();
        head = Poly::new(p, keep);
    }
    let mut residue = Poly::zero(p);
    let mut modulus = Poly::one(p);
    for (t, q) in &moduli {
        let a = t.value.as_ratfunc().unwrap();
        let scaled = RatFunc::new(md.mul(a.num()), a.den().clone());
        let den_inv = scaled.den().inv_mod(q).expect("denominator is a unit");
        let target = scaled.num().mul(&den_inv).sub(&head).rem(q);
        let inv = modulus.inv_mod(q).unwrap_or_else(|| Poly::one(p));
        let step = target.sub(&residue).mul(&inv).rem(q);
        residue = residue.add(&modulus.mul(&step));
        modulus = modulus.mul(q);
        residue = residue.rem(&modulus);
    }
    let y = head.add(&residue);
    FieldElement::Fun(RatFunc::new(y, md))
}

/// An element with valuation exactly `1` at every place of `s` and `0` at
/// the places of `zero`.
pub fn uniformizer_at(field: FieldDesc, s: &[Place], zero: &[Place]) -> Result<FieldElement> {
    let mut targets: Vec<Target> = s
        .iter()
        .map(|v| Target::new(v.clone(), v.uniformizer(field), 1))
        .collect();
    targets.extend(zero.iter().map(|v| Target::new(v.clone(), field.one(), 0)));
    if targets.is_empty() {
        return Ok(field.one());
    }
    weak_approximate(&targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::place::Valuation;

    #[test]
    fn rational_example() {
        let q = FieldDesc::Rationals;
        let x = weak_approximate(&[
            Target::new(Place::Prime(2), q.from_int(1), 2),
            Target::new(Place::Prime(5), q.from_int(0), 1),
        ])
        .unwrap();
        assert_eq!(x, q.from_int(25));
    }

    #[test]
    fn single_target_returns_value() {
        let q = FieldDesc::Rationals;
        let x = weak_approximate(&[Target::new(Place::Prime(3), q.from_ratio(1, 3), 10)]).unwrap();
        assert_eq!(x, q.from_ratio(1, 3));
    }

    #[test]
    fn duplicate_place_rejected() {
        let q = FieldDesc::Rationals;
        let r = weak_approximate(&[
            Target::new(Place::Prime(3), q.one(), 1),
            Target::new(Place::Prime(3), q.zero(), 1),
        ]);
        assert!(matches!(r, Err(Error::DuplicatePlace(_))));
    }

    #[test]
    fn function_field_with_infinity() {
        let f = FieldDesc::function_field(3).unwrap();
        let t = f.t().unwrap();
        let targets = [
            Target::new(Place::Infinity, t.clone(), 3),
            Target::new(Place::Poly(Poly::t(3)), f.one(), 2),
            Target::new(Place::Poly(Poly::parse(3, "T+1").unwrap()), t.inv().unwrap(), 1),
        ];
        let x = weak_approximate(&targets).unwrap();
        for tg in &targets {
            assert!(tg.is_met(&x), "{x} misses {}", tg.place);
        }
    }

    #[test]
    fn uniformizer_has_exact_valuations() {
        let f = FieldDesc::function_field(2).unwrap();
        let s = [Place::Poly(Poly::t(2)), Place::Infinity];
        let z = [Place::Poly(Poly::parse(2, "T+1").unwrap())];
        let pi = uniformizer_at(f, &s, &z).unwrap();
        for v in &s {
            assert_eq!(valuation(&pi, v), Valuation::Finite(1));
        }
        assert_eq!(valuation(&pi, &z[0]), Valuation::Finite(0));
    }
}
