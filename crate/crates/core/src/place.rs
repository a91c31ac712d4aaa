//! Places (`Z`-valuations) of `Q` and `F_p(T)`: valuations, supports,
//! residue maps and a canonical enumeration order.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::arith::{factor_bigint, inv_mod_bigint, is_prime, next_prime, val_bigint};
use crate::error::{Error, Result};
use crate::ff::ResidueField;
use crate::field::{FieldDesc, FieldElement, RatFunc};
use crate::poly::{monic_irreducibles, Poly};

/// A nonarchimedean place. Archimedean places are deliberately absent.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Place {
    /// `v_p` on `Q`.
    Prime(u64),
    /// `v_f` on `F_p(T)` for a monic irreducible `f`.
    Poly(Poly),
    /// The degree place of `F_p(T)`: `v(f/g) = deg g - deg f`.
    Infinity,
}

pub type PlaceSet = BTreeSet<Place>;

/// `v(x)`, with `+inf` for `x = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Valuation::Infinite
    }

    pub fn is_odd(self) -> bool {
        matches!(self, Valuation::Finite(v) if v.rem_euclid(2) == 1)
    }

    /// `self >= k` for a finite bound `k`.
    pub fn at_least(self, k: i64) -> bool {
        self >= Valuation::Finite(k)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

impl Place {
    pub fn parse(field: FieldDesc, s: &str) -> Result<Place> {
        let s = s.trim();
        let place = if s == "inf" {
            Place::Infinity
        } else if let Some(r) = s.strip_prefix("q:") {
            Place::Prime(
                r.trim()
                    .parse()
                    .map_err(|_| Error::parse(2, format!("bad prime '{r}'")))?,
            )
        } else if let Some(r) = s.strip_prefix("f:") {
            let p = match field {
                FieldDesc::RationalFunctions { p } => p,
                FieldDesc::Rationals => return Err(Error::FieldMismatch),
            };
            Place::Poly(Poly::parse(p, r)?)
        } else {
            return Err(Error::parse(0, format!("unknown place syntax '{s}'")));
        };
        place.validate(field)?;
        Ok(place)
    }

    /// Checks that this place exists on `field`.
    pub fn validate(&self, field: FieldDesc) -> Result<()> {
        match (self, field) {
            (Place::Prime(p), FieldDesc::Rationals) if is_prime(*p) => Ok(()),
            (Place::Prime(p), FieldDesc::Rationals) => Err(Error::pre(format!("{p} is not prime"))),
            (Place::Poly(f), FieldDesc::RationalFunctions { p })
                if f.modulus() == p && f.is_monic() && f.is_irreducible() =>
            {
                Ok(())
            }
            (Place::Poly(f), FieldDesc::RationalFunctions { .. }) => {
                Err(Error::pre(format!("{f} is not a monic irreducible")))
            }
            (Place::Infinity, FieldDesc::RationalFunctions { .. }) => Ok(()),
            _ => Err(Error::FieldMismatch),
        }
    }

    /// Degree of the residue field over the prime field.
    pub fn degree(&self) -> usize {
        match self {
            Place::Poly(f) => f.deg().unwrap(),
            _ => 1,
        }
    }

    pub fn residue_field(&self, field: FieldDesc) -> ResidueField {
        match (self, field) {
            (Place::Prime(p), _) => ResidueField::prime(*p),
            (Place::Poly(f), _) => ResidueField::new(f.clone()),
            (Place::Infinity, FieldDesc::RationalFunctions { p }) => ResidueField::prime(p),
            (Place::Infinity, FieldDesc::Rationals) => unreachable!("no degree place on Q"),
        }
    }

    pub fn residue_characteristic(&self, field: FieldDesc) -> u64 {
        match self {
            Place::Prime(p) => *p,
            _ => field.characteristic(),
        }
    }

    /// `|O_v / m_v|`.
    pub fn residue_size(&self, field: FieldDesc) -> u128 {
        (self.residue_characteristic(field) as u128).pow(self.degree() as u32)
    }

    /// The canonical uniformizer: the prime, the irreducible, or `1/T`.
    pub fn uniformizer(&self, field: FieldDesc) -> FieldElement {
        match (self, field) {
            (Place::Prime(p), FieldDesc::Rationals) => field.from_int(*p as i64),
            (Place::Poly(f), _) => FieldElement::Fun(RatFunc::from_poly(f.clone())),
            (Place::Infinity, _) => field.t().unwrap().inv().unwrap(),
            _ => panic!("place {self} does not live on {field}"),
        }
    }

    /// Lift of a residue-field representative to an element of `K`.
    pub fn lift(&self, field: FieldDesc, r: &Poly) -> FieldElement {
        match (self, field) {
            (Place::Prime(_), FieldDesc::Rationals) => field.from_int(r.coeff(0) as i64),
            (Place::Poly(_), _) => FieldElement::Fun(RatFunc::from_poly(r.clone())),
            (Place::Infinity, _) => FieldElement::Fun(RatFunc::from_poly(r.clone())),
            _ => panic!("place {self} does not live on {field}"),
        }
    }

    fn order_key(&self) -> (usize, u8, &[u64], u64) {
        match self {
            Place::Prime(p) => (1, 0, &[], *p),
            Place::Poly(f) => (f.deg().unwrap(), 0, f.coeffs(), 0),
            Place::Infinity => (1, 1, &[], 0),
        }
    }
}

impl PartialOrd for Place {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Enumeration order: by residue degree; among degree-one places of
/// `F_p(T)` the finite ones come before the degree place.
impl Ord for Place {
    fn cmp(&self, other: &Self) -> Ordering {
        let (d1, k1, c1, p1) = self.order_key();
        let (d2, k2, c2, p2) = other.order_key();
        d1.cmp(&d2)
            .then(k1.cmp(&k2))
            .then(p1.cmp(&p2))
            .then_with(|| c1.iter().rev().cmp(c2.iter().rev()))
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "q:{p}"),
            Place::Poly(g) => write!(f, "f:{g}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Renders a set of places as `{q:2, q:5}`.
pub fn format_places<'a>(places: impl IntoIterator<Item = &'a Place>) -> String {
    let items: Vec<String> = places.into_iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

/// Parses `{q:2, q:5}` (braces optional, comma separated, may be empty).
pub fn parse_places(field: FieldDesc, s: &str) -> Result<PlaceSet> {
    let s = s.trim();
    let inner = s
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .unwrap_or(s);
    inner
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| Place::parse(field, t))
        .collect()
}

/// All places of `field` in enumeration order (infinite iterator).
pub fn places(field: FieldDesc) -> Box<dyn Iterator<Item = Place>> {
    match field {
        FieldDesc::Rationals => Box::new(
            std::iter::successors(Some(2u64), |&p| Some(next_prime(p))).map(Place::Prime),
        ),
        FieldDesc::RationalFunctions { p } => {
            let mut emitted_inf = false;
            let mut irr = monic_irreducibles(p).peekable();
            Box::new(std::iter::from_fn(move || {
                if !emitted_inf {
                    if let Some(f) = irr.peek() {
                        if f.deg() == Some(1) {
                            return irr.next().map(Place::Poly);
                        }
                    }
                    emitted_inf = true;
                    return Some(Place::Infinity);
                }
                irr.next().map(Place::Poly)
            }))
        }
    }
}

/// The first `n` places not in `exclude`.
pub fn places_outside(field: FieldDesc, exclude: &PlaceSet, n: usize) -> Vec<Place> {
    places(field).filter(|v| !exclude.contains(v)).take(n).collect()
}

/// `v(x)`.
pub fn valuation(x: &FieldElement, v: &Place) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    match (x, v) {
        (FieldElement::Rat(r), Place::Prime(p)) => Valuation::Finite(
            val_bigint(r.numer(), *p) as i64 - val_bigint(r.denom(), *p) as i64,
        ),
        (FieldElement::Fun(f), Place::Poly(g)) => {
            Valuation::Finite(f.num().valuation(g) as i64 - f.den().valuation(g) as i64)
        }
        (FieldElement::Fun(f), Place::Infinity) => {
            Valuation::Finite(f.den().deg_i() - f.num().deg_i())
        }
        _ => panic!("valuation: place {v} does not live on the field of {x}"),
    }
}

/// Places where `x` has nonzero valuation.
pub fn support(x: &FieldElement) -> Result<PlaceSet> {
    if x.is_zero() {
        return Err(Error::ZeroElement);
    }
    let mut out = PlaceSet::new();
    match x {
        FieldElement::Rat(r) => {
            for part in [r.numer(), r.denom()] {
                for (p, _) in factor_bigint(part)? {
                    out.insert(Place::Prime(p));
                }
            }
        }
        FieldElement::Fun(f) => {
            for part in [f.num(), f.den()] {
                if !part.is_constant() {
                    for (g, _) in part.factor().1 {
                        out.insert(Place::Poly(g));
                    }
                }
            }
            if f.num().deg_i() != f.den().deg_i() {
                out.insert(Place::Infinity);
            }
        }
    }
    Ok(out)
}

/// Image of `x` in the residue field at `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResidueElement {
    pub place: Place,
    pub value: Poly,
}

impl fmt::Display for ResidueElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Reduction `O_v -> O_v/m_v`.
pub fn reduce(x: &FieldElement, v: &Place) -> Result<ResidueElement> {
    let val = valuation(x, v);
    if !val.at_least(0) {
        return Err(Error::NotIntegral(v.to_string()));
    }
    let field = x.field();
    let rf = v.residue_field(field);
    let value = if val > Valuation::Finite(0) {
        rf.zero()
    } else {
        match (x, v) {
            (FieldElement::Rat(r), Place::Prime(p)) => {
                let m = BigInt::from(*p);
                let inv = inv_mod_bigint(r.denom(), &m).expect("unit denominator");
                let k = (r.numer() * inv) % &m;
                let k = if k < BigInt::zero() { k + &m } else { k };
                Poly::constant(*p, k.try_into().unwrap())
            }
            (FieldElement::Fun(f), Place::Poly(_)) => {
                let n = rf.reduce(f.num());
                let d = rf.reduce(f.den());
                rf.mul(&n, &rf.inv(&d).expect("unit denominator"))
            }
            (FieldElement::Fun(f), Place::Infinity) => {
                let p = f.characteristic();
                let inv = crate::arith::inv_mod(f.den().lc(), p).unwrap();
                Poly::constant(p, crate::arith::mul_mod(f.num().lc(), inv, p))
            }
            _ => return Err(Error::FieldMismatch),
        }
    };
    Ok(ResidueElement {
        place: v.clone(),
        value,
    })
}

/// Residue of `x · π^{-v(x)}`, the leading coefficient of `x` at `v`.
pub fn leading_coefficient(x: &FieldElement, v: &Place) -> Result<Poly> {
    let k = valuation(x, v).finite().ok_or(Error::ZeroElement)?;
    let pi = v.uniformizer(x.field());
    Ok(reduce(&(x * &pi.pow(-k)), v)?.value)
}

/// `Odd(c)` and `Neg(c)`.
pub fn odd_neg(c: &FieldElement) -> Result<(PlaceSet, PlaceSet)> {
    let supp = support(c)?;
    let mut odd = PlaceSet::new();
    let mut neg = PlaceSet::new();
    for v in supp {
        let k = valuation(c, &v).finite().unwrap();
        if k.rem_euclid(2) == 1 {
            odd.insert(v.clone());
        }
        if k < 0 {
            neg.insert(v);
        }
    }
    Ok((odd, neg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FieldDesc {
        FieldDesc::function_field(2).unwrap()
    }

    #[test]
    fn valuation_examples() {
        let q = FieldDesc::Rationals;
        assert_eq!(valuation(&q.from_ratio(50, 3), &Place::Prime(5)), Valuation::Finite(2));
        let x = f2().parse_element("(T^2+1)/T^5").unwrap();
        assert_eq!(valuation(&x, &Place::Infinity), Valuation::Finite(3));
        assert_eq!(valuation(&q.zero(), &Place::Prime(3)), Valuation::Infinite);
    }

    #[test]
    fn support_examples() {
        let q = FieldDesc::Rationals;
        let s = support(&q.from_ratio(20, 3)).unwrap();
        assert_eq!(format_places(&s), "{q:2, q:3, q:5}");
        let x = f2().parse_element("T/(T+1)^2").unwrap();
        let _ = x;
        let x = f2().parse_element("T/(T^2+1)").unwrap();
        assert_eq!(format_places(&support(&x).unwrap()), "{f:T, f:T+1, inf}");
        assert!(support(&q.one()).unwrap().is_empty());
        assert_eq!(support(&q.zero()), Err(Error::ZeroElement));
    }

    #[test]
    fn reduce_examples() {
        let q = FieldDesc::Rationals;
        let r = reduce(&q.from_ratio(7, 3), &Place::Prime(5)).unwrap();
        assert_eq!(r.value, Poly::constant(5, 4));
        let t1 = f2().parse_element("T+1").unwrap();
        let r = reduce(&t1, &Place::Poly(Poly::t(2))).unwrap();
        assert!(r.value.is_one());
        assert!(matches!(
            reduce(&q.from_ratio(1, 5), &Place::Prime(5)),
            Err(Error::NotIntegral(_))
        ));
    }

    #[test]
    fn place_order_and_parsing() {
        let first: Vec<String> = places(f2()).take(4).map(|v| v.to_string()).collect();
        assert_eq!(first, vec!["f:T", "f:T+1", "inf", "f:T^2+T+1"]);
        let s = parse_places(FieldDesc::Rationals, "{q:5, q:2}").unwrap();
        assert_eq!(format_places(&s), "{q:2, q:5}");
        assert!(Place::parse(FieldDesc::Rationals, "q:6").is_err());
        assert!(Place::parse(f2(), "f:T^2+1").is_err());
    }

    #[test]
    fn odd_neg_examples() {
        let q = FieldDesc::Rationals;
        let (odd, neg) = odd_neg(&q.from_ratio(20, 3)).unwrap();
        assert_eq!(format_places(&odd), "{q:3, q:5}");
        assert_eq!(format_places(&neg), "{q:3}");
        let (odd, neg) = odd_neg(&f2().parse_element("T/(T+1)^2").unwrap()).unwrap();
        assert_eq!(format_places(&odd), "{f:T, inf}");
        assert_eq!(format_places(&neg), "{f:T+1}");
    }
}
