//! Exact elements of the two supported global-field families: `Q` and
//! `F_p(T)`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{exact_sqrt, is_prime};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Which global field we are working in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldDesc {
    Rationals,
    /// `F_p(T)` for a prime `p`.
    RationalFunctions { p: u64 },
}

impl FieldDesc {
    pub fn function_field(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::pre(format!("{p} is not prime")));
        }
        Ok(FieldDesc::RationalFunctions { p })
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldDesc::Rationals => 0,
            FieldDesc::RationalFunctions { p } => *p,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.from_int(0)
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        match self {
            FieldDesc::Rationals => FieldElement::Rat(BigRational::from_integer(n.into())),
            FieldDesc::RationalFunctions { p } => {
                FieldElement::Fun(RatFunc::from_poly(Poly::from_signed(*p, &[n])))
            }
        }
    }

    pub fn from_ratio(&self, n: i64, d: i64) -> FieldElement {
        self.from_int(n) / self.from_int(d)
    }

    /// The indeterminate `T` (function fields only).
    pub fn t(&self) -> Option<FieldElement> {
        match self {
            FieldDesc::Rationals => None,
            FieldDesc::RationalFunctions { p } => {
                Some(FieldElement::Fun(RatFunc::from_poly(Poly::t(*p))))
            }
        }
    }

    pub fn parse_element(&self, s: &str) -> Result<FieldElement> {
        match self {
            FieldDesc::Rationals => parse_rational(s).map(FieldElement::Rat),
            FieldDesc::RationalFunctions { p } => RatFunc::parse(*p, s).map(FieldElement::Fun),
        }
    }

    /// Parses `"Q"` or `"F<p>(T)"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "Q" {
            return Ok(FieldDesc::Rationals);
        }
        let inner = s
            .strip_prefix('F')
            .and_then(|r| r.strip_suffix("(T)"))
            .ok_or_else(|| Error::parse(0, format!("unknown field '{s}'")))?;
        let p: u64 = inner
            .parse()
            .map_err(|_| Error::parse(1, format!("bad characteristic '{inner}'")))?;
        FieldDesc::function_field(p)
    }

    /// Elements of height at most `h`, each once, in a fixed order: by
    /// height, then positive before negative, then by denominator.
    ///
    /// Over `Q` the height is `max(|num|, den)`; over `F_p(T)` it is
    /// `max(deg num, deg den)`.
    pub fn enumerate_by_height(&self, h: u64) -> Vec<FieldElement> {
        let mut out = Vec::new();
        for k in 0..=h {
            self.push_height(k, &mut out);
        }
        out
    }

    /// Elements of exactly height `h`.
    pub fn elements_of_height(&self, h: u64) -> Vec<FieldElement> {
        let mut out = Vec::new();
        self.push_height(h, &mut out);
        out
    }

    fn push_height(&self, k: u64, out: &mut Vec<FieldElement>) {
        match self {
            FieldDesc::Rationals => {
                if k == 0 {
                    return;
                }
                if k == 1 {
                    out.push(self.zero());
                }
                let k = k as i64;
                let mut level: Vec<(i64, i64)> = Vec::new();
                for d in 1..=k {
                    if d == k {
                        for n in 1..k {
                            if n.gcd(&d) == 1 {
                                level.push((n, d));
                            }
                        }
                    }
                    if k.gcd(&d) == 1 {
                        level.push((k, d));
                    }
                }
                level.sort_by_key(|&(n, d)| (d, n));
                level.dedup();
                for (n, d) in level {
                    out.push(self.from_ratio(n, d));
                    out.push(self.from_ratio(-n, d));
                }
            }
            FieldDesc::RationalFunctions { p } => {
                let p = *p;
                // numerators of degree <= k (any lc), monic denominators of
                // degree <= k, with max degree exactly k
                let polys_upto = |d: u64| -> Vec<Poly> {
                    let n = (p as u128).pow(d as u32 + 1);
                    (0..n).map(|i| Poly::from_index(p, i)).collect()
                };
                let nums = polys_upto(k);
                let dens: Vec<Poly> = polys_upto(k).into_iter().filter(|f| f.is_monic()).collect();
                if k == 0 {
                    out.extend(nums.iter().map(|n| FieldElement::Fun(RatFunc::from_poly(n.clone()))));
                    return;
                }
                for den in &dens {
                    for num in &nums {
                        if num.is_zero() {
                            continue;
                        }
                        let top = num.deg_i().max(den.deg_i());
                        if top != k as i64 || !num.gcd(den).is_one() {
                            continue;
                        }
                        out.push(FieldElement::Fun(RatFunc {
                            num: num.clone(),
                            den: den.clone(),
                        }));
                    }
                }
            }
        }
    }
}

impl fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldDesc::Rationals => write!(f, "Q"),
            FieldDesc::RationalFunctions { p } => write!(f, "F{p}(T)"),
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::parse(0, format!("bad rational literal '{s}'"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::parse(0, "zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

/// Element of `F_p(T)`: coprime numerator and monic denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let p = num.modulus();
        if num.is_zero() {
            return RatFunc {
                num,
                den: Poly::one(p),
            };
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let lc = den.lc();
        let inv = crate::arith::inv_mod(lc, p).unwrap();
        RatFunc {
            num: num.scale(inv),
            den: den.scale(inv),
        }
    }

    pub fn from_poly(num: Poly) -> Self {
        let p = num.modulus();
        RatFunc {
            num,
            den: Poly::one(p),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn characteristic(&self) -> u64 {
        self.num.modulus()
    }

    pub fn parse(p: u64, s: &str) -> Result<Self> {
        let (n, d) = split_top_slash(s.trim()).unwrap_or((s, "1"));
        let num = Poly::parse(p, n)?;
        let den = Poly::parse(p, d)?;
        if den.is_zero() {
            return Err(Error::parse(0, "zero denominator"));
        }
        Ok(RatFunc::new(num, den))
    }
}

fn split_top_slash(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '/' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

fn poly_text(f: &Poly) -> String {
    let s = f.to_string();
    if s.contains('+') {
        format!("({s})")
    } else {
        s
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", poly_text(&self.num), poly_text(&self.den))
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An element of `Q` or of some `F_p(T)`, always in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum FieldElement {
    Rat(BigRational),
    Fun(RatFunc),
}

impl FieldElement {
    pub fn field(&self) -> FieldDesc {
        match self {
            FieldElement::Rat(_) => FieldDesc::Rationals,
            FieldElement::Fun(f) => FieldDesc::RationalFunctions {
                p: f.characteristic(),
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElement::Rat(r) => r.is_zero(),
            FieldElement::Fun(f) => f.num.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElement::Rat(r) => r.is_one(),
            FieldElement::Fun(f) => f.num.is_one() && f.den.is_one(),
        }
    }

    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        Ok(match self {
            FieldElement::Rat(r) => FieldElement::Rat(r.recip()),
            FieldElement::Fun(f) => FieldElement::Fun(RatFunc::new(f.den.clone(), f.num.clone())),
        })
    }

    pub fn square(&self) -> FieldElement {
        self * self
    }

    pub fn pow(&self, e: i64) -> FieldElement {
        let base = if e < 0 {
            self.inv().expect("negative power of zero")
        } else {
            self.clone()
        };
        let mut acc = self.field().one();
        let mut base = base;
        let mut e = e.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Height: `max(|num|, den)` over `Q`, `max(deg num, deg den)` over
    /// `F_p(T)` (with `deg 0 = 0`).
    pub fn height(&self) -> BigInt {
        match self {
            FieldElement::Rat(r) => r.numer().abs().max(r.denom().clone()),
            FieldElement::Fun(f) => BigInt::from(f.num.deg_i().max(f.den.deg_i()).max(0)),
        }
    }

    /// Square root in the field, when one exists.
    pub fn sqrt(&self) -> Option<FieldElement> {
        match self {
            FieldElement::Rat(r) => {
                let n = exact_sqrt(r.numer())?;
                let d = exact_sqrt(r.denom())?;
                Some(FieldElement::Rat(BigRational::new(n, d)))
            }
            FieldElement::Fun(f) => {
                let n = f.num.sqrt()?;
                let d = f.den.sqrt()?;
                Some(FieldElement::Fun(RatFunc::new(n, d)))
            }
        }
    }

    pub fn is_square(&self) -> bool {
        self.sqrt().is_some()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            FieldElement::Rat(r) => Some(r),
            FieldElement::Fun(_) => None,
        }
    }

    pub fn as_ratfunc(&self) -> Option<&RatFunc> {
        match self {
            FieldElement::Fun(f) => Some(f),
            FieldElement::Rat(_) => None,
        }
    }

    /// Sign over `Q` (`None` for function fields).
    pub fn signum(&self) -> Option<i32> {
        self.as_rational().map(|r| {
            if r.is_zero() {
                0
            } else if r.is_positive() {
                1
            } else {
                -1
            }
        })
    }

    fn binop(
        &self,
        o: &FieldElement,
        fr: impl Fn(&BigRational, &BigRational) -> BigRational,
        ff: impl Fn(&RatFunc, &RatFunc) -> RatFunc,
    ) -> FieldElement {
        match (self, o) {
            (FieldElement::Rat(a), FieldElement::Rat(b)) => FieldElement::Rat(fr(a, b)),
            (FieldElement::Fun(a), FieldElement::Fun(b)) => {
                assert_eq!(a.characteristic(), b.characteristic(), "field mismatch");
                FieldElement::Fun(ff(a, b))
            }
            _ => panic!("field mismatch: {self} vs {o}"),
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElement::Rat(r) => write!(f, "{r}"),
            FieldElement::Fun(g) => write!(f, "{g}"),
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        self.binop(
            o,
            |a, b| a + b,
            |a, b| {
                RatFunc::new(
                    a.num.mul(&b.den).add(&b.num.mul(&a.den)),
                    a.den.mul(&b.den),
                )
            },
        )
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        self + &(-o)
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        self.binop(
            o,
            |a, b| a * b,
            |a, b| RatFunc::new(a.num.mul(&b.num), a.den.mul(&b.den)),
        )
    }
}

impl<'a> Div<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn div(self, o: &FieldElement) -> FieldElement {
        self * &o.inv().expect("division by zero")
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        match self {
            FieldElement::Rat(r) => FieldElement::Rat(-r),
            FieldElement::Fun(f) => FieldElement::Fun(RatFunc {
                num: f.num.neg(),
                den: f.den.clone(),
            }),
        }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: FieldElement) -> FieldElement { (&self).$m(&o) }
        }
        impl<'a> $tr<&'a FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: &FieldElement) -> FieldElement { (&self).$m(o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        let q = FieldDesc::Rationals;
        assert_eq!(q.parse_element("6/-4").unwrap().to_string(), "-3/2");
        let f = FieldDesc::function_field(2).unwrap();
        let x = f.parse_element("(T^2+1)/(T^2+T)").unwrap();
        // (T+1)^2 / (T(T+1)) = (T+1)/T
        assert_eq!(x.to_string(), "(T+1)/T");
        assert_eq!(f.parse_element("T/(T^2+1)").unwrap().to_string(), "T/(T^2+1)");
        assert!(q.parse_element("1/0").is_err());
    }

    #[test]
    fn height_enumeration_over_q() {
        let q = FieldDesc::Rationals;
        let h1: Vec<String> = q.enumerate_by_height(1).iter().map(|x| x.to_string()).collect();
        assert_eq!(h1, vec!["0", "1", "-1"]);
        let h2 = q.enumerate_by_height(2);
        assert!(h2.contains(&q.from_ratio(1, 2)));
        assert!(h2.contains(&q.from_int(-2)));
        assert!(!h2.contains(&q.from_ratio(1, 3)));
        let mut seen = std::collections::HashSet::new();
        for x in q.enumerate_by_height(20) {
            assert!(x.height() <= BigInt::from(20));
            assert!(seen.insert(x));
        }
    }

    #[test]
    fn height_enumeration_over_f2t() {
        let f = FieldDesc::function_field(2).unwrap();
        let h0: Vec<String> = f.enumerate_by_height(0).iter().map(|x| x.to_string()).collect();
        assert_eq!(h0, vec!["0", "1"]);
        let h2 = f.enumerate_by_height(2);
        let mut seen = std::collections::HashSet::new();
        assert!(h2.iter().all(|x| seen.insert(x.clone())));
        assert!(h2.contains(&f.parse_element("T/(T^2+1)").unwrap()));
    }

    #[test]
    fn square_roots() {
        let q = FieldDesc::Rationals;
        assert_eq!(q.from_ratio(9, 4).sqrt(), Some(q.from_ratio(3, 2)));
        assert_eq!(q.from_int(2).sqrt(), None);
        let f = FieldDesc::function_field(2).unwrap();
        assert!(f.parse_element("T^2/(T^4+1)").unwrap().is_square());
        assert!(!f.t().unwrap().is_square());
    }
}
