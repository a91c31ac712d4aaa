//! Dense univariate polynomials over a prime field `F_p`.

use std::cmp::Ordering;
use std::fmt;

use crate::arith::{inv_mod, is_prime, mul_mod, pow_mod};
use crate::error::{Error, Result};

/// Polynomial over `F_p`, coefficients low degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    p: u64,
    c: Vec<u64>,
}

impl Poly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut c: Vec<u64> = coeffs.into_iter().map(|x| x % p).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        Poly { p, c }
    }

    /// Coefficients given as signed integers, reduced mod `p`.
    pub fn from_signed(p: u64, coeffs: &[i64]) -> Self {
        Poly::new(
            p,
            coeffs
                .iter()
                .map(|&x| x.rem_euclid(p as i64) as u64)
                .collect(),
        )
    }

    pub fn zero(p: u64) -> Self {
        Poly { p, c: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        Poly::constant(p, 1)
    }

    pub fn constant(p: u64, k: u64) -> Self {
        Poly::new(p, vec![k])
    }

    /// The indeterminate `T`.
    pub fn t(p: u64) -> Self {
        Poly::new(p, vec![0, 1])
    }

    pub fn monomial(p: u64, k: u64, e: usize) -> Self {
        let mut c = vec![0; e + 1];
        c[e] = k;
        Poly::new(p, c)
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.c.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c == [1]
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    /// Degree; `None` for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree with `deg 0 = -1` convention, handy for height bounds.
    pub fn deg_i(&self) -> i64 {
        self.c.len() as i64 - 1
    }

    pub fn lc(&self) -> u64 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.lc() == 1
    }

    pub fn scale(&self, k: u64) -> Poly {
        let p = self.p;
        Poly::new(p, self.c.iter().map(|&x| mul_mod(x, k % p, p)).collect())
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = inv_mod(self.lc(), self.p).expect("nonzero mod prime");
        self.scale(inv)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new(
            self.p,
            (0..n).map(|i| (self.coeff(i) + o.coeff(i)) % self.p).collect(),
        )
    }

    pub fn neg(&self) -> Poly {
        let p = self.p;
        Poly::new(p, self.c.iter().map(|&x| (p - x) % p).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(self.p);
        }
        let p = self.p;
        let mut c = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] = (c[i + j] + mul_mod(a, b, p)) % p;
            }
        }
        Poly::new(p, c)
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiply by `T^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![0; k];
        c.extend_from_slice(&self.c);
        Poly { p: self.p, c }
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let p = self.p;
        let dd = d.c.len() - 1;
        let inv = inv_mod(d.lc(), p).unwrap();
        let mut r = self.c.clone();
        if r.len() < d.c.len() {
            return (Poly::zero(p), self.clone());
        }
        let mut q = vec![0u64; r.len() - dd];
        for i in (0..q.len()).rev() {
            let coef = mul_mod(r[i + dd], inv, p);
            q[i] = coef;
            if coef == 0 {
                continue;
            }
            for (j, &dc) in d.c.iter().enumerate() {
                r[i + j] = (r[i + j] + p - mul_mod(coef, dc, p)) % p;
            }
        }
        (Poly::new(p, q), Poly::new(p, r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.div_rem(d).1
    }

    pub fn divides(&self, n: &Poly) -> bool {
        n.rem(self).is_zero()
    }

    /// Monic gcd.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, s, t)` with `s·self + t·o = g`, `g` monic.
    pub fn ext_gcd(&self, o: &Poly) -> (Poly, Poly, Poly) {
        let p = self.p;
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Poly::one(p), Poly::zero(p));
        let (mut t0, mut t1) = (Poly::zero(p), Poly::one(p));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            r0 = r1;
            r1 = r;
            let s = s0.sub(&q.mul(&s1));
            s0 = s1;
            s1 = s;
            let t = t0.sub(&q.mul(&t1));
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = inv_mod(r0.lc(), p).unwrap();
        (r0.scale(inv), s0.scale(inv), t0.scale(inv))
    }

    /// Inverse modulo `m`, if `gcd(self, m) = 1`.
    pub fn inv_mod(&self, m: &Poly) -> Option<Poly> {
        let (g, s, _) = self.rem(m).ext_gcd(m);
        if g.is_one() {
            Some(s.rem(m))
        } else {
            None
        }
    }

    pub fn derivative(&self) -> Poly {
        let p = self.p;
        Poly::new(
            p,
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &x)| mul_mod(x, i as u64 % p, p))
                .collect(),
        )
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p;
        self.c
            .iter()
            .rev()
            .fold(0, |acc, &c| (mul_mod(acc, x, p) + c) % p)
    }

    /// Composition `self(g)`.
    pub fn compose(&self, g: &Poly) -> Poly {
        let p = self.p;
        self.c.iter().rev().fold(Poly::zero(p), |acc, &c| {
            acc.mul(g).add(&Poly::constant(p, c))
        })
    }

    /// Index of this polynomial in base-`p` digit order (constant term least
    /// significant); used for deterministic enumeration.
    pub fn index(&self) -> u128 {
        self.c
            .iter()
            .rev()
            .fold(0u128, |acc, &c| acc * self.p as u128 + c as u128)
    }

    pub fn from_index(p: u64, mut idx: u128) -> Poly {
        let mut c = Vec::new();
        while idx > 0 {
            c.push((idx % p as u128) as u64);
            idx /= p as u128;
        }
        Poly::new(p, c)
    }

    /// Factorization into monic irreducibles with multiplicities, plus the
    /// leading coefficient. Trial division in enumeration order; the
    /// smallest-degree monic divisor found is necessarily irreducible.
    pub fn factor(&self) -> (u64, Vec<(Poly, u32)>) {
        assert!(!self.is_zero(), "factor of zero polynomial");
        let p = self.p;
        let lc = self.lc();
        let mut rest = self.monic();
        let mut out = Vec::new();
        let mut d = 1usize;
        while rest.deg().unwrap_or(0) >= 2 * d {
            let count = (p as u128).pow(d as u32);
            for i in 0..count {
                let mut cand = Poly::from_index(p, i);
                cand.c.resize(d, 0);
                cand.c.push(1);
                let mut e = 0;
                loop {
                    let (q, r) = rest.div_rem(&cand);
                    if !r.is_zero() {
                        break;
                    }
                    rest = q;
                    e += 1;
                }
                if e > 0 {
                    out.push((cand, e));
                }
                if rest.deg().unwrap_or(0) < 2 * d {
                    break;
                }
            }
            d += 1;
        }
        if rest.deg().unwrap_or(0) >= 1 {
            match out.iter_mut().find(|(f, _)| *f == rest) {
                Some((_, e)) => *e += 1,
                None => out.push((rest, 1)),
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        (lc, out)
    }

    pub fn is_irreducible(&self) -> bool {
        if self.deg().unwrap_or(0) == 0 {
            return false;
        }
        let (_, f) = self.factor();
        f.len() == 1 && f[0].1 == 1
    }

    /// Multiplicity of the irreducible `f` in `self` (nonzero).
    pub fn valuation(&self, f: &Poly) -> u32 {
        let mut e = 0;
        let mut m = self.clone();
        loop {
            let (q, r) = m.div_rem(f);
            if !r.is_zero() {
                return e;
            }
            m = q;
            e += 1;
        }
    }

    /// Square root when `self` is a square in `F_p[T]`.
    pub fn sqrt(&self) -> Option<Poly> {
        let p = self.p;
        if self.is_zero() {
            return Some(self.clone());
        }
        if p == 2 {
            if self.c.iter().enumerate().any(|(i, &c)| i % 2 == 1 && c != 0) {
                return None;
            }
            return Some(Poly::new(2, self.c.iter().step_by(2).copied().collect()));
        }
        let (lc, fs) = self.factor();
        let r = sqrt_mod_prime(lc, p)?;
        let mut acc = Poly::constant(p, r);
        for (f, e) in fs {
            if e % 2 == 1 {
                return None;
            }
            acc = acc.mul(&f.pow(e as u64 / 2));
        }
        Some(acc)
    }

    /// Parses polynomial expressions such as `"T^3+2*T+1"` or `"(T+1)^2*T"`.
    pub fn parse(p: u64, s: &str) -> Result<Poly> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err(Error::parse(0, "empty polynomial"));
        }
        let mut parser = PolyParser { p, s: &chars, i: 0 };
        let out = parser.sum()?;
        if parser.i != chars.len() {
            return Err(Error::parse(parser.i, format!("unexpected '{}'", chars[parser.i])));
        }
        Ok(out)
    }
}

struct PolyParser<'a> {
    p: u64,
    s: &'a [char],
    i: usize,
}

impl PolyParser<'_> {
    fn peek(&self) -> Option<char> {
        self.s.get(self.i).copied()
    }

    fn sum(&mut self) -> Result<Poly> {
        let mut acc = Poly::zero(self.p);
        let mut first = true;
        loop {
            let neg = match self.peek() {
                Some('+') => {
                    self.i += 1;
                    false
                }
                Some('-') => {
                    self.i += 1;
                    true
                }
                _ if first => false,
                _ => return Ok(acc),
            };
            first = false;
            let t = self.product()?;
            acc = if neg { acc.sub(&t) } else { acc.add(&t) };
        }
    }

    fn product(&mut self) -> Result<Poly> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.i += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some('T') | Some('(') => acc = acc.mul(&self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.i += 1;
            let e = self.number()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            Some('T') => {
                self.i += 1;
                Ok(Poly::t(self.p))
            }
            Some('(') => {
                self.i += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(Error::parse(self.i, "expected ')'"));
                }
                self.i += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.i;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.i += 1;
                }
                let digits: String = self.s[start..self.i].iter().collect();
                let k = digits
                    .parse::<num_bigint::BigUint>()
                    .map_err(|_| Error::parse(start, "bad coefficient"))?;
                let k = (k % self.p).to_u64_digits().first().copied().unwrap_or(0);
                Ok(Poly::constant(self.p, k))
            }
            Some(c) => Err(Error::parse(self.i, format!("bad coefficient '{c}'"))),
            None => Err(Error::parse(self.i, "unexpected end of polynomial")),
        }
    }

    fn number(&mut self) -> Result<u64> {
        let start = self.i;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.i += 1;
        }
        let digits: String = self.s[start..self.i].iter().collect();
        digits
            .parse()
            .map_err(|_| Error::parse(start, "bad exponent"))
    }
}

/// Square root of `a` modulo an odd prime by exhaustive search for small
/// moduli and Tonelli-Shanks otherwise.
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 || p == 2 {
        return Some(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r.min(p - r))
}

/// Monic irreducible polynomials over `F_p` in enumeration order: by degree,
/// then by base-`p` index of the lower coefficients.
pub fn monic_irreducibles(p: u64) -> impl Iterator<Item = Poly> {
    assert!(is_prime(p));
    (1usize..).flat_map(move |d| {
        let count = (p as u128).pow(d as u32);
        (0..count).filter_map(move |i| {
            let mut f = Poly::from_index(p, i);
            f.c.resize(d, 0);
            f.c.push(1);
            f.is_irreducible().then_some(f)
        })
    })
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Degree first, then coefficients from the top down.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.c
            .len()
            .cmp(&other.c.len())
            .then_with(|| self.c.iter().rev().cmp(other.c.iter().rev()))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.c.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "T")?,
                (1, c) => write!(f, "{c}*T")?,
                (i, 1) => write!(f, "T^{i}")?,
                (i, c) => write!(f, "{c}*T^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let f = Poly::parse(3, "T^3+2*T+1").unwrap();
        assert_eq!(f.coeffs(), &[1, 2, 0, 1]);
        assert_eq!(f.to_string(), "T^3+2*T+1");
        assert_eq!(Poly::parse(2, "T^2-1").unwrap().to_string(), "T^2+1");
        assert!(Poly::parse(2, "T^x").is_err());
    }

    #[test]
    fn division_and_gcd() {
        let p = 5;
        let a = Poly::parse(p, "T^3+1").unwrap();
        let b = Poly::parse(p, "T+1").unwrap();
        let (q, r) = a.div_rem(&b);
        assert!(r.is_zero());
        assert_eq!(q.mul(&b), a);
        assert_eq!(a.gcd(&Poly::parse(p, "T^2-1").unwrap()), b);
        let inv = Poly::parse(p, "T").unwrap().inv_mod(&b).unwrap();
        assert!(inv.mul(&Poly::t(p)).rem(&b).is_one());
    }

    #[test]
    fn factorization() {
        let f = Poly::parse(2, "T^5+T^4+T^3+T^2").unwrap();
        // T^2 (T^3+T^2+T+1) = T^2 (T+1)^3
        let (lc, fs) = f.factor();
        assert_eq!(lc, 1);
        assert_eq!(
            fs,
            vec![(Poly::parse(2, "T").unwrap(), 2), (Poly::parse(2, "T+1").unwrap(), 3)]
        );
        let irr: Vec<String> = monic_irreducibles(2).take(5).map(|f| f.to_string()).collect();
        assert_eq!(irr, vec!["T", "T+1", "T^2+T+1", "T^3+T+1", "T^3+T^2+1"]);
    }

    #[test]
    fn square_roots() {
        let f = Poly::parse(3, "T+1").unwrap();
        assert_eq!(f.mul(&f).scale(2).sqrt(), None);
        assert_eq!(f.mul(&f).sqrt().unwrap().monic(), f);
        let g = Poly::parse(2, "T^2+1").unwrap();
        assert_eq!(g.sqrt().unwrap(), Poly::parse(2, "T+1").unwrap());
        assert_eq!(sqrt_mod_prime(4, 7), Some(2));
        assert_eq!(sqrt_mod_prime(3, 7), None);
    }
}
