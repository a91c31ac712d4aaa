//! Finite fields `F_p[X]/(m)` with `m` monic irreducible.
//!
//! [`ResidueField`] computes on the fly and serves residue fields of places
//! of any size; [`FqTable`] precomputes operation tables for the small
//! fields used by exhaustive formula evaluation.

use crate::arith::is_prime;
use crate::error::{Error, Result};
use crate::poly::{monic_irreducibles, Poly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueField {
    p: u64,
    modulus: Poly,
}

impl ResidueField {
    /// The field `F_p[X]/(m)`; `m` must be monic irreducible.
    pub fn new(modulus: Poly) -> Self {
        debug_assert!(modulus.is_monic() && modulus.is_irreducible());
        ResidueField {
            p: modulus.modulus(),
            modulus,
        }
    }

    pub fn prime(p: u64) -> Self {
        ResidueField::new(Poly::t(p))
    }

    /// Some `F_{p^d}`, using the first monic irreducible of degree `d`.
    pub fn of_size(p: u64, d: usize) -> Self {
        let m = monic_irreducibles(p)
            .find(|f| f.deg() == Some(d))
            .expect("irreducibles exist in every degree");
        ResidueField::new(m)
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.modulus.deg().unwrap()
    }

    pub fn size(&self) -> u128 {
        (self.p as u128).pow(self.degree() as u32)
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn reduce(&self, x: &Poly) -> Poly {
        if self.degree() == 1 {
            // residue of T is -m(0)
            let root = (self.p - self.modulus.coeff(0)) % self.p;
            return Poly::constant(self.p, x.eval(root));
        }
        x.rem(&self.modulus)
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(self.p)
    }

    pub fn one(&self) -> Poly {
        Poly::one(self.p)
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        a.add(b)
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        a.sub(b)
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        self.reduce(&a.mul(b))
    }

    pub fn inv(&self, a: &Poly) -> Option<Poly> {
        if a.is_zero() {
            return None;
        }
        if self.degree() == 1 {
            return crate::arith::inv_mod(a.coeff(0), self.p).map(|x| Poly::constant(self.p, x));
        }
        a.inv_mod(&self.modulus)
    }

    pub fn pow(&self, a: &Poly, mut e: u128) -> Poly {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_square(&self, a: &Poly) -> bool {
        if a.is_zero() || self.p == 2 {
            return true;
        }
        self.pow(a, (self.size() - 1) / 2).is_one()
    }

    /// Square root in characteristic 2 (Frobenius is bijective).
    pub fn sqrt_char2(&self, a: &Poly) -> Poly {
        assert_eq!(self.p, 2);
        self.pow(a, self.size() / 2)
    }

    /// Absolute trace to `F_p`.
    pub fn trace(&self, a: &Poly) -> u64 {
        let mut acc = self.zero();
        let mut x = a.clone();
        for _ in 0..self.degree() {
            acc = acc.add(&x);
            x = self.pow(&x, self.p as u128);
        }
        acc.coeff(0)
    }

    /// Whether `X^2 - X - c` has a root in this field.
    pub fn artin_schreier_has_root(&self, c: &Poly) -> bool {
        if self.p == 2 {
            self.trace(c) == 0
        } else {
            let disc = Poly::one(self.p).add(&c.scale(4));
            self.is_square(&self.reduce(&disc))
        }
    }

    /// All elements in index order (`0, 1, ..., p-1, X, X+1, ...`).
    pub fn elements(&self) -> impl Iterator<Item = Poly> + '_ {
        (0..self.size()).map(move |i| Poly::from_index(self.p, i))
    }
}

/// A small finite field with precomputed operation tables.
///
/// Elements are indices `0..q`; index `i` stands for the polynomial whose
/// base-`p` digits are `i`, so `0` and `1` are the field's zero and one.
#[derive(Clone, Debug)]
pub struct FqTable {
    p: u64,
    q: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    modulus: Poly,
}

impl FqTable {
    pub fn new(q: usize) -> Result<Self> {
        let (p, d) = prime_power(q as u64)
            .ok_or_else(|| Error::Unsupported(format!("{q} is not a prime power")))?;
        if q > 256 {
            return Err(Error::Unsupported(format!(
                "F_{q} is too large for table evaluation"
            )));
        }
        let field = ResidueField::of_size(p, d as usize);
        let elems: Vec<Poly> = field.elements().collect();
        let idx = |x: &Poly| x.index() as u16;
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        let mut neg = vec![0u16; q];
        let mut inv = vec![0u16; q];
        for (i, a) in elems.iter().enumerate() {
            neg[i] = idx(&a.neg());
            inv[i] = field.inv(a).map(|x| idx(&x)).unwrap_or(0);
            for (j, b) in elems.iter().enumerate() {
                add[i * q + j] = idx(&field.add(a, b));
                mul[i * q + j] = idx(&field.mul(a, b));
            }
        }
        Ok(FqTable {
            p,
            q,
            add,
            mul,
            neg,
            inv,
            modulus: field.modulus().clone(),
        })
    }

    pub fn size(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    /// Extension degree over the prime field.
    pub fn degree(&self) -> usize {
        self.modulus.deg().unwrap()
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u16) -> u16 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u16, b: u16) -> u16 {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: u16) -> Option<u16> {
        (a != 0).then(|| self.inv[a as usize])
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> u16 {
        n.rem_euclid(self.p as i64) as u16
    }

    pub fn elements(&self) -> impl Iterator<Item = u16> {
        0..self.q as u16
    }

    pub fn is_square(&self, a: u16) -> bool {
        self.elements().any(|y| self.mul(y, y) == a)
    }
}

/// `(p, d)` with `q = p^d`, if `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let f = crate::arith::factor_u64(q);
    (f.len() == 1 && is_prime(f[0].0)).then(|| f[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f9_tables_are_a_field() {
        let f = FqTable::new(9).unwrap();
        for a in f.elements() {
            assert_eq!(f.add(a, f.neg(a)), 0);
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
        // every element of F_3 is a square in F_9
        assert!((0..3).all(|a| f.is_square(a)));
        assert!(FqTable::new(6).is_err());
    }

    #[test]
    fn artin_schreier_roots() {
        let f2 = ResidueField::prime(2);
        assert!(!f2.artin_schreier_has_root(&Poly::one(2)));
        assert!(f2.artin_schreier_has_root(&Poly::zero(2)));
        let f4 = ResidueField::of_size(2, 2);
        // X^2+X+1 splits over F_4
        assert!(f4.artin_schreier_has_root(&Poly::one(2)));
        let f5 = ResidueField::prime(5);
        // disc 1+4*4 = 17 = 2 mod 5, a nonsquare
        assert!(!f5.artin_schreier_has_root(&Poly::constant(5, 4)));
    }

    #[test]
    fn residue_of_linear_modulus() {
        let f = ResidueField::new(Poly::parse(5, "T+2").unwrap());
        // T = -2 = 3 in the residue field
        assert_eq!(f.reduce(&Poly::parse(5, "T^2").unwrap()), Poly::constant(5, 4));
    }
}
