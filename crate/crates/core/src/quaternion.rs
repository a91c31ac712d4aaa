//! Quaternion algebras `[a, b)_K` and `(a, b)_K`: reduced norm and trace,
//! local splitting at every place, ramification sets and nonreality.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::arith::inv_mod_bigint;
use crate::error::{Error, Result};
use crate::ff::ResidueField;
use crate::field::{FieldDesc, FieldElement};
use crate::place::{leading_coefficient, reduce, support, valuation, Place, PlaceSet, Valuation};
use crate::poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    /// `[a, b)`: `u^2 - u = a`, `v^2 = b`, `vuv^{-1} = u + 1`.
    ArtinSchreier,
    /// `(a, b)`: `i^2 = a`, `j^2 = b`, `ij = -ji`.
    Classical,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuaternionDesc {
    form: Form,
    a: FieldElement,
    b: FieldElement,
}

/// A point `x_1 + x_2 e_1 + x_3 e_2 + x_4 e_1 e_2` of the algebra.
pub type PureQuaternionPoint = [FieldElement; 4];

impl QuaternionDesc {
    /// `[a, b)`; requires `b(1 + 4a) != 0`.
    pub fn artin_schreier(a: FieldElement, b: FieldElement) -> Result<Self> {
        if a.field() != b.field() {
            return Err(Error::FieldMismatch);
        }
        let four = a.field().from_int(4);
        if b.is_zero() || (&a * &four + a.field().one()).is_zero() {
            return Err(Error::InvalidQuaternion(format!(
                "[{a}; {b}) needs b(1+4a) != 0"
            )));
        }
        Ok(QuaternionDesc {
            form: Form::ArtinSchreier,
            a,
            b,
        })
    }

    /// `(a, b)`; requires `ab != 0` and characteristic different from 2.
    pub fn classical(a: FieldElement, b: FieldElement) -> Result<Self> {
        if a.field() != b.field() {
            return Err(Error::FieldMismatch);
        }
        if a.field().characteristic() == 2 {
            return Err(Error::NoClassicalForm);
        }
        if a.is_zero() || b.is_zero() {
            return Err(Error::InvalidQuaternion(format!("({a}; {b}) needs ab != 0")));
        }
        Ok(QuaternionDesc {
            form: Form::Classical,
            a,
            b,
        })
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn a(&self) -> &FieldElement {
        &self.a
    }

    pub fn b(&self) -> &FieldElement {
        &self.b
    }

    pub fn field(&self) -> FieldDesc {
        self.a.field()
    }

    /// `(1 + 4a, b)` for `[a, b)` outside characteristic 2.
    pub fn classicalize(&self) -> Result<QuaternionDesc> {
        match self.form {
            Form::Classical => Ok(self.clone()),
            Form::ArtinSchreier => {
                if self.field().characteristic() == 2 {
                    return Err(Error::NoClassicalForm);
                }
                QuaternionDesc::classical(self.one_plus_4a(), self.b.clone())
            }
        }
    }

    fn one_plus_4a(&self) -> FieldElement {
        let f = self.field();
        &(&self.a * &f.from_int(4)) + &f.one()
    }

    /// The pair `(α, β)` of a classical form, when one exists.
    fn classical_pair(&self) -> Option<(FieldElement, FieldElement)> {
        match self.form {
            Form::Classical => Some((self.a.clone(), self.b.clone())),
            Form::ArtinSchreier if self.field().characteristic() != 2 => {
                Some((self.one_plus_4a(), self.b.clone()))
            }
            Form::ArtinSchreier => None,
        }
    }

    pub fn reduced_trace(&self, x: &PureQuaternionPoint) -> FieldElement {
        let two = self.field().from_int(2);
        match self.form {
            Form::ArtinSchreier => &(&two * &x[0]) + &x[1],
            Form::Classical => &two * &x[0],
        }
    }

    pub fn reduced_norm(&self, x: &PureQuaternionPoint) -> FieldElement {
        let (a, b) = (&self.a, &self.b);
        let [x1, x2, x3, x4] = x;
        match self.form {
            Form::ArtinSchreier => {
                let n12 = &(&x1.square() + &(x1 * x2)) - &(a * &x2.square());
                let n34 = &(&x3.square() + &(x3 * x4)) - &(a * &x4.square());
                &n12 - &(b * &n34)
            }
            Form::Classical => {
                let ab = a * b;
                &(&(&x1.square() - &(a * &x2.square())) - &(b * &x3.square()))
                    + &(&ab * &x4.square())
            }
        }
    }

    /// `F(x, y, z)` whose isotropy over `K_v` is equivalent to splitting:
    /// `x^2 + xy - ay^2 - bz^2`, or `x^2 - ay^2 - bz^2` for classical forms.
    pub fn ternary_form(&self, x: &FieldElement, y: &FieldElement, z: &FieldElement) -> FieldElement {
        let base = &x.square() - &(&self.a * &y.square());
        let base = match self.form {
            Form::ArtinSchreier => &base + &(x * y),
            Form::Classical => base,
        };
        &base - &(&self.b * &z.square())
    }

    pub fn parse(field: FieldDesc, s: &str) -> Result<Self> {
        let s = s.trim();
        let (form, inner) = if let Some(r) = s.strip_prefix("AS[").and_then(|r| r.strip_suffix(']')) {
            (Form::ArtinSchreier, r)
        } else if let Some(r) = s.strip_prefix("CL(").and_then(|r| r.strip_suffix(')')) {
            (Form::Classical, r)
        } else {
            return Err(Error::parse(0, format!("expected AS[a;b] or CL(a;b), got '{s}'")));
        };
        let (a, b) = inner
            .split_once(';')
            .ok_or_else(|| Error::parse(0, "missing ';' in quaternion"))?;
        let a = field.parse_element(a)?;
        let b = field.parse_element(b)?;
        match form {
            Form::ArtinSchreier => QuaternionDesc::artin_schreier(a, b),
            Form::Classical => QuaternionDesc::classical(a, b),
        }
    }
}

impl fmt::Display for QuaternionDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.form {
            Form::ArtinSchreier => write!(f, "AS[{};{}]", self.a, self.b),
            Form::Classical => write!(f, "CL({};{})", self.a, self.b),
        }
    }
}

impl fmt::Debug for QuaternionDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Whether `q ⊗ K_v` is split.
pub fn local_splits(q: &QuaternionDesc, v: &Place) -> bool {
    let field = q.field();
    if let Some((alpha, beta)) = q.classical_pair() {
        if v.residue_characteristic(field) != 2 {
            tame_symbol_is_trivial(&alpha, &beta, v)
        } else {
            dyadic_symbol_is_trivial(&alpha, &beta)
        }
    } else {
        char2_splits(&q.a, &q.b, v)
    }
}

/// `(α, β)_v = 1` at a place of odd residue characteristic.
fn tame_symbol_is_trivial(alpha: &FieldElement, beta: &FieldElement, v: &Place) -> bool {
    let va = valuation(alpha, v).finite().unwrap();
    let vb = valuation(beta, v).finite().unwrap();
    let sign = if (va * vb).rem_euclid(2) == 1 { -1 } else { 1 };
    let unit = &(&alpha.pow(vb) * &beta.pow(-va)) * &alpha.field().from_int(sign);
    let r = reduce(&unit, v).expect("tame symbol argument is a unit").value;
    v.residue_field(alpha.field()).is_square(&r)
}

/// `(α, β)_2` over `Q`.
fn dyadic_symbol_is_trivial(alpha: &FieldElement, beta: &FieldElement) -> bool {
    let two = Place::Prime(2);
    let va = valuation(alpha, &two).finite().unwrap();
    let vb = valuation(beta, &two).finite().unwrap();
    let f = alpha.field();
    let u = unit_mod_8(&(alpha * &f.from_int(2).pow(-va)));
    let w = unit_mod_8(&(beta * &f.from_int(2).pow(-vb)));
    let eps = |x: u64| ((x - 1) / 2) % 2;
    let omega = |x: u64| ((x * x - 1) / 8) % 2;
    let e = eps(u) * eps(w) + (va.rem_euclid(2) as u64) * omega(w) + (vb.rem_euclid(2) as u64) * omega(u);
    e % 2 == 0
}

fn unit_mod_8(x: &FieldElement) -> u64 {
    let r = x.as_rational().unwrap();
    let m = BigInt::from(8);
    let inv = inv_mod_bigint(r.denom(), &m).unwrap();
    let k: BigInt = (r.numer() * inv).mod_floor(&m);
    debug_assert!(k.is_positive());
    k.try_into().unwrap()
}

/// Replaces `a` by `a + c^2 + c` until its pole order at `v` is odd or
/// nonpositive. Characteristic 2 only.
pub fn artin_schreier_reduce(a: &FieldElement, v: &Place) -> FieldElement {
    let field = a.field();
    let rf = v.residue_field(field);
    let pi = v.uniformizer(field);
    let mut a = a.clone();
    loop {
        let m = match valuation(&a, v) {
            Valuation::Finite(k) if k < 0 && k % 2 == 0 => -k,
            _ => return a,
        };
        let lead = leading_coefficient(&a, v).unwrap();
        let root = rf.sqrt_char2(&lead);
        let c = &v.lift(field, &root) * &pi.pow(-m / 2);
        a = &(&a + &c.square()) + &c;
    }
}

fn char2_splits(a: &FieldElement, b: &FieldElement, v: &Place) -> bool {
    let field = a.field();
    let a = artin_schreier_reduce(a, v);
    match valuation(&a, v) {
        Valuation::Infinite => true,
        Valuation::Finite(k) if k >= 1 => true,
        Valuation::Finite(0) => {
            let rf = v.residue_field(field);
            let abar = reduce(&a, v).unwrap().value;
            if rf.trace(&abar) == 0 {
                true
            } else {
                valuation(b, v).finite().unwrap() % 2 == 0
            }
        }
        Valuation::Finite(_) => schmid_trace(&a, b, v) == 0,
    }
}

/// `Tr_{k_v/F_p} Res_v(a · db/b)`, the additive symbol `[a, b)_v`.
pub fn schmid_trace(a: &FieldElement, b: &FieldElement, v: &Place) -> u64 {
    let (fa, fb) = (a.as_ratfunc().unwrap(), b.as_ratfunc().unwrap());
    let (bn, bd) = (fb.num(), fb.den());
    let dlog = bn.derivative().mul(bd).sub(&bn.mul(&bd.derivative()));
    let num = fa.num().mul(&dlog);
    let den = fa.den().mul(bn).mul(bd);
    let res = differential_residue(&num, &den, v);
    v.residue_field(a.field()).trace(&res)
}

/// Residue at `v` of the differential `(num/den) dT`.
pub fn differential_residue(num: &Poly, den: &Poly, v: &Place) -> Poly {
    let p = num.modulus();
    match v {
        Place::Poly(f) => {
            let rf = ResidueField::new(f.clone());
            let alpha = rf.reduce(&Poly::t(p));
            laurent_coefficient(&rf, &alpha, num, den)
        }
        Place::Infinity => {
            if num.is_zero() {
                return Poly::zero(p);
            }
            // T = 1/t, dT = -dt/t^2
            let rev = |g: &Poly| Poly::new(p, g.coeffs().iter().rev().copied().collect());
            let e = den.deg_i() - num.deg_i() - 2;
            let (mut n, mut d) = (rev(num).neg(), rev(den));
            if e >= 0 {
                n = n.shift(e as usize);
            } else {
                d = d.shift((-e) as usize);
            }
            let rf = ResidueField::prime(p);
            laurent_coefficient(&rf, &Poly::zero(p), &n, &d)
        }
        Place::Prime(_) => panic!("differential residues live on function fields"),
    }
}

/// Coefficient of `s^{-1}` in the expansion of `num/den` at `T = α + s`.
fn laurent_coefficient(rf: &ResidueField, alpha: &Poly, num: &Poly, den: &Poly) -> Poly {
    if num.is_zero() {
        return rf.zero();
    }
    let n = taylor_shift(rf, alpha, num);
    let d = taylor_shift(rf, alpha, den);
    let on = n.iter().position(|c| !c.is_zero()).unwrap();
    let od = d.iter().position(|c| !c.is_zero()).unwrap();
    let want = od as i64 - on as i64 - 1;
    if want < 0 {
        return rf.zero();
    }
    let want = want as usize;
    let n = &n[on..];
    let d = &d[od..];
    let d0inv = rf.inv(&d[0]).unwrap();
    let mut q: Vec<Poly> = Vec::with_capacity(want + 1);
    for i in 0..=want {
        let mut acc = n.get(i).cloned().unwrap_or_else(|| rf.zero());
        for j in 1..=i {
            if let Some(dj) = d.get(j) {
                acc = rf.sub(&acc, &rf.mul(dj, &q[i - j]));
            }
        }
        q.push(rf.mul(&acc, &d0inv));
    }
    q[want].clone()
}

/// Coefficients of `g(α + s)` as a polynomial in `s` over the residue field.
fn taylor_shift(rf: &ResidueField, alpha: &Poly, g: &Poly) -> Vec<Poly> {
    let p = g.modulus();
    let mut out: Vec<Poly> = Vec::new();
    for &c in g.coeffs().iter().rev() {
        let mut next = vec![rf.zero(); out.len() + 1];
        for (i, r) in out.iter().enumerate() {
            next[i] = rf.add(&next[i], &rf.mul(alpha, r));
            next[i + 1] = rf.add(&next[i + 1], r);
        }
        next[0] = rf.add(&next[0], &Poly::constant(p, c));
        out = next;
    }
    out
}

/// Places that can possibly ramify: everything else splits because the
/// relevant entries are units there and the residue characteristic is odd
/// (or the Artin–Schreier equation has a simple residual root).
pub fn candidate_places(q: &QuaternionDesc) -> Result<PlaceSet> {
    let field = q.field();
    let mut out = BTreeSet::new();
    let mut add = |x: &FieldElement| -> Result<()> {
        if !x.is_zero() {
            out.extend(support(x)?);
        }
        Ok(())
    };
    add(&q.a)?;
    add(&q.b)?;
    if q.form == Form::ArtinSchreier {
        add(&q.one_plus_4a())?;
    }
    match field {
        FieldDesc::Rationals => {
            out.insert(Place::Prime(2));
        }
        FieldDesc::RationalFunctions { .. } => {
            out.insert(Place::Infinity);
        }
    }
    Ok(out)
}

/// `Δ(q)`, the set of places where `q` does not split.
pub fn ramification_set(q: &QuaternionDesc) -> Result<PlaceSet> {
    Ok(candidate_places(q)?
        .into_iter()
        .filter(|v| !local_splits(q, v))
        .collect())
}

/// Whether `q` splits at every real place of `K`.
pub fn is_nonreal(q: &QuaternionDesc) -> bool {
    match q.classical_pair() {
        Some((alpha, beta)) if q.field() == FieldDesc::Rationals => {
            alpha.signum() == Some(1) || beta.signum() == Some(1)
        }
        _ => true,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleVerdict {
    Split,
    Nonsplit,
    Inconclusive,
}

impl fmt::Display for OracleVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleVerdict::Split => "split",
            OracleVerdict::Nonsplit => "nonsplit",
            OracleVerdict::Inconclusive => "inconclusive",
        })
    }
}

const ORACLE_NODE_BUDGET: usize = 400_000;

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    One,
    Free,
    InMaximal,
}

/// Brute-force splitting test, independent of [`local_splits`].
///
/// Searches for a primitive zero of the ternary norm form digit by digit
/// in `O_v`, pruning residue classes on which the form cannot vanish.
/// A node whose value is small relative to a partial derivative
/// (`v(F) > 2 v(∂F)`) lifts to a true zero by Hensel's lemma; an exhausted
/// search tree proves anisotropy.
pub fn local_split_oracle(q: &QuaternionDesc, v: &Place, precision: u32) -> OracleVerdict {
    let field = q.field();
    let pi = v.uniformizer(field);
    let rf = v.residue_field(field);
    let digits: Vec<FieldElement> = rf.elements().map(|r| v.lift(field, &r)).collect();
    // scale y and z so that every coefficient is integral
    let scale = |c: &FieldElement| match valuation(c, v) {
        Valuation::Finite(k) if k < 0 => (-k + 1) / 2,
        _ => 0,
    };
    let ys = pi.pow(scale(&q.a));
    let zs = pi.pow(scale(&q.b));
    let eval = |x: &FieldElement, y: &FieldElement, z: &FieldElement| {
        q.ternary_form(x, &(y * &ys), &(z * &zs))
    };
    let one = field.one();
    let zero = field.zero();
    let eps = |k: i64| pi.pow(k);
    let charts = [
        [Slot::One, Slot::Free, Slot::Free],
        [Slot::InMaximal, Slot::One, Slot::Free],
        [Slot::InMaximal, Slot::InMaximal, Slot::One],
    ];
    let mut nodes = 0usize;
    let mut exhausted = true;
    for chart in charts {
        let start: [FieldElement; 3] = std::array::from_fn(|i| {
            if chart[i] == Slot::One {
                one.clone()
            } else {
                zero.clone()
            }
        });
        let mut frontier = vec![start];
        for level in 0..precision as i64 {
            let step = eps(level);
            let scaled: Vec<FieldElement> = digits.iter().map(|d| d * &step).collect();
            let mut next = Vec::new();
            for node in &frontier {
                let mut children = vec![node.clone()];
                for (i, slot) in chart.iter().enumerate() {
                    let fixed = *slot == Slot::One || (*slot == Slot::InMaximal && level == 0);
                    if fixed {
                        continue;
                    }
                    children = children
                        .into_iter()
                        .flat_map(|c| {
                            scaled.iter().map(move |d| {
                                let mut c = c.clone();
                                c[i] = &c[i] + d;
                                c
                            })
                        })
                        .collect();
                }
                for c in children {
                    nodes += 1;
                    if nodes > ORACLE_NODE_BUDGET {
                        return OracleVerdict::Inconclusive;
                    }
                    let fv = eval(&c[0], &c[1], &c[2]);
                    if fv.is_zero() {
                        return OracleVerdict::Split;
                    }
                    let vf = valuation(&fv, v).finite().unwrap();
                    if vf < level + 1 {
                        continue;
                    }
                    if hensel_certifies(q, v, &c, &ys, &zs, vf) {
                        return OracleVerdict::Split;
                    }
                    next.push(c);
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        if !frontier.is_empty() {
            exhausted = false;
        }
    }
    if exhausted {
        OracleVerdict::Nonsplit
    } else {
        OracleVerdict::Inconclusive
    }
}

fn hensel_certifies(
    q: &QuaternionDesc,
    v: &Place,
    c: &[FieldElement; 3],
    ys: &FieldElement,
    zs: &FieldElement,
    vf: i64,
) -> bool {
    let field = q.field();
    let two = field.from_int(2);
    let (x, y, z) = (&c[0], &(&c[1] * ys), &(&c[2] * zs));
    // partials of F(x, ys·Y, zs·Z) in x, Y, Z
    let mut dx = &two * x;
    let mut dy = -(&(&two * &q.a) * y);
    if q.form == Form::ArtinSchreier {
        dx = &dx + y;
        dy = &dy + x;
    }
    let dy = &dy * ys;
    let dz = &(-(&(&two * &q.b) * z)) * zs;
    [dx, dy, dz].iter().any(|d| match valuation(d, v) {
        Valuation::Finite(k) => vf > 2 * k,
        Valuation::Infinite => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::place::format_places;

    fn q() -> FieldDesc {
        FieldDesc::Rationals
    }

    fn f2() -> FieldDesc {
        FieldDesc::function_field(2).unwrap()
    }

    #[test]
    fn classicalize_examples() {
        let quat = QuaternionDesc::parse(q(), "AS[1/4;5]").unwrap();
        assert_eq!(quat.classicalize().unwrap().to_string(), "CL(2;5)");
        let as1 = QuaternionDesc::parse(f2(), "AS[1;T]").unwrap();
        assert_eq!(as1.classicalize(), Err(Error::NoClassicalForm));
    }

    #[test]
    fn norm_and_trace_examples() {
        let f = q();
        let quat = QuaternionDesc::artin_schreier(f.one(), f.one()).unwrap();
        let e2 = [f.zero(), f.one(), f.zero(), f.zero()];
        assert_eq!(quat.reduced_norm(&e2), f.from_int(-1));
        assert_eq!(quat.reduced_trace(&e2), f.one());
        let cl = QuaternionDesc::classical(f.from_int(3), f.from_int(7)).unwrap();
        let e3 = [f.zero(), f.zero(), f.one(), f.zero()];
        assert_eq!(cl.reduced_norm(&e3), f.from_int(-7));
        assert_eq!(cl.reduced_trace(&e3), f.zero());
    }

    #[test]
    fn ramification_examples() {
        let cl = QuaternionDesc::parse(q(), "CL(2;5)").unwrap();
        assert_eq!(format_places(&ramification_set(&cl).unwrap()), "{q:2, q:5}");
        let as1 = QuaternionDesc::parse(f2(), "AS[1;T]").unwrap();
        assert_eq!(format_places(&ramification_set(&as1).unwrap()), "{f:T, inf}");
        let split = QuaternionDesc::parse(q(), "AS[0;7]").unwrap();
        assert!(ramification_set(&split).unwrap().is_empty());
        let hamilton = QuaternionDesc::parse(q(), "CL(-1;-1)").unwrap();
        assert_eq!(format_places(&ramification_set(&hamilton).unwrap()), "{q:2}");
        assert!(!is_nonreal(&hamilton));
    }

    #[test]
    fn oracle_examples() {
        let as1 = QuaternionDesc::parse(f2(), "AS[1;T]").unwrap();
        let vt = Place::Poly(Poly::t(2));
        assert_eq!(local_split_oracle(&as1, &vt, 8), OracleVerdict::Nonsplit);
        let split = QuaternionDesc::parse(q(), "AS[0;7]").unwrap();
        assert_eq!(local_split_oracle(&split, &Place::Prime(3), 1), OracleVerdict::Split);
    }

    #[test]
    fn artin_schreier_reduction_lowers_even_poles() {
        let f = f2();
        let a = f.parse_element("T^4+T").unwrap();
        let r = artin_schreier_reduce(&a, &Place::Infinity);
        assert!(valuation(&r, &Place::Infinity) >= Valuation::Finite(-1));
    }

    #[test]
    fn wild_case_agrees_with_oracle() {
        let f = f2();
        let vt = Place::Poly(Poly::t(2));
        for (a, b) in [("1/T", "T+1"), ("1/T", "T"), ("1/T^3", "1+T"), ("1/T^3", "1+T^2"), ("1/T", "1+T^3")] {
            let quat = QuaternionDesc::parse(f, &format!("AS[{a};{b}]")).unwrap();
            let oracle = local_split_oracle(&quat, &vt, 10);
            assert_ne!(oracle, OracleVerdict::Inconclusive, "{quat}");
            assert_eq!(local_splits(&quat, &vt), oracle == OracleVerdict::Split, "{quat}");
        }
    }
}
