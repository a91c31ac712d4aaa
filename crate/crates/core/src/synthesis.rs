//! Parameter synthesis: `π`, `u`, `c` for a finite set of places `S`, and
//! for each place `w ∉ S` a pair `(a, b) ∈ Φ^S_u` with
//! `Δ([a^2, bπ)) = S ∪ {w}`. Every result is re-verified before it is
//! returned.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;

use crate::approx::{weak_approximate, Target};
use crate::definable::{in_complement_union, in_phi, in_t, zeros};
use crate::error::{Error, Result};
use crate::field::{FieldDesc, FieldElement};
use crate::place::{
    format_places, odd_neg, parse_places, places, places_outside, valuation, Place, PlaceSet,
    Valuation,
};
use crate::poly::Poly;
use crate::quaternion::{is_nonreal, local_splits, ramification_set, QuaternionDesc};

/// Parameters `(S, π, u, c)` satisfying the hypotheses of the main lemma.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisPack {
    pub s: PlaceSet,
    pub pi: FieldElement,
    pub u: FieldElement,
    pub c: FieldElement,
}

impl SynthesisPack {
    pub fn field(&self) -> FieldDesc {
        self.pi.field()
    }

    /// Checks `|S|` odd, `S ⊆ Odd(π)`, the residue condition on `u` and
    /// the valuations of `c` on `Odd(π)`.
    pub fn validate(&self) -> Result<()> {
        if self.s.len() % 2 == 0 {
            return Err(Error::pre(format!(
                "S = {} must have odd cardinality",
                format_places(&self.s)
            )));
        }
        let (odd, _) = odd_neg(&self.pi)?;
        if !self.s.is_subset(&odd) {
            return Err(Error::pre(format!(
                "S is not contained in Odd(pi) = {}",
                format_places(&odd)
            )));
        }
        for v in &self.s {
            if !u_condition(&self.u, v) {
                return Err(Error::pre(format!("u = {} fails the residue test at {v}", self.u)));
            }
        }
        for v in &odd {
            let want = if self.s.contains(v) { 0 } else { 1 };
            if valuation(&self.c, v) != Valuation::Finite(want) {
                return Err(Error::pre(format!(
                    "c = {} must have valuation {want} at {v}",
                    self.c
                )));
            }
        }
        Ok(())
    }

    /// Parses the record `S|π|u|c`, e.g. `{q:5}|5|2|1`.
    pub fn parse(field: FieldDesc, s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('|').collect();
        let [set, pi, u, c] = parts.as_slice() else {
            return Err(Error::parse(0, "pack record must be S|pi|u|c"));
        };
        Ok(SynthesisPack {
            s: parse_places(field, set)?,
            pi: field.parse_element(pi)?,
            u: field.parse_element(u)?,
            c: field.parse_element(c)?,
        })
    }
}

impl fmt::Display for SynthesisPack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{}|{}|{}",
            format_places(&self.s),
            self.pi,
            self.u,
            self.c
        )
    }
}

/// `v(u) = 0` and `X^2 - X - ū^2` has no root in the residue field.
fn u_condition(u: &FieldElement, v: &Place) -> bool {
    if valuation(u, v) != Valuation::Finite(0) {
        return false;
    }
    let field = u.field();
    let rf = v.residue_field(field);
    let r = crate::place::reduce(u, v).unwrap().value;
    !rf.artin_schreier_has_root(&rf.mul(&r, &r))
}

fn residues(field: FieldDesc, v: &Place) -> Vec<Poly> {
    v.residue_field(field).elements().collect()
}

/// Some `π` with `S ⊆ Odd(π)` and `|Odd(π)|` odd: the product of the
/// uniformizers of `S`, times those of at most two further places.
pub fn find_pi(field: FieldDesc, s: &PlaceSet) -> Result<FieldElement> {
    for v in s {
        v.validate(field)?;
    }
    let mut base = field.one();
    for v in s {
        base = &base * &v.uniformizer(field);
    }
    let aux: Vec<FieldElement> = places_outside(field, s, 12)
        .iter()
        .map(|v| v.uniformizer(field))
        .collect();
    let mut candidates = vec![base.clone()];
    candidates.extend(aux.iter().map(|g| &base * g));
    for i in 0..aux.len() {
        for j in i + 1..aux.len() {
            candidates.push(&(&base * &aux[i]) * &aux[j]);
        }
    }
    for pi in candidates {
        let (odd, _) = odd_neg(&pi)?;
        if s.is_subset(&odd) && odd.len() % 2 == 1 {
            return Ok(pi);
        }
    }
    Err(Error::BudgetExhausted(format!(
        "no pi found for S = {}",
        format_places(s)
    )))
}

/// A unit `u` at every `v ∈ S` with `X^2 - X - u^2` irreducible mod `v`.
pub fn find_u(field: FieldDesc, s: &PlaceSet) -> Result<FieldElement> {
    if s.is_empty() {
        return Err(Error::pre("find_u needs a nonempty S"));
    }
    let mut targets = Vec::new();
    for v in s {
        v.validate(field)?;
        let rf = v.residue_field(field);
        let r = rf
            .elements()
            .find(|r| !r.is_zero() && !rf.artin_schreier_has_root(&rf.mul(r, r)))
            .expect("a finite field has a separable quadratic extension");
        targets.push(Target::new(v.clone(), v.lift(field, &r), 0));
    }
    let u = match field {
        FieldDesc::Rationals => {
            let congruences: Vec<(BigInt, BigInt)> = targets
                .iter()
                .map(|t| {
                    let Place::Prime(p) = t.place else { unreachable!() };
                    (t.value.as_rational().unwrap().to_integer(), BigInt::from(p))
                })
                .collect();
            let (x, _) = crate::arith::crt(&congruences);
            FieldElement::Rat(x.into())
        }
        FieldDesc::RationalFunctions { .. } => weak_approximate(&targets)?,
    };
    debug_assert!(s.iter().all(|v| u_condition(&u, v)));
    Ok(u)
}

const FIND_C_BUDGET: usize = 200_000;

/// `c` with `v(c) = 0` on `S` and `v(c) = 1` on `Odd(π) \ S`.
pub fn find_c(s: &PlaceSet, pi: &FieldElement) -> Result<FieldElement> {
    let field = pi.field();
    let (odd, _) = odd_neg(pi)?;
    if !s.is_subset(&odd) {
        return Err(Error::pre("S must be contained in Odd(pi)"));
    }
    let ok = |c: &FieldElement| {
        !c.is_zero()
            && odd.iter().all(|v| {
                valuation(c, v) == Valuation::Finite(if s.contains(v) { 0 } else { 1 })
            })
    };
    if field == FieldDesc::Rationals {
        let mut c = field.one();
        for v in odd.difference(s) {
            c = &c * &v.uniformizer(field);
        }
        debug_assert!(ok(&c));
        return Ok(c);
    }
    let mut seen = 0usize;
    for h in 0.. {
        for c in field.elements_of_height(h) {
            if ok(&c) {
                return Ok(c);
            }
            seen += 1;
        }
        if seen > FIND_C_BUDGET {
            break;
        }
    }
    let targets: Vec<Target> = odd
        .iter()
        .map(|v| {
            if s.contains(v) {
                Target::new(v.clone(), field.one(), 0)
            } else {
                Target::new(v.clone(), v.uniformizer(field), 1)
            }
        })
        .collect();
    let c = weak_approximate(&targets)?;
    debug_assert!(ok(&c));
    Ok(c)
}

/// A validated pack for a set `S` of odd cardinality.
pub fn synthesize(field: FieldDesc, s: &PlaceSet) -> Result<SynthesisPack> {
    if s.len() % 2 == 0 {
        return Err(Error::pre(format!(
            "S = {} must have odd cardinality",
            format_places(s)
        )));
    }
    let pi = find_pi(field, s)?;
    let u = find_u(field, s)?;
    let c = find_c(s, &pi)?;
    let pack = SynthesisPack {
        s: s.clone(),
        pi,
        u,
        c,
    };
    pack.validate()?;
    Ok(pack)
}

/// The smallest place outside `S`.
pub fn smallest_outside(field: FieldDesc, s: &PlaceSet) -> Place {
    places_outside(field, s, 1).remove(0)
}

/// `S` itself when `|S|` is odd, else `S` plus the smallest place outside.
pub fn odd_superset(field: FieldDesc, s: &PlaceSet) -> PlaceSet {
    let mut out = s.clone();
    if out.len() % 2 == 0 {
        out.insert(smallest_outside(field, s));
    }
    out
}

/// A pack with `S' = Odd(π) ⊇ S` (and `S'` containing the places of
/// residue characteristic 2 outside characteristic 2), as needed by the
/// shorter two-set variants of `T_{a,b}`.
pub fn synthesize_odd_pi(field: FieldDesc, s: &PlaceSet) -> Result<SynthesisPack> {
    let mut base = s.clone();
    if field == FieldDesc::Rationals {
        base.insert(Place::Prime(2));
    }
    let pi = find_pi(field, &base)?;
    let (odd, _) = odd_neg(&pi)?;
    let u = find_u(field, &odd)?;
    let c = find_c(&odd, &pi)?;
    let pack = SynthesisPack { s: odd, pi, u, c };
    pack.validate()?;
    Ok(pack)
}

const B_POOL_PLACES: usize = 25;

/// Products of at most `k` distinct entries of `gens`, each tagged with the
/// indices used.
fn products(gens: &[FieldElement], k: usize, one: &FieldElement) -> Vec<(Vec<usize>, FieldElement)> {
    let mut out = vec![(vec![], one.clone())];
    let mut layer = out.clone();
    for _ in 0..k {
        let mut next = Vec::new();
        for (idx, val) in &layer {
            let start = idx.last().map_or(0, |&i| i + 1);
            for (j, g) in gens.iter().enumerate().skip(start) {
                let mut idx2 = idx.clone();
                idx2.push(j);
                next.push((idx2, val * g));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Square-class representatives of the constants: `±1` over `Q`, `1` and a
/// nonsquare over `F_p` for odd `p`, `1` in characteristic 2.
fn constant_classes(field: FieldDesc) -> Vec<FieldElement> {
    match field {
        FieldDesc::Rationals => vec![field.one(), field.from_int(-1)],
        FieldDesc::RationalFunctions { p: 2 } => vec![field.one()],
        FieldDesc::RationalFunctions { p } => {
            let n = (2..p)
                .find(|&k| crate::poly::sqrt_mod_prime(k, p).is_none())
                .unwrap();
            vec![field.one(), field.from_int(n as i64)]
        }
    }
}

/// Candidate values of `b`, smallest height first.
fn b_candidates(field: FieldDesc, extra: &PlaceSet, base: &FieldElement, k: usize) -> Vec<FieldElement> {
    let mut pool: PlaceSet = places(field).take(B_POOL_PLACES).collect();
    pool.extend(extra.iter().cloned());
    let gens: Vec<FieldElement> = pool.iter().map(|v| v.uniformizer(field)).collect();
    let mut out: Vec<(BigInt, usize, Vec<usize>, FieldElement)> = Vec::new();
    for (idx, prod) in products(&gens, k, &field.one()) {
        for (ci, cst) in constant_classes(field).iter().enumerate() {
            let b = &(&prod * cst) * base;
            out.push((b.height(), ci, idx.clone(), b));
        }
    }
    out.sort_by(|x, y| (&x.0, x.1, &x.2).cmp(&(&y.0, y.1, &y.2)));
    out.into_iter().map(|t| t.3).collect()
}

/// Multiplies `b` by a square so that it becomes a unit at every place of
/// `s` where its valuation is even, leaving the other valuations on `s`
/// unchanged.
fn normalize_by_square(b: &FieldElement, s: &PlaceSet) -> Result<FieldElement> {
    let field = b.field();
    let vals: Vec<i64> = s.iter().map(|v| valuation(b, v).finite().unwrap()).collect();
    if vals.iter().all(|&k| k == 0 || k % 2 != 0) {
        return Ok(b.clone());
    }
    let targets: Vec<Target> = s
        .iter()
        .zip(vals)
        .map(|(v, k)| {
            let e = if k % 2 == 0 { -k / 2 } else { 0 };
            Target::new(v.clone(), v.uniformizer(field).pow(e), e)
        })
        .collect();
    let z = weak_approximate(&targets)?;
    Ok(b * &z.square())
}

/// `a` with `a ≡ u` modulo every `v ∈ S`, `w(a) = 0` and `X^2 - X - a^2`
/// irreducible modulo `w`.
fn find_a(pack: &SynthesisPack, w: &Place) -> Result<FieldElement> {
    let field = pack.field();
    let good = |a: &FieldElement| u_condition(a, w);
    match field {
        FieldDesc::Rationals => {
            let mut m = field.one();
            for v in &pack.s {
                m = &m * &v.uniformizer(field);
            }
            let bound = w.residue_size(field) as i64 + 2;
            for k in 0..bound {
                let a = &pack.u + &(&m * &field.from_int(k));
                if good(&a) {
                    return Ok(a);
                }
            }
        }
        FieldDesc::RationalFunctions { .. } => {
            let rf = w.residue_field(field);
            for r in residues(field, w) {
                if r.is_zero() || rf.artin_schreier_has_root(&rf.mul(&r, &r)) {
                    continue;
                }
                let mut targets: Vec<Target> = pack
                    .s
                    .iter()
                    .map(|v| Target::new(v.clone(), pack.u.clone(), 0))
                    .collect();
                targets.push(Target::new(w.clone(), w.lift(field, &r), 0));
                let a = weak_approximate(&targets)?;
                if good(&a) {
                    return Ok(a);
                }
            }
        }
    }
    Err(Error::BudgetExhausted(format!("no a found for w = {w}")))
}

/// `(a, b) ∈ Φ^S_u` with `Δ([a^2, bπ)) = S ∪ {w}`.
pub fn find_ab(pack: &SynthesisPack, w: &Place) -> Result<(FieldElement, FieldElement)> {
    let field = pack.field();
    w.validate(field)?;
    if pack.s.contains(w) {
        return Err(Error::pre(format!("w = {w} lies in S")));
    }
    let a = find_a(pack, w)?;
    let mut target = pack.s.clone();
    target.insert(w.clone());
    let a2 = a.square();
    for b in b_candidates(field, &target, &field.one(), 3) {
        let q = QuaternionDesc::artin_schreier(a2.clone(), &b * &pack.pi)?;
        if pack.s.iter().any(|v| valuation(&b, v).is_odd()) {
            continue;
        }
        if !target.iter().all(|v| !local_splits(&q, v)) {
            continue;
        }
        if ramification_set(&q)? != target {
            continue;
        }
        let b = normalize_by_square(&b, &pack.s)?;
        let q = QuaternionDesc::artin_schreier(a2.clone(), &b * &pack.pi)?;
        assert!(in_phi(&pack.s, &pack.u, &a, &b)?);
        assert_eq!(ramification_set(&q)?, target);
        assert!(is_nonreal(&q));
        return Ok((a, b));
    }
    Err(Error::BudgetExhausted(format!(
        "no b found for w = {w} with a = {a} in the candidate pool"
    )))
}

/// A nonreal `[a, b)` with `Δ = r`, for `|r|` even.
pub fn find_quaternion_with_ramification(field: FieldDesc, r: &PlaceSet) -> Result<QuaternionDesc> {
    if r.len() % 2 == 1 {
        return Err(Error::pre("a ramification set has even cardinality"));
    }
    if r.is_empty() {
        return QuaternionDesc::artin_schreier(field.zero(), field.one());
    }
    let mut targets = Vec::new();
    for v in r {
        v.validate(field)?;
        let rf = v.residue_field(field);
        let res = rf
            .elements()
            .find(|x| !rf.artin_schreier_has_root(x))
            .expect("a finite field has a separable quadratic extension");
        targets.push(Target::new(v.clone(), v.lift(field, &res), 0));
    }
    let mut a = weak_approximate(&targets)?;
    if field == FieldDesc::Rationals {
        // keep 1 + 4a positive so that every candidate is nonreal
        let m: FieldElement = r
            .iter()
            .fold(field.one(), |acc, v| &acc * &v.uniformizer(field));
        while a.signum() == Some(-1) {
            a = &a + &m;
        }
    }
    let mut base = field.one();
    for v in r {
        base = &base * &v.uniformizer(field);
    }
    for b in b_candidates(field, &PlaceSet::new(), &base, 2) {
        let Ok(q) = QuaternionDesc::artin_schreier(a.clone(), b) else {
            continue;
        };
        if !r.iter().all(|v| !local_splits(&q, v)) || !is_nonreal(&q) {
            continue;
        }
        if &ramification_set(&q)? == r {
            return Ok(q);
        }
    }
    Err(Error::BudgetExhausted(format!(
        "no quaternion algebra found with ramification {}",
        format_places(r)
    )))
}

/// Memoized `find_ab` for one pack.
#[derive(Debug)]
pub struct AbMemo {
    pack: SynthesisPack,
    cache: Mutex<HashMap<Place, (FieldElement, FieldElement)>>,
}

impl AbMemo {
    pub fn new(pack: SynthesisPack) -> Self {
        AbMemo {
            pack,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn pack(&self) -> &SynthesisPack {
        &self.pack
    }

    pub fn find_ab(&self, w: &Place) -> Result<(FieldElement, FieldElement)> {
        if let Some(hit) = self.cache.lock().unwrap().get(w) {
            return Ok(hit.clone());
        }
        let ab = find_ab(&self.pack, w)?;
        self.cache.lock().unwrap().insert(w.clone(), ab.clone());
        Ok(ab)
    }
}

/// The data certifying `x ∈ T_{a,b}` for one `(a, b) ∈ Φ^S_u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub w: Place,
    pub a: FieldElement,
    pub b: FieldElement,
}

/// For `x ∈ ⋃_{v ∉ S} m_v`, picks the smallest `w ∉ S` with `w(x) > 0` and
/// returns the pair for `w`; `None` when `x` is not in the union.
pub fn witness_for(x: &FieldElement, memo: &AbMemo) -> Result<Option<Witness>> {
    let pack = memo.pack();
    if !in_complement_union(x, &pack.s) {
        return Ok(None);
    }
    let w = if x.is_zero() {
        smallest_outside(pack.field(), &pack.s)
    } else {
        zeros(x)
            .into_iter()
            .find(|v| !pack.s.contains(v))
            .expect("x lies in some m_v with v outside S")
    };
    let (a, b) = memo.find_ab(&w)?;
    assert!(in_t(pack, &a, &b, x)?, "T_{{{a},{b}}} must contain {x}");
    Ok(Some(Witness { w, a, b }))
}

/// Membership in `⋃ T_{a,b}` through the witness map.
pub fn in_union_of_t(x: &FieldElement, memo: &AbMemo) -> Result<bool> {
    Ok(witness_for(x, memo)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldDesc {
        FieldDesc::Rationals
    }

    fn set(field: FieldDesc, s: &str) -> PlaceSet {
        parse_places(field, s).unwrap()
    }

    #[test]
    fn find_pi_examples() {
        assert_eq!(find_pi(q(), &set(q(), "{q:5}")).unwrap(), q().from_int(5));
        assert_eq!(find_pi(q(), &set(q(), "{q:2, q:5}")).unwrap(), q().from_int(30));
        assert_eq!(find_pi(q(), &PlaceSet::new()).unwrap(), q().from_int(2));
    }

    #[test]
    fn find_u_examples() {
        assert_eq!(find_u(q(), &set(q(), "{q:5}")).unwrap(), q().from_int(2));
        assert_eq!(find_u(q(), &set(q(), "{q:2, q:5}")).unwrap(), q().from_int(7));
        let f2 = FieldDesc::function_field(2).unwrap();
        assert_eq!(find_u(f2, &set(f2, "{f:T}")).unwrap(), f2.one());
    }

    #[test]
    fn find_c_examples() {
        assert_eq!(find_c(&set(q(), "{q:5}"), &q().from_int(5)).unwrap(), q().one());
        assert_eq!(find_c(&set(q(), "{q:2, q:5}"), &q().from_int(30)).unwrap(), q().from_int(3));
        let f2 = FieldDesc::function_field(2).unwrap();
        let c = find_c(&set(f2, "{f:T}"), &f2.t().unwrap()).unwrap();
        assert_eq!(valuation(&c, &Place::Infinity), Valuation::Finite(1));
        assert_eq!(valuation(&c, &Place::Poly(Poly::t(2))), Valuation::Finite(0));
    }

    #[test]
    fn find_ab_example() {
        let pack = SynthesisPack::parse(q(), "{q:5}|5|2|1").unwrap();
        pack.validate().unwrap();
        let (a, b) = find_ab(&pack, &Place::Prime(17)).unwrap();
        assert_eq!((a, b), (q().from_int(7), q().from_int(17)));
        assert!(find_ab(&pack, &Place::Prime(5)).is_err());
    }

    #[test]
    fn spec_style_f2_pack_is_rejected() {
        let f2 = FieldDesc::function_field(2).unwrap();
        let pack = SynthesisPack::parse(f2, "{f:T}|T|1|1").unwrap();
        assert!(pack.validate().is_err());
        let good = synthesize(f2, &set(f2, "{f:T}")).unwrap();
        good.validate().unwrap();
        let (a, b) = find_ab(&good, &Place::Poly(Poly::parse(2, "T+1").unwrap())).unwrap();
        let qd = QuaternionDesc::artin_schreier(a.square(), &b * &good.pi).unwrap();
        assert_eq!(format_places(&ramification_set(&qd).unwrap()), "{f:T, f:T+1}");
    }

    #[test]
    fn witness_examples() {
        let pack = SynthesisPack::parse(q(), "{q:5}|5|2|1").unwrap();
        let memo = AbMemo::new(pack);
        let w = witness_for(&q().from_int(17), &memo).unwrap().unwrap();
        assert_eq!((w.a, w.b), (q().from_int(7), q().from_int(17)));
        assert!(witness_for(&q().from_ratio(1, 3), &memo).unwrap().is_none());
        let w3 = witness_for(&q().from_int(3), &memo).unwrap().unwrap();
        assert_eq!(w3.w, Place::Prime(3));
    }

    #[test]
    fn quaternion_with_given_ramification() {
        for field in [q(), FieldDesc::function_field(2).unwrap(), FieldDesc::function_field(3).unwrap()] {
            let r: PlaceSet = places(field).take(2).collect();
            let qd = find_quaternion_with_ramification(field, &r).unwrap();
            assert_eq!(ramification_set(&qd).unwrap(), r);
            let r4: PlaceSet = places(field).skip(1).take(4).collect();
            let qd = find_quaternion_with_ramification(field, &r4).unwrap();
            assert_eq!(ramification_set(&qd).unwrap(), r4);
        }
    }
}
