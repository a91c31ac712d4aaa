//! Membership oracles for the sets built from quaternion algebras:
//! `S(Q)`, `Σ(Q, Q')` and its inverse and unit variants, `J^c(Q)`,
//! `H^c(Q)`, `Φ^S_u`, `T_{a,b}`, `O_S` and `⋃_{v ∉ S} m_v`.
//!
//! All of these except `S(Q)` are decided by valuation conditions; `S(Q)`
//! membership is only searched for, as a cross-check.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldDesc, FieldElement};
use crate::place::{format_places, parse_places, valuation, Place, PlaceSet, Valuation};
use crate::quaternion::{is_nonreal, ramification_set, QuaternionDesc};
use crate::synthesis::SynthesisPack;

pub use crate::place::odd_neg;

/// A conjunction of conditions `v(x) >= k`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ValuationBox {
    pub lower: Vec<(Place, i64)>,
}

impl ValuationBox {
    pub fn contains(&self, x: &FieldElement) -> bool {
        self.lower.iter().all(|(v, k)| valuation(x, v).at_least(*k))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaMode {
    Plain,
    Inverse,
    Units,
}

fn require_nonreal(q: &QuaternionDesc) -> Result<()> {
    if is_nonreal(q) {
        Ok(())
    } else {
        Err(Error::RequiresNonreal)
    }
}

/// `Δ(q) ∩ Δ(q')` for nonreal `q`, `q'`.
pub fn sigma_places(q: &QuaternionDesc, q2: &QuaternionDesc) -> Result<PlaceSet> {
    require_nonreal(q)?;
    require_nonreal(q2)?;
    let d1 = ramification_set(q)?;
    let d2 = ramification_set(q2)?;
    Ok(d1.intersection(&d2).cloned().collect())
}

/// Membership in `⋂_{v ∈ places} O_v` or its inverse / unit variants.
pub fn in_semilocal(places: &PlaceSet, x: &FieldElement, mode: SigmaMode) -> bool {
    let ok = |bad: fn(Valuation) -> bool| places.iter().all(|v| !bad(valuation(x, v)));
    match mode {
        SigmaMode::Plain => ok(|k| k < Valuation::Finite(0)),
        SigmaMode::Inverse => !x.is_zero() && ok(|k| k > Valuation::Finite(0)),
        SigmaMode::Units => !x.is_zero() && ok(|k| k != Valuation::Finite(0)),
    }
}

pub fn in_sigma(
    q: &QuaternionDesc,
    q2: &QuaternionDesc,
    x: &FieldElement,
    mode: SigmaMode,
) -> Result<bool> {
    Ok(in_semilocal(&sigma_places(q, q2)?, x, mode))
}

/// A point of `Q \ K` with reduced norm 1 and a prescribed reduced trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SofQVerdict {
    Member {
        x1: FieldElement,
        x3: FieldElement,
        x4: FieldElement,
    },
    NoWitnessFound,
}

/// Bounded search for `t ∈ S(Q)` with `Q = [a, b)`: looks for
/// `(x_1, x_3, x_4)` with `x_1^2 + x_1 x_2 - a x_2^2 - b(x_3^2 + x_3 x_4 - a x_4^2) = 1`
/// where `x_2 = t - 2x_1`, and `(x_2, x_3, x_4) != 0`.
///
/// Outside characteristic 2 the equation is solved for `x_1` by a square
/// root, so the search runs over `(x_3, x_4)` only.
pub fn in_s_of_q(q: &QuaternionDesc, t: &FieldElement, budget: usize) -> SofQVerdict {
    let field = q.field();
    let (a, b) = (q.a(), q.b());
    let one = field.one();
    let two = field.from_int(2);
    let four = field.from_int(4);
    let lhs = |x1: &FieldElement, x3: &FieldElement, x4: &FieldElement| {
        let x2 = t - &(&two * x1);
        q.reduced_norm(&[x1.clone(), x2, x3.clone(), x4.clone()])
    };
    let noncentral = |x1: &FieldElement, x3: &FieldElement, x4: &FieldElement| {
        !(t - &(&two * x1)).is_zero() || !x3.is_zero() || !x4.is_zero()
    };
    let mut tried = 0usize;
    let pool = |h: u64| field.elements_of_height(h);
    if field == FieldDesc::Rationals {
        return rational_s_of_q(a, b, t, budget, |x1, x3, x4| lhs(x1, x3, x4).is_one() && noncentral(x1, x3, x4));
    }
    if field.characteristic() != 2 {
        let d = &(a * &four) + &one;
        for h in 0.. {
            let elems_h = pool(h);
            let lower: Vec<FieldElement> = (0..h).flat_map(pool).collect();
            // pairs with max height exactly h
            let pairs = elems_h
                .iter()
                .flat_map(|x3| lower.iter().chain(elems_h.iter()).map(move |x4| (x3, x4)))
                .chain(
                    lower
                        .iter()
                        .flat_map(|x3| elems_h.iter().map(move |x4| (x3, x4))),
                );
            for (x3, x4) in pairs {
                tried += 1;
                if tried > budget {
                    return SofQVerdict::NoWitnessFound;
                }
                let n34 = &(&(&x3.square() + &(x3 * x4)) - &(a * &x4.square())) * b;
                // d x1^2 - d t x1 + (a t^2 + 1 + n34) = 0
                let c0 = &(&(a * &t.square()) + &one) + &n34;
                let disc = &(&d.square() * &t.square()) - &(&(&four * &d) * &c0);
                if let Some(r) = disc.sqrt() {
                    for s in [r.clone(), -r] {
                        let x1 = &(&(&d * t) + &s) / &(&two * &d);
                        if lhs(&x1, x3, x4).is_one() && noncentral(&x1, x3, x4) {
                            return SofQVerdict::Member {
                                x1,
                                x3: x3.clone(),
                                x4: x4.clone(),
                            };
                        }
                    }
                }
            }
            if h > 64 {
                break;
            }
        }
        return SofQVerdict::NoWitnessFound;
    }
    for h in 0..64u64 {
        let all: Vec<FieldElement> = (0..=h).flat_map(pool).collect();
        for x1 in &all {
            for x3 in &all {
                for x4 in &all {
                    if x1.height() < h.into() && x3.height() < h.into() && x4.height() < h.into() {
                        continue;
                    }
                    tried += 1;
                    if tried > budget {
                        return SofQVerdict::NoWitnessFound;
                    }
                    if lhs(x1, x3, x4).is_one() && noncentral(x1, x3, x4) {
                        return SofQVerdict::Member {
                            x1: x1.clone(),
                            x3: x3.clone(),
                            x4: x4.clone(),
                        };
                    }
                }
            }
        }
    }
    SofQVerdict::NoWitnessFound
}

/// Over Q the norm equation is the diagonal form
/// `d z^2 = t^2 - 4 - b X^2 + b d Y^2` with `d = 1 + 4a`, `X = 2x_3 + x_4`,
/// `Y = x_4` and `x_1 = (t ± z)/2`. Searches `X = i/w`, `Y = j/w` by
/// growing `max(w, i, j)`.
fn rational_s_of_q(
    a: &FieldElement,
    b: &FieldElement,
    t: &FieldElement,
    budget: usize,
    accept: impl Fn(&FieldElement, &FieldElement, &FieldElement) -> bool,
) -> SofQVerdict {
    let field = FieldDesc::Rationals;
    let int = |n: u64| field.from_int(n as i64);
    let two = int(2);
    let d = &(&int(4) * a) + &field.one();
    let m = &t.square() - &int(4);
    let bd = b * &d;
    let mut tried = 0usize;
    for n in 1u64.. {
        for w in 1..=n {
            for i in 0..=n {
                for j in 0..=n {
                    if w < n && i < n && j < n {
                        continue;
                    }
                    tried += 1;
                    if tried > budget {
                        return SofQVerdict::NoWitnessFound;
                    }
                    let (x, y) = (&int(i) / &int(w), &int(j) / &int(w));
                    let rhs = &(&m - &(b * &x.square())) + &(&bd * &y.square());
                    let Some(z) = (&rhs / &d).sqrt() else { continue };
                    for (xx, yy) in [(x.clone(), y.clone()), (-x.clone(), y.clone()), (x.clone(), -y.clone()), (-x.clone(), -y.clone())] {
                        let x3 = &(&xx - &yy) / &two;
                        for zz in [z.clone(), -z.clone()] {
                            let x1 = &(t + &zz) / &two;
                            if accept(&x1, &x3, &yy) {
                                return SofQVerdict::Member { x1, x3, x4: yy };
                            }
                        }
                    }
                }
            }
        }
    }
    SofQVerdict::NoWitnessFound
}

/// `J^c(q) = ⋂ {m_v | v ∈ Δ(q) ∩ Odd(c)}` as valuation conditions.
pub fn j_box(delta: &PlaceSet, c: &FieldElement) -> Result<ValuationBox> {
    let (odd, _) = odd_neg(c)?;
    Ok(ValuationBox {
        lower: delta.intersection(&odd).map(|v| (v.clone(), 1)).collect(),
    })
}

/// `H^c(q) = ⋂ {m_v^{-v(c)} | v ∈ Δ(q) ∩ Neg(c)}` as valuation conditions.
pub fn h_box(delta: &PlaceSet, c: &FieldElement) -> Result<ValuationBox> {
    let (_, neg) = odd_neg(c)?;
    Ok(ValuationBox {
        lower: delta
            .intersection(&neg)
            .map(|v| (v.clone(), -valuation(c, v).finite().unwrap()))
            .collect(),
    })
}

pub fn in_j(q: &QuaternionDesc, c: &FieldElement, x: &FieldElement) -> Result<bool> {
    require_nonreal(q)?;
    Ok(j_box(&ramification_set(q)?, c)?.contains(x))
}

pub fn in_h(q: &QuaternionDesc, c: &FieldElement, x: &FieldElement) -> Result<bool> {
    require_nonreal(q)?;
    Ok(h_box(&ramification_set(q)?, c)?.contains(x))
}

/// `(a, b) ∈ Φ^S_u`: `b` a unit and `a ≡ u` modulo `m_v` for every `v ∈ S`.
pub fn in_phi(s: &PlaceSet, u: &FieldElement, a: &FieldElement, b: &FieldElement) -> Result<bool> {
    if s.is_empty() {
        return Err(Error::pre("Phi needs a nonempty set of places"));
    }
    for v in s {
        if valuation(u, v) != Valuation::Finite(0) {
            return Err(Error::pre(format!("u = {u} is not a unit at {v}")));
        }
    }
    let diff = a - u;
    Ok(s.iter()
        .all(|v| valuation(b, v) == Valuation::Finite(0) && valuation(&diff, v).at_least(1)))
}

/// Which intersection of `J`/`H` sets defines `T_{a,b}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TVariant {
    /// `J^{1+4a^2} ∩ J^b ∩ J^c ∩ H^a`.
    Full,
    /// `J^b ∩ H^a` (characteristic 2, `S = Odd(π)`).
    Char2,
    /// `J^{1+4a^2} ∩ J^b` (characteristic not 2, `S = Odd(π)` containing
    /// the dyadic places).
    OddChar,
}

/// `T_{a,b}` for a fixed pack and `(a, b)`, as valuation conditions.
#[derive(Clone, Debug)]
pub struct TSet {
    pub quaternion: QuaternionDesc,
    pub delta: PlaceSet,
    pub conditions: ValuationBox,
}

impl TSet {
    pub fn new(pack: &SynthesisPack, a: &FieldElement, b: &FieldElement, variant: TVariant) -> Result<TSet> {
        if !in_phi(&pack.s, &pack.u, a, b)? {
            return Err(Error::pre(format!("({a}, {b}) is not in Phi")));
        }
        let field = a.field();
        let q = QuaternionDesc::artin_schreier(a.square(), b * &pack.pi)?;
        let delta = ramification_set(&q)?;
        let d = &(&field.from_int(4) * &a.square()) + &field.one();
        let mut lower = Vec::new();
        let mut push_j = |c: &FieldElement| -> Result<()> {
            lower.extend(j_box(&delta, c)?.lower);
            Ok(())
        };
        match variant {
            TVariant::Full => {
                push_j(&d)?;
                push_j(b)?;
                push_j(&pack.c)?;
            }
            TVariant::Char2 => push_j(b)?,
            TVariant::OddChar => {
                push_j(&d)?;
                push_j(b)?;
            }
        }
        if variant != TVariant::OddChar {
            lower.extend(h_box(&delta, a)?.lower);
        }
        Ok(TSet {
            quaternion: q,
            delta,
            conditions: ValuationBox { lower },
        })
    }

    pub fn contains(&self, x: &FieldElement) -> bool {
        self.conditions.contains(x)
    }
}

pub fn in_t(pack: &SynthesisPack, a: &FieldElement, b: &FieldElement, x: &FieldElement) -> Result<bool> {
    Ok(TSet::new(pack, a, b, TVariant::Full)?.contains(x))
}

/// `x ∈ O_S`: `v(x) >= 0` for every `v ∉ S`.
pub fn in_o_s(x: &FieldElement, s: &PlaceSet) -> bool {
    if x.is_zero() {
        return true;
    }
    poles(x).iter().all(|v| s.contains(v))
}

/// `x ∈ ⋃_{v ∉ S} m_v`: some `v ∉ S` has `v(x) > 0`.
pub fn in_complement_union(x: &FieldElement, s: &PlaceSet) -> bool {
    if x.is_zero() {
        return true;
    }
    zeros(x).iter().any(|v| !s.contains(v))
}

fn poles(x: &FieldElement) -> Vec<Place> {
    crate::place::support(x)
        .expect("nonzero")
        .into_iter()
        .filter(|v| valuation(x, v) < Valuation::Finite(0))
        .collect()
}

/// Places where `x` has positive valuation.
pub fn zeros(x: &FieldElement) -> Vec<Place> {
    crate::place::support(x)
        .expect("nonzero")
        .into_iter()
        .filter(|v| valuation(x, v) > Valuation::Finite(0))
        .collect()
}

/// A set given by one of the constructions above, with a textual form.
#[derive(Clone, Debug)]
pub enum SetExpr {
    SofQ(QuaternionDesc),
    Sigma(QuaternionDesc, QuaternionDesc),
    SigmaInv(QuaternionDesc, QuaternionDesc),
    SigmaUnits(QuaternionDesc, QuaternionDesc),
    J(FieldElement, QuaternionDesc),
    H(FieldElement, QuaternionDesc),
    Phi(PlaceSet, FieldElement),
    T(SynthesisPack, FieldElement, FieldElement),
    OS(PlaceSet),
    UnionComplement(PlaceSet),
}

/// Outcome of a membership query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    In,
    Out,
    /// Only produced for `S(Q)`, whose membership is searched for.
    Unknown,
}

impl SetExpr {
    /// Arity of the members: `2` for `Φ`, else `1`.
    pub fn arity(&self) -> usize {
        match self {
            SetExpr::Phi(..) => 2,
            _ => 1,
        }
    }

    pub fn contains(&self, xs: &[FieldElement]) -> Result<Membership> {
        if xs.len() != self.arity() {
            return Err(Error::pre(format!("expected {} element(s)", self.arity())));
        }
        let x = &xs[0];
        let yes = |b: bool| if b { Membership::In } else { Membership::Out };
        Ok(match self {
            SetExpr::SofQ(q) => match in_s_of_q(q, x, 1_000_000) {
                SofQVerdict::Member { .. } => Membership::In,
                SofQVerdict::NoWitnessFound => Membership::Unknown,
            },
            SetExpr::Sigma(q, q2) => yes(in_sigma(q, q2, x, SigmaMode::Plain)?),
            SetExpr::SigmaInv(q, q2) => yes(in_sigma(q, q2, x, SigmaMode::Inverse)?),
            SetExpr::SigmaUnits(q, q2) => yes(in_sigma(q, q2, x, SigmaMode::Units)?),
            SetExpr::J(c, q) => yes(in_j(q, c, x)?),
            SetExpr::H(c, q) => yes(in_h(q, c, x)?),
            SetExpr::Phi(s, u) => yes(in_phi(s, u, x, &xs[1])?),
            SetExpr::T(pack, a, b) => yes(in_t(pack, a, b, x)?),
            SetExpr::OS(s) => yes(in_o_s(x, s)),
            SetExpr::UnionComplement(s) => yes(in_complement_union(x, s)),
        })
    }

    pub fn parse(field: FieldDesc, s: &str) -> Result<SetExpr> {
        let s = s.trim();
        let (head, rest) = s
            .find(['(', '['])
            .map(|i| s.split_at(i))
            .ok_or_else(|| Error::parse(0, format!("unknown set expression '{s}'")))?;
        let quat = |t: &str| QuaternionDesc::parse(field, t);
        let pair = |t: &str| -> Result<(QuaternionDesc, QuaternionDesc)> {
            let parts = split_top(strip_group(t, '(', ')')?, ';');
            match parts.as_slice() {
                [q1, q2] => Ok((quat(q1)?, quat(q2)?)),
                [q1] => Ok((quat(q1)?, quat(q1)?)),
                _ => Err(Error::parse(0, "expected (Q;Q')")),
            }
        };
        // J[c](Q) and H[c](Q)
        let bracket_then_paren = |t: &str| -> Result<(FieldElement, QuaternionDesc)> {
            let close = matching(t, 0).ok_or_else(|| Error::parse(0, "unbalanced brackets"))?;
            let c = field.parse_element(&t[1..close])?;
            let q = quat(strip_group(&t[close + 1..], '(', ')')?)?;
            Ok((c, q))
        };
        match head {
            "SQ" => Ok(SetExpr::SofQ(quat(strip_group(rest, '(', ')')?)?)),
            "Sigma" => pair(rest).map(|(a, b)| SetExpr::Sigma(a, b)),
            "SigmaInv" => pair(rest).map(|(a, b)| SetExpr::SigmaInv(a, b)),
            "SigmaUnits" => pair(rest).map(|(a, b)| SetExpr::SigmaUnits(a, b)),
            "J" => bracket_then_paren(rest).map(|(c, q)| SetExpr::J(c, q)),
            "H" => bracket_then_paren(rest).map(|(c, q)| SetExpr::H(c, q)),
            "Phi" => {
                let parts = split_top(strip_group(rest, '[', ']')?, ';');
                match parts.as_slice() {
                    [s, u] => Ok(SetExpr::Phi(parse_places(field, s)?, field.parse_element(u)?)),
                    _ => Err(Error::parse(0, "expected Phi[S;u]")),
                }
            }
            "T" => {
                let parts = split_top(strip_group(rest, '[', ']')?, ';');
                match parts.as_slice() {
                    [p, a, b] => Ok(SetExpr::T(
                        SynthesisPack::parse(field, p)?,
                        field.parse_element(a)?,
                        field.parse_element(b)?,
                    )),
                    _ => Err(Error::parse(0, "expected T[pack;a;b]")),
                }
            }
            "OS" => Ok(SetExpr::OS(parse_places(field, strip_group(rest, '[', ']')?)?)),
            "UC" => Ok(SetExpr::UnionComplement(parse_places(
                field,
                strip_group(rest, '[', ']')?,
            )?)),
            _ => Err(Error::parse(0, format!("unknown set '{head}'"))),
        }
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::SofQ(q) => write!(f, "SQ({q})"),
            SetExpr::Sigma(q, q2) => write!(f, "Sigma({q};{q2})"),
            SetExpr::SigmaInv(q, q2) => write!(f, "SigmaInv({q};{q2})"),
            SetExpr::SigmaUnits(q, q2) => write!(f, "SigmaUnits({q};{q2})"),
            SetExpr::J(c, q) => write!(f, "J[{c}]({q})"),
            SetExpr::H(c, q) => write!(f, "H[{c}]({q})"),
            SetExpr::Phi(s, u) => write!(f, "Phi[{};{u}]", format_places(s)),
            SetExpr::T(p, a, b) => write!(f, "T[{p};{a};{b}]"),
            SetExpr::OS(s) => write!(f, "OS[{}]", format_places(s)),
            SetExpr::UnionComplement(s) => write!(f, "UC[{}]", format_places(s)),
        }
    }
}

/// Index of the bracket closing the one opening at `start`.
fn matching(s: &str, start: usize) -> Option<usize> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices().skip(start) {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn strip_group(s: &str, open: char, close: char) -> Result<&str> {
    let s = s.trim();
    if s.starts_with(open) && matching(s, 0) == Some(s.len() - close.len_utf8()) {
        Ok(&s[1..s.len() - 1])
    } else {
        Err(Error::parse(0, format!("expected {open}...{close} around '{s}'")))
    }
}

/// Splits on `sep` at bracket depth zero.
pub(crate) fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut last = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(s[last..i].trim());
                last = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[last..].trim());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldDesc {
        FieldDesc::Rationals
    }

    fn el(s: &str) -> FieldElement {
        q().parse_element(s).unwrap()
    }

    fn quat(s: &str) -> QuaternionDesc {
        QuaternionDesc::parse(q(), s).unwrap()
    }

    #[test]
    fn sigma_examples() {
        let qq = quat("AS[1/4;5]");
        assert!(in_sigma(&qq, &qq, &el("1/3"), SigmaMode::Plain).unwrap());
        assert!(!in_sigma(&qq, &qq, &el("1/2"), SigmaMode::Plain).unwrap());
        assert!(!in_sigma(&qq, &qq, &el("2/3"), SigmaMode::Units).unwrap());
        assert!(in_sigma(&qq, &qq, &el("3/7"), SigmaMode::Units).unwrap());
        let other = quat("AS[0;7]");
        assert!(in_sigma(&qq, &other, &el("1/10"), SigmaMode::Plain).unwrap());
        let hamilton = quat("CL(-1;-1)");
        assert_eq!(
            in_sigma(&hamilton, &qq, &el("1"), SigmaMode::Plain),
            Err(Error::RequiresNonreal)
        );
    }

    #[test]
    fn j_and_h_examples() {
        let qq = quat("AS[1/4;5]");
        assert!(in_j(&qq, &el("5"), &el("5")).unwrap());
        assert!(!in_j(&qq, &el("5"), &el("3")).unwrap());
        assert!(in_j(&qq, &el("3"), &el("1/10")).unwrap());
        assert!(in_h(&qq, &el("1/5"), &el("5")).unwrap());
        assert!(!in_h(&qq, &el("1/5"), &el("1")).unwrap());
    }

    #[test]
    fn phi_examples() {
        let s = parse_places(q(), "{q:5}").unwrap();
        assert!(in_phi(&s, &el("2"), &el("2"), &el("1")).unwrap());
        assert!(in_phi(&s, &el("2"), &el("7"), &el("1")).unwrap());
        assert!(!in_phi(&s, &el("2"), &el("1"), &el("5")).unwrap());
        assert!(in_phi(&s, &el("5"), &el("1"), &el("1")).is_err());
    }

    #[test]
    fn t_examples() {
        let pack = SynthesisPack::parse(q(), "{q:5}|5|2|1").unwrap();
        assert!(in_t(&pack, &el("2"), &el("1"), &el("17")).unwrap());
        assert!(!in_t(&pack, &el("2"), &el("1"), &el("5")).unwrap());
        assert!(!in_t(&pack, &el("2"), &el("1"), &el("1/17")).unwrap());
        assert!(in_t(&pack, &el("1"), &el("5"), &el("17")).is_err());
    }

    #[test]
    fn o_s_examples() {
        let empty = PlaceSet::new();
        let two = parse_places(q(), "{q:2}").unwrap();
        assert!(in_o_s(&el("7"), &empty));
        assert!(in_o_s(&el("1/2"), &two));
        assert!(!in_o_s(&el("1/2"), &empty));
        let five = parse_places(q(), "{q:5}").unwrap();
        assert!(in_complement_union(&el("3"), &five));
        assert!(!in_complement_union(&el("5/3"), &five));
    }

    #[test]
    fn s_of_q_search() {
        let split = quat("AS[0;1]");
        match in_s_of_q(&split, &el("2"), 10_000) {
            SofQVerdict::Member { x1, x3, x4 } => {
                let x2 = &el("2") - &(&el("2") * &x1);
                let n = split.reduced_norm(&[x1, x2, x3, x4]);
                assert!(n.is_one());
            }
            SofQVerdict::NoWitnessFound => panic!("no witness"),
        }
        let qq = quat("AS[1/4;5]");
        assert!(matches!(in_s_of_q(&qq, &el("3"), 100_000), SofQVerdict::Member { .. }));
        assert_eq!(in_s_of_q(&qq, &el("3"), 0), SofQVerdict::NoWitnessFound);
    }

    #[test]
    fn set_expr_round_trip() {
        for text in [
            "Sigma(AS[1/4;5];AS[0;7])",
            "J[5](AS[1/4;5])",
            "H[1/5](AS[1/4;5])",
            "Phi[{q:5};2]",
            "T[{q:5}|5|2|1;2;1]",
            "OS[{q:2, q:3}]",
            "UC[{}]",
        ] {
            let e = SetExpr::parse(q(), text).unwrap();
            assert_eq!(e.to_string(), text);
        }
        let j = SetExpr::parse(q(), "J[5](AS[1/4;5])").unwrap();
        assert_eq!(j.contains(&[el("10")]).unwrap(), Membership::In);
    }
}
