//! Builders for the explicit formulas. Parametric builders leave the
//! quaternion parameters free (`a`, `b`, and `a2`, `b2` for the second
//! algebra, `c` for the `J`/`H` slot); the pack-level builders substitute
//! concrete constants.

use std::collections::HashMap;

use super::transform::dualize;
use super::{Formula, Term};
use crate::approx::uniformizer_at;
use crate::definable::{in_complement_union, SigmaMode, TSet, TVariant};
use crate::error::{Error, Result};
use crate::field::{FieldDesc, FieldElement};
use crate::place::{format_places, odd_neg, places_outside, valuation, Place, PlaceSet, Valuation};
use crate::quaternion::{Form, QuaternionDesc};
use crate::synthesis::{find_quaternion_with_ramification, AbMemo, odd_superset, synthesize, synthesize_odd_pi, SynthesisPack};

/// Fresh bound-variable names `y1, y2, ...`.
#[derive(Debug, Default)]
pub struct Namer {
    next: usize,
}

impl Namer {
    pub fn fresh(&mut self) -> String {
        self.next += 1;
        format!("y{}", self.next)
    }
}

type QParams = (Term, Term);

fn v(name: &str) -> Term {
    Term::var(name)
}

fn int(n: i64) -> Term {
    Term::int(n)
}

/// `M/D ∈ S([A, B))` for `D ≠ 0`: the norm-one equation with the
/// coordinates scaled by `D`.
fn s_of_q(nm: &mut Namer, m: &Term, d: &Term, q: &QParams) -> Formula {
    let (x3, x4, x1) = (nm.fresh(), nm.fresh(), nm.fresh());
    let (qa, qb) = q;
    let x1v = v(&x1);
    let x2 = Term::sub(m.clone(), Term::mul(int(2), x1v.clone()));
    let pure = Term::sub(
        Term::add(v(&x3).square(), Term::mul(v(&x3), v(&x4))),
        Term::mul(qa.clone(), v(&x4).square()),
    );
    let lhs = Term::sub(
        Term::sub(
            Term::add(x1v.square(), Term::mul(x1v, x2.clone())),
            Term::mul(qa.clone(), x2.square()),
        ),
        Term::mul(qb.clone(), pure),
    );
    Formula::exists(&[x3, x4, x1], Formula::eq(lhs, d.square()))
}

/// `N/D ∈ Σ(Q1, Q2)` for `D ≠ 0`.
fn sigma(nm: &mut Namer, n: &Term, d: &Term, q1: &QParams, q2: &QParams) -> Formula {
    let y = nm.fresh();
    let yv = v(&y);
    let first = s_of_q(nm, &yv, d, q1);
    let second = s_of_q(nm, &Term::sub(n.clone(), yv), d, q2);
    Formula::Exists(y, Box::new(Formula::And(vec![first, second])))
}

fn sigma_mode(nm: &mut Namer, mode: SigmaMode, x: &Term, q1: &QParams, q2: &QParams) -> Formula {
    match mode {
        SigmaMode::Plain => sigma(nm, x, &int(1), q1, q2),
        SigmaMode::Inverse => Formula::And(vec![
            Formula::nonzero(x.clone()),
            sigma(nm, &int(1), x, q1, q2),
        ]),
        SigmaMode::Units => Formula::And(vec![
            Formula::nonzero(x.clone()),
            sigma(nm, &Term::add(x.square(), int(1)), x, q1, q2),
        ]),
    }
}

/// `t ∈ □K · Σ(Q)^×`, i.e. `∃q ≠ 0: tq^2 ∈ Σ(Q)^× ∪ {0}`.
fn square_class(nm: &mut Namer, t: &Term, q: &QParams) -> Formula {
    let y = nm.fresh();
    let z = Term::mul(t.clone(), v(&y).square());
    let units = sigma_mode(nm, SigmaMode::Units, &z, q, q);
    Formula::Exists(
        y.clone(),
        Box::new(Formula::And(vec![
            Formula::nonzero(v(&y)),
            Formula::Or(vec![Formula::is_zero(z), units]),
        ])),
    )
}

/// `x ∈ J^c(Q)`: `∃y ≠ 0` with `x/(cy^2) ∈ Σ(Q)` and
/// `1 - cy^2 ∈ □K · Σ(Q)^×`.
fn j_formula(nm: &mut Namer, x: &Term, q: &QParams, c: &Term) -> Formula {
    let y = nm.fresh();
    let cy2 = Term::mul(c.clone(), v(&y).square());
    let member = sigma(nm, x, &cy2, q, q);
    let sq = square_class(nm, &Term::sub(int(1), cy2), q);
    Formula::Exists(
        y.clone(),
        Box::new(Formula::And(vec![Formula::nonzero(v(&y)), member, sq])),
    )
}

/// `x ∈ H^c(Q)`: `x = 0`, or `∃y` with `cy ∈ Σ(Q)` and
/// `(1 - xy)/(cx) ∈ Σ(Q)^{-1}`.
fn h_formula(nm: &mut Namer, x: &Term, q: &QParams, c: &Term) -> Formula {
    let y = nm.fresh();
    let yv = v(&y);
    let first = sigma(nm, &Term::mul(c.clone(), yv.clone()), &int(1), q, q);
    let rest = Term::sub(int(1), Term::mul(x.clone(), yv));
    let second = sigma(nm, &Term::mul(c.clone(), x.clone()), &rest, q, q);
    Formula::Or(vec![
        Formula::is_zero(x.clone()),
        Formula::And(vec![
            Formula::nonzero(x.clone()),
            Formula::Exists(
                y,
                Box::new(Formula::And(vec![first, Formula::nonzero(rest), second])),
            ),
        ]),
    ])
}

fn params(a: &str, b: &str) -> QParams {
    (v(a), v(b))
}

/// `t ∈ S([a, b))` with free variables `t, a, b`.
pub fn build_s_of_q() -> Formula {
    s_of_q(&mut Namer::default(), &v("t"), &int(1), &params("a", "b"))
}

/// `Σ([a, b), [a2, b2))`, its inverse set or its units, in the free
/// variables `x, a, b, a2, b2`.
pub fn build_phi_sigma(mode: SigmaMode) -> Formula {
    sigma_mode(&mut Namer::default(), mode, &v("x"), &params("a", "b"), &params("a2", "b2"))
}

/// `x ∈ □K · Σ([a, b))^×` in the free variables `x, a, b`.
pub fn build_square_class() -> Formula {
    square_class(&mut Namer::default(), &v("x"), &params("a", "b"))
}

/// `J^c([a, b))` in the free variables `x, a, b, c`.
pub fn build_j() -> Formula {
    j_formula(&mut Namer::default(), &v("x"), &params("a", "b"), &v("c"))
}

/// `H^c([a, b))` in the free variables `x, a, b, c`.
pub fn build_h() -> Formula {
    h_formula(&mut Namer::default(), &v("x"), &params("a", "b"), &v("c"))
}

/// `[a, b)` parameters of an algebra, converting `(α, β)` to
/// `[(α - 1)/4, β)`.
pub fn artin_schreier_params(q: &QuaternionDesc) -> (FieldElement, FieldElement) {
    match q.form() {
        Form::ArtinSchreier => (q.a().clone(), q.b().clone()),
        Form::Classical => {
            let field = q.field();
            (&(q.a() - &field.one()) / &field.from_int(4), q.b().clone())
        }
    }
}

fn const_params(q: &QuaternionDesc) -> QParams {
    let (a, b) = artin_schreier_params(q);
    (Term::elem(&a), Term::elem(&b))
}

/// Two nonreal algebras with `Δ(Q1) ∩ Δ(Q2) = S`, so that
/// `Σ(Q1, Q2) = ⋂_{v ∈ S} O_v`.
pub fn semilocal_pair(field: FieldDesc, s: &PlaceSet) -> Result<(QuaternionDesc, QuaternionDesc)> {
    let extra = places_outside(field, s, 2);
    let (mut s1, mut s2) = (s.clone(), s.clone());
    if s.len() % 2 == 1 {
        s1.insert(extra[0].clone());
        s2.insert(extra[1].clone());
    } else {
        s2.insert(extra[0].clone());
        s2.insert(extra[1].clone());
    }
    Ok((
        find_quaternion_with_ramification(field, &s1)?,
        find_quaternion_with_ramification(field, &s2)?,
    ))
}

fn phi_formula(
    nm: &mut Namer,
    a: &Term,
    b: &Term,
    s: &PlaceSet,
    u: &FieldElement,
    pi: &FieldElement,
) -> Result<Formula> {
    if s.is_empty() {
        return Err(Error::pre("Phi needs a nonempty S"));
    }
    for w in s {
        if valuation(pi, w) != Valuation::Finite(1) {
            return Err(Error::pre(format!("pi = {pi} is not a uniformizer at {w}")));
        }
        if valuation(u, w) != Valuation::Finite(0) {
            return Err(Error::pre(format!("u = {u} is not a unit at {w}")));
        }
    }
    let (q1, q2) = semilocal_pair(pi.field(), s)?;
    let (p1, p2) = (const_params(&q1), const_params(&q2));
    let units = sigma_mode(nm, SigmaMode::Units, b, &p1, &p2);
    let congruence = sigma(nm, &Term::sub(a.clone(), Term::elem(u)), &Term::elem(pi), &p1, &p2);
    Ok(Formula::And(vec![units, congruence]))
}

/// `Φ^S_u` in the free variables `a, b`; `π` must be a uniformizer at
/// every place of `S`.
pub fn build_phi(s: &PlaceSet, u: &FieldElement, pi: &FieldElement) -> Result<Formula> {
    phi_formula(&mut Namer::default(), &v("a"), &v("b"), s, u, pi)
}

/// An element of valuation exactly one at every place of `S`.
pub fn s_uniformizer(field: FieldDesc, s: &PlaceSet) -> Result<FieldElement> {
    let places: Vec<Place> = s.iter().cloned().collect();
    uniformizer_at(field, &places, &[])
}

fn union_formula(nm: &mut Namer, pack: &SynthesisPack, variant: TVariant) -> Result<Formula> {
    pack.validate()?;
    let field = pack.field();
    let (a, b) = (nm.fresh(), nm.fresh());
    let (av, bv) = (v(&a), v(&b));
    let pi_s = s_uniformizer(field, &pack.s)?;
    let phi = phi_formula(nm, &av, &bv, &pack.s, &pack.u, &pi_s)?;
    let q = (av.square(), Term::mul(bv.clone(), Term::elem(&pack.pi)));
    let x = v("x");
    let d = Term::add(int(1), Term::mul(int(4), av.square()));
    let mut parts = vec![phi];
    match variant {
        TVariant::Full => {
            parts.push(j_formula(nm, &x, &q, &d));
            parts.push(j_formula(nm, &x, &q, &bv));
            parts.push(j_formula(nm, &x, &q, &Term::elem(&pack.c)));
            parts.push(h_formula(nm, &x, &q, &av));
        }
        TVariant::Char2 => {
            parts.push(j_formula(nm, &x, &q, &bv));
            parts.push(h_formula(nm, &x, &q, &av));
        }
        TVariant::OddChar => {
            parts.push(j_formula(nm, &x, &q, &d));
            parts.push(j_formula(nm, &x, &q, &bv));
        }
    }
    Ok(Formula::exists(&[a, b], Formula::And(parts)))
}

/// `⋃_{(a,b) ∈ Φ^S_u} T_{a,b}` in the free variable `x`.
pub fn build_union(pack: &SynthesisPack) -> Result<Formula> {
    union_formula(&mut Namer::default(), pack, TVariant::Full)
}

/// Which shorter variant applies to `pack`, or why none does.
pub fn optimized_variant(pack: &SynthesisPack) -> Result<TVariant> {
    let field = pack.field();
    let (odd, _) = odd_neg(&pack.pi)?;
    let mut failures = Vec::new();
    if odd != pack.s {
        failures.push(format!(
            "S = {} differs from Odd(pi) = {}",
            format_places(&pack.s),
            format_places(&odd)
        ));
    }
    if field.characteristic() == 0 && !pack.s.contains(&Place::Prime(2)) {
        failures.push("S does not contain the places of residue characteristic 2 (q:2)".to_string());
    }
    if !failures.is_empty() {
        return Err(Error::pre(failures.join("; ")));
    }
    Ok(if field.characteristic() == 2 {
        TVariant::Char2
    } else {
        TVariant::OddChar
    })
}

/// The two-set variant: `J^b ∩ H^a` in characteristic 2, otherwise
/// `J^{1+4a^2} ∩ J^b`.
pub fn build_union_optimized(pack: &SynthesisPack) -> Result<Formula> {
    let variant = optimized_variant(pack)?;
    union_formula(&mut Namer::default(), pack, variant)
}

fn m_v_formula(nm: &mut Namer, field: FieldDesc, w: &Place) -> Result<Formula> {
    let s = PlaceSet::from([w.clone()]);
    let (q1, q2) = semilocal_pair(field, &s)?;
    Ok(sigma(
        nm,
        &v("x"),
        &Term::elem(&w.uniformizer(field)),
        &const_params(&q1),
        &const_params(&q2),
    ))
}

/// `m_v` in the free variable `x`: `x/π_v ∈ O_v`.
pub fn build_m_v(field: FieldDesc, w: &Place) -> Result<Formula> {
    w.validate(field)?;
    m_v_formula(&mut Namer::default(), field, w)
}

/// An existential definition of `⋃_{v ∉ S} m_v` for an arbitrary finite
/// `S`, together with the pack it was built from.
#[derive(Clone, Debug)]
pub struct ComplementUnion {
    pub formula: Formula,
    pub pack: SynthesisPack,
    pub variant: TVariant,
}

/// Builds the union over a pack for a suitable superset `S' ⊇ S` and adds
/// `m_v` for each `v ∈ S' \ S`.
pub fn build_complement_union(field: FieldDesc, s: &PlaceSet, optimized: bool) -> Result<ComplementUnion> {
    for w in s {
        w.validate(field)?;
    }
    let pack = if optimized {
        synthesize_odd_pi(field, s)?
    } else {
        synthesize(field, &odd_superset(field, s))?
    };
    let variant = if optimized {
        optimized_variant(&pack)?
    } else {
        TVariant::Full
    };
    let mut nm = Namer::default();
    let mut parts = vec![union_formula(&mut nm, &pack, variant)?];
    for w in pack.s.difference(s) {
        parts.push(m_v_formula(&mut nm, field, w)?);
    }
    Ok(ComplementUnion {
        formula: Formula::or(parts),
        pack,
        variant,
    })
}

impl ComplementUnion {
    /// Membership following the shape of the formula: `z` lies in some
    /// `T_{a,b}` (with `(a, b)` from the witness map) or in `m_w` for an
    /// extra place `w` of the pack.
    pub fn contains(&self, memo: &AbMemo, s: &PlaceSet, z: &FieldElement) -> Result<bool> {
        if z.is_zero() {
            return Ok(true);
        }
        let extra = self
            .pack
            .s
            .difference(s)
            .any(|w| valuation(z, w).at_least(1));
        if extra {
            return Ok(true);
        }
        if !in_complement_union(z, &self.pack.s) {
            return Ok(false);
        }
        let w = crate::definable::zeros(z)
            .into_iter()
            .find(|w| !self.pack.s.contains(w))
            .expect("z lies in some m_w outside S");
        let (a, b) = memo.find_ab(&w)?;
        Ok(TSet::new(&self.pack, &a, &b, self.variant)?.contains(z))
    }
}

/// A universal definition of `O_S` in the free variable `x`.
pub fn build_o_s_universal(field: FieldDesc, s: &PlaceSet, optimized: bool) -> Result<Formula> {
    dualize(&build_complement_union(field, s, optimized)?.formula, "x")
}

/// Substitutes constants for free variables.
pub fn instantiate(phi: &Formula, values: &[(&str, &FieldElement)]) -> Formula {
    let map: HashMap<String, Term> = values
        .iter()
        .map(|(k, x)| (k.to_string(), Term::elem(x)))
        .collect();
    phi.subst(&map)
}

/// One line of the rank ledger.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct RankEntry {
    pub formula: String,
    pub expected: usize,
    pub actual: usize,
}

/// Ranks of the parametric builders and of the pack-level formulas over
/// `Q` with `S = {5}` and over `F_2(T)` with `S = {v_T}`.
pub fn rank_ledger() -> Result<Vec<RankEntry>> {
    let q = FieldDesc::Rationals;
    let f2 = FieldDesc::function_field(2)?;
    let s5 = PlaceSet::from([Place::Prime(5)]);
    let st = PlaceSet::from([Place::Poly(crate::poly::Poly::t(2))]);
    let pack5 = SynthesisPack::parse(q, "{q:5}|5|2|1")?;
    let union = build_union(&pack5)?;
    let opt_q = build_complement_union(q, &s5, true)?.formula;
    let opt_f2 = build_complement_union(f2, &st, true)?.formula;
    let m5 = build_m_v(q, &Place::Prime(5))?;
    let mut rows: Vec<(&str, usize, Formula)> = vec![
        ("S(Q)", 3, build_s_of_q()),
        ("Sigma", 7, build_phi_sigma(SigmaMode::Plain)),
        ("Sigma^-1", 7, build_phi_sigma(SigmaMode::Inverse)),
        ("Sigma^x", 7, build_phi_sigma(SigmaMode::Units)),
        ("square class", 8, build_square_class()),
        ("J^c", 16, build_j()),
        ("H^c", 15, build_h()),
        ("Phi^S_u", 14, build_phi(&s5, &q.from_int(2), &q.from_int(5))?),
        ("m_v", 7, m5.clone()),
        ("O_v (universal)", 8, dualize(&m5, "x")?),
        ("union, Q, S={q:5}", 79, union.clone()),
        ("O_S (universal), Q, S={q:5}", 80, dualize(&union, "x")?),
        ("union optimized, Q", 48, opt_q.clone()),
        ("O_S optimized (universal), Q", 49, dualize(&opt_q, "x")?),
        ("union optimized, F2(T)", 47, opt_f2.clone()),
        ("O_S optimized (universal), F2(T)", 48, dualize(&opt_f2, "x")?),
    ];
    let t_conj = {
        let mut nm = Namer::default();
        let q = (v("a"), v("b"));
        Formula::And(vec![
            j_formula(&mut nm, &v("x"), &q, &v("c1")),
            j_formula(&mut nm, &v("x"), &q, &v("c2")),
            j_formula(&mut nm, &v("x"), &q, &v("c3")),
            h_formula(&mut nm, &v("x"), &q, &v("c4")),
        ])
    };
    rows.insert(7, ("T_{a,b}", 63, t_conj));
    rows.into_iter()
        .map(|(name, expected, f)| {
            Ok(RankEntry {
                formula: name.to_string(),
                expected,
                actual: f.rank()?,
            })
        })
        .collect()
}
