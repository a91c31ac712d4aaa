//! Verification suites. Each suite samples deterministically from a seed
//! and returns a [`Report`] with one entry per check.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::Instant;

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::approx::{weak_approximate, Target};
use crate::definable::{in_complement_union, in_phi, in_s_of_q, in_semilocal, odd_neg, SigmaMode, SofQVerdict, TSet, TVariant};
use crate::error::{Error, Result};
use crate::ff::FqTable;
use crate::fgring::{build_ring_definition, FgRingDesc};
use crate::field::{FieldDesc, FieldElement};
use crate::formula::{
    artin_schreier_params, build_phi_sigma, combine, dualize, eval_global, fq_defined_set, rank_ledger,
    semilocal_pair, to_diophantine, Ambient, Connective, Formula, GlobalEval, Truth,
};
use crate::place::{format_places, parse_places, places, places_outside, valuation, Place, PlaceSet, Valuation};
use crate::quaternion::{
    candidate_places, is_nonreal, local_split_oracle, local_splits, ramification_set, OracleVerdict, QuaternionDesc,
};
use crate::synthesis::{find_ab, synthesize, witness_for, AbMemo, SynthesisPack};

pub const SUITES: &[&str] = &[
    "rank-ledger",
    "reciprocity-parity",
    "local-cross-validation",
    "jh-identities",
    "main-theorem",
    "synthesis",
    "transformations",
    "fgring",
    "spot-checks",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

/// One check. `input` reproduces it.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    pub input: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub field: String,
    pub params: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub elapsed_ms: u64,
}

impl Report {
    fn new(suite: &str, field: &str) -> Self {
        Report {
            suite: suite.to_string(),
            field: field.to_string(),
            params: BTreeMap::new(),
            checks: Vec::new(),
            elapsed_ms: 0,
        }
    }

    fn param(&mut self, k: &str, v: impl fmt::Display) {
        self.params.insert(k.to_string(), v.to_string());
    }

    fn push(&mut self, name: impl Into<String>, ok: bool, input: impl Into<String>, detail: impl Into<String>) {
        self.push_outcome(name, if ok { Outcome::Pass } else { Outcome::Fail }, input, detail);
    }

    fn push_outcome(&mut self, name: impl Into<String>, outcome: Outcome, input: impl Into<String>, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            outcome,
            input: input.into(),
            detail: detail.into(),
        });
    }

    pub fn count(&self, o: Outcome) -> usize {
        self.checks.iter().filter(|c| c.outcome == o).count()
    }

    /// No check failed.
    pub fn ok(&self) -> bool {
        self.count(Outcome::Fail) == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.outcome == Outcome::Fail)
    }

    /// `0` all pass, `1` any failure, `3` only inconclusive checks besides
    /// passes.
    pub fn exit_code(&self) -> i32 {
        if !self.ok() {
            1
        } else if self.count(Outcome::Inconclusive) > 0 {
            3
        } else {
            0
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "{} [{}]: {} pass, {} fail, {} inconclusive ({} ms)",
            self.suite,
            self.field,
            self.count(Outcome::Pass),
            self.count(Outcome::Fail),
            self.count(Outcome::Inconclusive),
            self.elapsed_ms
        )
    }
}

/// Counts successes of many similar checks and keeps the first failure.
struct Tally {
    name: String,
    passed: usize,
    inconclusive: usize,
    failure: Option<(String, String)>,
}

impl Tally {
    fn new(name: impl Into<String>) -> Self {
        Tally {
            name: name.into(),
            passed: 0,
            inconclusive: 0,
            failure: None,
        }
    }

    fn record(&mut self, ok: bool, input: impl fmt::Display, detail: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else if self.failure.is_none() {
            self.failure = Some((input.to_string(), detail()));
        }
    }

    fn finish(self, report: &mut Report, min: usize) {
        match self.failure {
            Some((input, detail)) => report.push(self.name, false, input, detail),
            None => {
                let mut detail = format!("{} cases", self.passed);
                if self.inconclusive > 0 {
                    detail.push_str(&format!(", {} inconclusive", self.inconclusive));
                }
                let enough = self.passed >= min;
                if !enough {
                    detail.push_str(&format!(", fewer than {min}"));
                }
                report.push(self.name, enough, "", detail);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    /// Restricts suites that cover several fields to one.
    pub field: Option<FieldDesc>,
    /// Overrides the sample height (degree bound over `F_p(T)`).
    pub height: Option<u64>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            field: None,
            height: None,
            seed: 1,
        }
    }
}

impl SuiteConfig {
    fn fields(&self, default: &[FieldDesc]) -> Vec<FieldDesc> {
        match self.field {
            Some(f) => vec![f],
            None => default.to_vec(),
        }
    }

    fn height_or(&self, h: u64) -> u64 {
        self.height.unwrap_or(h)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
    }
}

fn q() -> FieldDesc {
    FieldDesc::Rationals
}

fn fp(p: u64) -> FieldDesc {
    FieldDesc::RationalFunctions { p }
}

fn nonzero_pool(field: FieldDesc, h: u64) -> Vec<FieldElement> {
    field.enumerate_by_height(h).into_iter().filter(|x| !x.is_zero()).collect()
}

fn field_label(fields: &[FieldDesc]) -> String {
    fields.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<Report> {
    let start = Instant::now();
    let mut report = match name {
        "rank-ledger" => rank_ledger_suite()?,
        "reciprocity-parity" => reciprocity_parity(cfg)?,
        "local-cross-validation" => local_cross_validation(cfg)?,
        "jh-identities" => jh_identities(cfg)?,
        "main-theorem" => main_theorem(cfg)?,
        "synthesis" => synthesis_suite(cfg)?,
        "transformations" => transformations()?,
        "fgring" => fgring_suite(cfg)?,
        "spot-checks" => spot_checks()?,
        _ => {
            return Err(Error::pre(format!(
                "unknown suite '{name}'; expected one of {}",
                SUITES.join(", ")
            )))
        }
    };
    report.param("seed", cfg.seed);
    if let Some(h) = cfg.height {
        report.param("height", h);
    }
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn rank_ledger_suite() -> Result<Report> {
    let mut r = Report::new("rank-ledger", "Q, F2(T)");
    for row in rank_ledger()? {
        r.push(
            row.formula.clone(),
            row.actual == row.expected,
            row.formula,
            format!("expected {}, got {}", row.expected, row.actual),
        );
    }
    Ok(r)
}

/// A random nonreal algebra: `(α, β)` outside characteristic 2, `[a, b)`
/// in characteristic 2.
fn random_nonreal(field: FieldDesc, pool: &[FieldElement], rng: &mut ChaCha8Rng) -> QuaternionDesc {
    loop {
        let a = pool.choose(rng).unwrap().clone();
        let b = pool.choose(rng).unwrap().clone();
        let q = if field.characteristic() == 2 {
            QuaternionDesc::artin_schreier(a, b)
        } else {
            QuaternionDesc::classical(a, b)
        };
        if let Ok(q) = q {
            if is_nonreal(&q) {
                return q;
            }
        }
    }
}

fn default_height(field: FieldDesc, rationals: u64, char2: u64, other: u64) -> u64 {
    match field {
        FieldDesc::Rationals => rationals,
        FieldDesc::RationalFunctions { p: 2 } => char2,
        _ => other,
    }
}

fn reciprocity_parity(cfg: &SuiteConfig) -> Result<Report> {
    let fields = cfg.fields(&[q(), fp(2), fp(3)]);
    let mut r = Report::new("reciprocity-parity", &field_label(&fields));
    for (i, &field) in fields.iter().enumerate() {
        let h = cfg.height_or(default_height(field, 40, 5, 3));
        let pool = nonzero_pool(field, h);
        let mut rng = cfg.rng(100 + i as u64);
        let mut t = Tally::new(format!("|Delta| even over {field}"));
        for _ in 0..200 {
            let qd = random_nonreal(field, &pool, &mut rng);
            let delta = ramification_set(&qd)?;
            t.record(delta.len() % 2 == 0, &qd, || format!("Delta = {}", format_places(&delta)));
        }
        t.finish(&mut r, 200);
    }
    Ok(r)
}

fn local_cross_validation(cfg: &SuiteConfig) -> Result<Report> {
    let fields = cfg.fields(&[q(), fp(2), fp(3)]);
    let mut r = Report::new("local-cross-validation", &field_label(&fields));
    for (i, &field) in fields.iter().enumerate() {
        let h = cfg.height_or(default_height(field, 12, 3, 2));
        let precision = match field {
            FieldDesc::Rationals => 10,
            FieldDesc::RationalFunctions { p: 2 } => 12,
            _ => 8,
        };
        let pool = nonzero_pool(field, h);
        let mut rng = cfg.rng(200 + i as u64);
        let fixed: Vec<Place> = places(field).take(4).collect();
        let mut t = Tally::new(format!("local_splits = oracle over {field}"));
        let mut instances = 0;
        while t.passed < 500 && instances < 5000 {
            let a = pool.choose(&mut rng).unwrap().clone();
            let b = pool.choose(&mut rng).unwrap().clone();
            let Ok(qd) = QuaternionDesc::artin_schreier(a, b) else {
                continue;
            };
            let mut test_places: PlaceSet = fixed.iter().cloned().collect();
            test_places.extend(candidate_places(&qd)?);
            for v in &test_places {
                instances += 1;
                match local_split_oracle(&qd, v, precision) {
                    OracleVerdict::Inconclusive => t.inconclusive += 1,
                    verdict => {
                        let fast = local_splits(&qd, v);
                        t.record(fast == (verdict == OracleVerdict::Split), format!("{qd} at {v}"), || {
                            format!("local_splits = {fast}, oracle = {verdict}")
                        });
                    }
                }
            }
        }
        t.finish(&mut r, 500);
    }
    Ok(r)
}

/// `z` with `v(z) = e_v` for the given places.
fn with_valuations(field: FieldDesc, targets: &[(Place, i64)]) -> Result<FieldElement> {
    if targets.is_empty() {
        return Ok(field.one());
    }
    let ts: Vec<Target> = targets
        .iter()
        .map(|(v, e)| Target::new(v.clone(), v.uniformizer(field).pow(*e), *e))
        .collect();
    weak_approximate(&ts)
}

fn vf(x: &FieldElement, v: &Place) -> i64 {
    valuation(x, v).finite().expect("nonzero")
}

/// `y ∈ □K · R^×` certified by an explicit `q` with `yq^2 ∈ R^×`.
fn square_times_unit(y: &FieldElement, s: &PlaceSet) -> Result<Option<FieldElement>> {
    if y.is_zero() {
        return Ok(None);
    }
    let mut targets = Vec::new();
    for v in s {
        let k = vf(y, v);
        if k % 2 != 0 {
            return Ok(None);
        }
        targets.push((v.clone(), -k / 2));
    }
    let qv = with_valuations(y.field(), &targets)?;
    let unit = y * &qv.square();
    Ok(in_semilocal(s, &unit, SigmaMode::Units).then_some(qv))
}

fn jh_identities(cfg: &SuiteConfig) -> Result<Report> {
    let field = q();
    let s = parse_places(field, "{q:2, q:5}")?;
    let mut r = Report::new("jh-identities", "Q");
    r.param("S", format_places(&s));
    let h = cfg.height_or(50);
    let xs = field.enumerate_by_height(h);
    let r_sample: Vec<FieldElement> = field
        .enumerate_by_height(8)
        .into_iter()
        .filter(|t| in_semilocal(&s, t, SigmaMode::Plain))
        .collect();
    let y_sample = nonzero_pool(field, 5);
    let cs = ["3", "10", "1/5", "50", "2/25", "7/4", "1/10"];
    for c_str in cs {
        let c = field.parse_element(c_str)?;
        let (odd, neg) = odd_neg(&c)?;
        let j_places: Vec<Place> = s.intersection(&odd).cloned().collect();
        let h_places: Vec<(Place, i64)> = s.intersection(&neg).map(|v| (v.clone(), -vf(&c, v))).collect();
        let in_j_box = |x: &FieldElement| j_places.iter().all(|v| valuation(x, v).at_least(1));
        let in_h_box = |x: &FieldElement| h_places.iter().all(|(v, k)| valuation(x, v).at_least(*k));

        let mut jf = Tally::new(format!("J forward, c = {c}"));
        let mut jr = Tally::new(format!("J reverse, c = {c}"));
        let mut hf = Tally::new(format!("H forward, c = {c}"));
        let mut hr = Tally::new(format!("H reverse, c = {c}"));
        // elements cy^2 with 1 - cy^2 ∈ □K·R^×
        let mut gs = Vec::new();
        for y in &y_sample {
            let g = &c * &y.square();
            if square_times_unit(&(&field.one() - &g), &s)?.is_some() {
                gs.push(g);
            }
        }
        for x in &xs {
            if in_j_box(x) {
                let ok = j_forward(&c, x, &s, &odd)?;
                jf.record(ok.is_ok(), x, || ok.unwrap_err());
            } else {
                let hit = gs.iter().find(|g| in_semilocal(&s, &(x / *g), SigmaMode::Plain));
                jr.record(hit.is_none(), x, || format!("x = ({}) * (x / that)", hit.unwrap()));
            }
            if x.is_zero() {
                continue;
            }
            if in_h_box(x) {
                let ok = h_forward(&c, x, &s)?;
                hf.record(ok.is_ok(), x, || ok.unwrap_err());
            } else {
                let cx = &c / x;
                let c2 = c.square();
                let hit = r_sample
                    .iter()
                    .filter(|t| !t.is_zero())
                    .find(|t| in_semilocal(&s, &(&cx - &(&c2 / *t)), SigmaMode::Plain));
                hr.record(hit.is_none(), x, || format!("t = {} represents x", hit.unwrap()));
            }
        }
        // the constructions, sampled, land in the valuation sets
        for g in &gs {
            for t in r_sample.iter().take(60) {
                let x = g * t;
                jr.record(in_j_box(&x), &x, || format!("cy^2 = {g}, t = {t}"));
            }
        }
        for t in r_sample.iter().filter(|t| !t.is_zero()).take(40) {
            for tp in r_sample.iter().take(40) {
                let inv = &(tp / &c) + &(&c / t);
                if let Ok(x) = inv.inv() {
                    hr.record(in_h_box(&x), &x, || format!("t = {t}, t' = {tp}"));
                }
            }
        }
        for t in [jf, jr, hf, hr] {
            t.finish(&mut r, 1);
        }
    }
    r.param("c", cs.join(", "));
    Ok(r)
}

/// The witness `cz^2` of the lemma: `v(cz^2) = 1` on `S ∩ Odd(c)` and
/// `v(cz^2) < min(0, v(x))` on the rest of `S`.
fn j_forward(c: &FieldElement, x: &FieldElement, s: &PlaceSet, odd: &PlaceSet) -> Result<std::result::Result<(), String>> {
    let field = c.field();
    let mut targets = Vec::new();
    for v in s {
        let vc = vf(c, v);
        let e = if odd.contains(v) {
            (1 - vc) / 2
        } else {
            let m = valuation(x, v).finite().map_or(0, |k| k.min(0));
            (m - 1 - vc).div_euclid(2)
        };
        targets.push((v.clone(), e));
    }
    let z = with_valuations(field, &targets)?;
    let g = c * &z.square();
    let quotient = x / &g;
    if !in_semilocal(s, &quotient, SigmaMode::Plain) {
        return Ok(Err(format!("x/(cz^2) = {quotient} not in R for z = {z}")));
    }
    match square_times_unit(&(&field.one() - &g), s)? {
        Some(_) => Ok(Ok(())),
        None => Ok(Err(format!("1 - cz^2 not in square class of units, z = {z}"))),
    }
}

/// Local choices `t_v`, glued by weak approximation, then
/// `t' = c/x - c^2/t`.
fn h_forward(c: &FieldElement, x: &FieldElement, s: &PlaceSet) -> Result<std::result::Result<(), String>> {
    let field = c.field();
    let mut targets = Vec::new();
    for v in s {
        let t_v = if vf(x, v) >= -vf(c, v) { x * c } else { field.one() };
        let k = vf(&t_v, v);
        let gamma = k.max(2 * k - 2 * vf(c, v));
        targets.push(Target::new(v.clone(), t_v, gamma));
    }
    let t = weak_approximate(&targets)?;
    if t.is_zero() || !in_semilocal(s, &t, SigmaMode::Plain) {
        return Ok(Err(format!("t = {t} not a nonzero element of R")));
    }
    let tp = &(c / x) - &(&c.square() / &t);
    if !in_semilocal(s, &tp, SigmaMode::Plain) {
        return Ok(Err(format!("t' = {tp} not in R (t = {t})")));
    }
    let back = (&(&tp / c) + &(c / &t)).inv()?;
    if &back != x {
        return Ok(Err(format!("reconstruction gave {back}")));
    }
    Ok(Ok(()))
}

/// Random `(a, b) ∈ Φ^S_u`.
fn random_phi(pack: &SynthesisPack, pool: &[FieldElement], rng: &mut ChaCha8Rng) -> Result<(FieldElement, FieldElement)> {
    let field = pack.field();
    let pi_s = crate::formula::s_uniformizer(field, &pack.s)?;
    loop {
        let k = pool.choose(rng).unwrap();
        let a = &pack.u + &(&pi_s * k);
        let b = pool.choose(rng).unwrap().clone();
        if in_phi(&pack.s, &pack.u, &a, &b)? {
            let qd = QuaternionDesc::artin_schreier(a.square(), &b * &pack.pi)?;
            if is_nonreal(&qd) {
                return Ok((a, b));
            }
        }
    }
}

fn main_theorem_pack(r: &mut Report, label: &str, pack: &SynthesisPack, h: u64, cfg: &SuiteConfig, salt: u64) -> Result<()> {
    let field = pack.field();
    let memo = AbMemo::new(pack.clone());
    let xs = field.enumerate_by_height(h);
    let mut fwd = Tally::new(format!("{label}: union of m_v (v not in S) = union of T_ab"));
    let mut pairs: Vec<(FieldElement, FieldElement)> = Vec::new();
    for x in &xs {
        let oracle = in_complement_union(x, &pack.s);
        let via = match witness_for(x, &memo)? {
            Some(w) => {
                let hit = TSet::new(pack, &w.a, &w.b, TVariant::Full)?.contains(x);
                if !pairs.contains(&(w.a.clone(), w.b.clone())) {
                    pairs.push((w.a, w.b));
                }
                hit
            }
            None => false,
        };
        fwd.record(oracle == via, x, || format!("oracle {oracle}, witness map {via}"));
    }
    fwd.finish(r, 1);
    let pool = nonzero_pool(field, if field == q() { 12 } else { 3 });
    let mut rng = cfg.rng(salt);
    for _ in 0..50 {
        pairs.push(random_phi(pack, &pool, &mut rng)?);
    }
    let mut back = Tally::new(format!("{label}: T_ab inside the union for sampled (a, b) in Phi"));
    let outside: Vec<&FieldElement> = xs.iter().filter(|x| !in_complement_union(x, &pack.s)).collect();
    let sample_h = if field == q() { 20 } else { 3 };
    let extra = field.enumerate_by_height(sample_h);
    for (a, b) in &pairs {
        let t = TSet::new(pack, a, b, TVariant::Full)?;
        for x in outside.iter().copied().chain(extra.iter()) {
            if t.contains(x) {
                let ok = in_complement_union(x, &pack.s);
                back.record(ok, format!("a = {a}, b = {b}, x = {x}"), || "x in T_ab but not in the union".to_string());
            }
        }
    }
    back.finish(r, 50);
    Ok(())
}

fn main_theorem(cfg: &SuiteConfig) -> Result<Report> {
    let fields = cfg.fields(&[q(), fp(2)]);
    let mut r = Report::new("main-theorem", &field_label(&fields));
    for &field in &fields {
        match field {
            FieldDesc::Rationals => {
                let pack = SynthesisPack::parse(field, "{q:5}|5|2|1")?;
                pack.validate()?;
                r.param("pack Q", &pack);
                main_theorem_pack(&mut r, "Q", &pack, cfg.height_or(30), cfg, 300)?;
            }
            FieldDesc::RationalFunctions { p } => {
                let s = PlaceSet::from([Place::Poly(crate::poly::Poly::t(p))]);
                if p == 2 {
                    literal_f2_pack(&mut r, cfg)?;
                }
                let pack = synthesize(field, &s)?;
                r.param(&format!("pack {field}"), &pack);
                main_theorem_pack(&mut r, &field.to_string(), &pack, cfg.height_or(4), cfg, 301)?;
            }
        }
    }
    Ok(r)
}

/// The record `{f:T}|T|1|1` over `F_2(T)`: checks the hypotheses and looks
/// for `(a, b) ∈ Φ` whose `T_{a,b}` meets the complement of the union.
fn literal_f2_pack(r: &mut Report, cfg: &SuiteConfig) -> Result<()> {
    let field = fp(2);
    let pack = SynthesisPack::parse(field, "{f:T}|T|1|1")?;
    let why = match pack.validate() {
        Ok(()) => "hypotheses hold".to_string(),
        Err(e) => e.to_string(),
    };
    let pool = nonzero_pool(field, 3);
    let mut rng = cfg.rng(302);
    let x = field.t().unwrap();
    let mut found = None;
    for _ in 0..200 {
        let (a, b) = random_phi(&pack, &pool, &mut rng)?;
        if TSet::new(&pack, &a, &b, TVariant::Full)?.contains(&x) {
            found = Some((a, b));
            break;
        }
    }
    let detail = match &found {
        Some((a, b)) => format!("{why}; x = T lies in T_ab for a = {a}, b = {b} but in no m_v with v outside S"),
        None => format!("{why}; no counterexample among 200 sampled pairs"),
    };
    r.push("F2(T) literal pack {f:T}|T|1|1", pack.validate().is_ok() && found.is_none(), pack.to_string(), detail);
    Ok(())
}

fn synthesis_suite(cfg: &SuiteConfig) -> Result<Report> {
    let fields = cfg.fields(&[q(), fp(2), fp(3)]);
    let mut r = Report::new("synthesis", &field_label(&fields));
    for &field in &fields {
        let pack = match field {
            FieldDesc::Rationals => SynthesisPack::parse(field, "{q:5}|5|2|1")?,
            FieldDesc::RationalFunctions { p } => {
                synthesize(field, &PlaceSet::from([Place::Poly(crate::poly::Poly::t(p))]))?
            }
        };
        r.param(&format!("pack {field}"), &pack);
        let mut t = Tally::new(format!("find_ab over {field}"));
        for w in places_outside(field, &pack.s, 10) {
            let (a, b) = find_ab(&pack, &w)?;
            let verdict = certify_ab(&pack, &w, &a, &b)?;
            t.record(verdict.is_ok(), format!("w = {w}"), || verdict.unwrap_err());
        }
        t.finish(&mut r, 10);
        if field == q() {
            let (a, b) = find_ab(&pack, &Place::Prime(17))?;
            r.push(
                "worked instance w = q:17",
                (a.clone(), b.clone()) == (field.from_int(7), field.from_int(17)),
                "{q:5}|5|2|1, w = q:17",
                format!("(a, b) = ({a}, {b})"),
            );
            let cl = QuaternionDesc::classical(field.from_int(197), field.from_int(85))?;
            let delta = ramification_set(&cl)?;
            r.push(
                "Delta((197, 85))",
                format_places(&delta) == "{q:5, q:17}",
                "(197, 85)",
                format_places(&delta),
            );
        }
    }
    Ok(r)
}

/// Independent re-check of a pair: `Φ` membership, then the brute-force
/// oracle at the places of `S ∪ {w}` (nonsplit) and at the other bad
/// places and a few small ones (split).
fn certify_ab(pack: &SynthesisPack, w: &Place, a: &FieldElement, b: &FieldElement) -> Result<std::result::Result<(), String>> {
    if !in_phi(&pack.s, &pack.u, a, b)? {
        return Ok(Err(format!("({a}, {b}) not in Phi")));
    }
    let field = pack.field();
    let qd = QuaternionDesc::artin_schreier(a.square(), b * &pack.pi)?;
    let mut target = pack.s.clone();
    target.insert(w.clone());
    let mut probe = candidate_places(&qd)?;
    probe.extend(places(field).take(4));
    probe.extend(target.iter().cloned());
    let precision = if field == q() { 12 } else { 10 };
    let mut inconclusive = Vec::new();
    for v in &probe {
        let want_split = !target.contains(v);
        match local_split_oracle(&qd, v, precision) {
            OracleVerdict::Inconclusive => inconclusive.push(v.clone()),
            verdict => {
                if (verdict == OracleVerdict::Split) != want_split {
                    return Ok(Err(format!("oracle says {verdict} at {v} for {qd}")));
                }
            }
        }
    }
    for v in &inconclusive {
        if local_splits(&qd, v) == target.contains(v) {
            return Ok(Err(format!("splitting at {v} contradicts Delta = {}", format_places(&target))));
        }
    }
    Ok(Ok(()))
}

/// The golden corpus of existential formulas in the free variable `x`.
pub fn golden_corpus() -> Result<Vec<Formula>> {
    include_str!("../data/corpus.txt")
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(Formula::parse)
        .collect()
}

fn strip_exists(f: &Formula) -> &Formula {
    match f {
        Formula::Exists(_, body) => strip_exists(body),
        _ => f,
    }
}

fn transformations() -> Result<Report> {
    let formulas = golden_corpus()?;
    let mut r = Report::new("transformations", "F3, F5, F9");
    r.param("corpus", formulas.len());
    let none = HashMap::new();
    for qsize in [3u64, 5, 9] {
        let t = FqTable::new(qsize as usize)?;
        let set = |f: &Formula| -> Result<Vec<u16>> { fq_defined_set(f, &t, "x", &none) };
        let sets: Vec<Vec<u16>> = formulas.iter().map(set).collect::<Result<_>>()?;
        let mut dio = Tally::new(format!("to_diophantine over F_{qsize}"));
        let mut dual = Tally::new(format!("dualize over F_{qsize}"));
        let mut comb = Tally::new(format!("combine over F_{qsize}"));
        for (f, s) in formulas.iter().zip(&sets) {
            let d = to_diophantine(f, Ambient::Finite(qsize))?;
            let single = matches!(strip_exists(&d), Formula::Eq(..));
            let ok = single && d.rank()? <= f.rank()? + 1 && &set(&d)? == s;
            dio.record(ok, f, || format!("got {d}"));
            let g = dualize(f, "x")?;
            let expected: Vec<u16> = t
                .elements()
                .filter(|&x| x == 0 || !s.contains(&t.inv(x).unwrap()))
                .collect();
            let ok = g.rank()? == f.rank()? + 1 && set(&g)? == expected;
            dual.record(ok, f, || format!("got {g}"));
        }
        for i in 0..formulas.len() {
            let j = (i * 7 + 3) % formulas.len();
            let (fi, fj) = (&formulas[i], &formulas[j]);
            let and = combine(fi, fj, Connective::And)?;
            let or = combine(fi, fj, Connective::Or)?;
            let meet: Vec<u16> = sets[i].iter().copied().filter(|x| sets[j].contains(x)).collect();
            let mut join: Vec<u16> = sets[i].iter().chain(&sets[j]).copied().collect();
            join.sort_unstable();
            join.dedup();
            let ok = set(&and)? == meet
                && set(&or)? == join
                && and.rank()? == fi.rank()? + fj.rank()?
                && or.rank()? == fi.rank()?.max(fj.rank()?);
            comb.record(ok, format!("{fi} ; {fj}"), || "set or rank mismatch".to_string());
        }
        for tally in [dio, dual, comb] {
            tally.finish(&mut r, 30);
        }
    }
    Ok(r)
}

fn fgring_suite(cfg: &SuiteConfig) -> Result<Report> {
    let mut r = Report::new("fgring", "Q, F2(T)");
    let z6 = FgRingDesc::parse("Zinv:6")?;
    let def = build_ring_definition(&z6, false)?;
    r.push(
        "Z[1/6] analysis",
        def.analysis.to_string() == "S = {q:2, q:3}, r = 1, reps = {0}",
        "Zinv:6",
        def.analysis.to_string(),
    );
    let mut t = Tally::new("Z[1/6] membership via formula = denominator test");
    for x in q().enumerate_by_height(cfg.height_or(50)) {
        let mut d = x.as_rational().unwrap().denom().clone();
        for p in [2u32, 3] {
            while (&d % p) == 0u32.into() {
                d /= p;
            }
        }
        let direct = d == 1u32.into();
        let via = def.contains_via_formula(&x)?;
        t.record(via == direct && z6.contains(&x) == direct, &x, || format!("direct {direct}, formula {via}"));
    }
    t.finish(&mut r, 1);
    r.push(
        "Z[1/6] formula rank",
        def.formula.rank()? == 80,
        "Zinv:6",
        format!("rank {}", def.formula.rank()?),
    );

    let mono = FgRingDesc::parse("Mono:2:{2,3}")?;
    let def = build_ring_definition(&mono, false)?;
    r.push(
        "F2[T^2, T^3] analysis",
        def.analysis.to_string() == "S = {inf}, r = T^2, reps = {0, 1}",
        "Mono:2:{2,3}",
        def.analysis.to_string(),
    );
    let x = fp(2).t().unwrap();
    let via = def.contains_via_formula(&x)?;
    r.push("T not in F2[T^2, T^3]", !via, "T", format!("formula semantics {via}"));
    let mut t = Tally::new("F2[T^2, T^3] membership via formula = zero T-coefficient");
    for x in fp(2).enumerate_by_height(cfg.height_or(6).min(6)) {
        let f = x.as_ratfunc().unwrap();
        let direct = f.den().is_one() && f.num().coeff(1) == 0;
        let via = def.contains_via_formula(&x)?;
        t.record(via == direct && mono.contains(&x) == direct, &x, || format!("direct {direct}, formula {via}"));
    }
    t.finish(&mut r, 1);
    r.push(
        "R/(r O_S) finite",
        def.index() == 2,
        "Mono:2:{2,3}",
        format!("{} cosets", def.index()),
    );
    Ok(r)
}

/// Whether `m` is a square in `Q_p`.
fn padic_square(m: &FieldElement, p: u64) -> bool {
    if m.is_zero() {
        return true;
    }
    let v = Place::Prime(p);
    let k = vf(m, &v);
    if k % 2 != 0 {
        return false;
    }
    let unit = m * &m.field().from_int(p as i64).pow(-k);
    let r = unit.as_rational().unwrap();
    let modulus = if p == 2 { 8 } else { p };
    let m_big = num_bigint::BigInt::from(modulus);
    let num: num_bigint::BigInt = r.numer().mod_floor(&m_big);
    let den: num_bigint::BigInt = r.denom().mod_floor(&m_big);
    let (num, den): (u64, u64) = (num.try_into().unwrap(), den.try_into().unwrap());
    // the unit part is num/den; compare num*den against the squares
    let c = (num * den) % modulus;
    if p == 2 {
        c == 1
    } else {
        (1..p).any(|y| (y * y) % p == c)
    }
}

/// `t ∈ S(Q)` over Q for a division algebra: `X^2 - tX + 1` must be
/// irreducible and stay irreducible at every ramified place.
fn in_s_of_q_local(q: &QuaternionDesc, t: &FieldElement) -> Result<bool> {
    let disc = &t.square() - &t.field().from_int(4);
    if disc.is_zero() || disc.is_square() {
        return Ok(false);
    }
    Ok(ramification_set(q)?.iter().all(|v| match v {
        Place::Prime(p) => !padic_square(&disc, *p),
        _ => true,
    }))
}

/// `x = t1 + t2` with `t_i ∈ S(Q_i)`, searched over small `t1` that pass
/// the local test.
fn sigma_decomposition(
    q1: &QuaternionDesc,
    q2: &QuaternionDesc,
    x: &FieldElement,
    budget: usize,
) -> Result<Option<(FieldElement, SofQVerdict, SofQVerdict)>> {
    for t1 in x.field().enumerate_by_height(40) {
        let t2 = x - &t1;
        if !in_s_of_q_local(q1, &t1)? || !in_s_of_q_local(q2, &t2)? {
            continue;
        }
        let w1 = in_s_of_q(q1, &t1, budget);
        if w1 == SofQVerdict::NoWitnessFound {
            continue;
        }
        let w2 = in_s_of_q(q2, &t2, budget);
        if w2 != SofQVerdict::NoWitnessFound {
            return Ok(Some((t1, w1, w2)));
        }
    }
    Ok(None)
}

fn hints_for(first: &str, t1: &FieldElement, w1: &SofQVerdict, w2: &SofQVerdict, names: &[&str]) -> HashMap<String, Vec<FieldElement>> {
    let mut h = HashMap::new();
    h.insert(first.to_string(), vec![t1.clone()]);
    for (w, chunk) in [w1, w2].into_iter().zip(names.chunks(3)) {
        if let SofQVerdict::Member { x1, x3, x4 } = w {
            h.insert(chunk[0].to_string(), vec![x3.clone()]);
            h.insert(chunk[1].to_string(), vec![x4.clone()]);
            h.insert(chunk[2].to_string(), vec![x1.clone()]);
        }
    }
    h
}

fn spot_checks() -> Result<Report> {
    let field = q();
    let s = parse_places(field, "{q:5}")?;
    let (c1, c2) = semilocal_pair(field, &s)?;
    let (a1, b1) = artin_schreier_params(&c1);
    let (a2, b2) = artin_schreier_params(&c2);
    let q1 = QuaternionDesc::artin_schreier(a1.clone(), b1.clone())?;
    let q2 = QuaternionDesc::artin_schreier(a2.clone(), b2.clone())?;
    let mut r = Report::new("spot-checks", "Q");
    r.param("Q1", &q1);
    r.param("Q2", &q2);
    let params: HashMap<String, FieldElement> = [("a", &a1), ("b", &b1), ("a2", &a2), ("b2", &b2)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    let names = ["y2", "y3", "y4", "y5", "y6", "y7"];
    let budget = 20_000;
    let modes = [
        (SigmaMode::Plain, "Sigma"),
        (SigmaMode::Inverse, "Sigma^-1"),
        (SigmaMode::Units, "Sigma^x"),
    ];
    let curated = ["0", "1", "2", "3", "-1", "1/2", "1/3", "7/3", "4", "6", "-7/2", "1/7", "5", "25/3"];
    let outside = ["1/5", "2/5", "1/25", "3/10", "7/15", "-1/5", "1/125", "-3/5"];
    let mut found = 0usize;
    for (mode, label) in modes {
        let f = build_phi_sigma(mode);
        for x_str in curated.iter().chain(outside.iter()) {
            let x = field.parse_element(x_str)?;
            let member = in_semilocal(&s, &x, mode);
            let mut env = params.clone();
            env.insert("x".to_string(), x.clone());
            let mut ev = GlobalEval::new(field, 12, 200_000);
            // the numerator and denominator the formula feeds to Σ
            let (n, d) = match mode {
                SigmaMode::Plain => (x.clone(), field.one()),
                SigmaMode::Inverse => (field.one(), x.clone()),
                SigmaMode::Units => (&x.square() + &field.one(), x.clone()),
            };
            if member {
                let target = &n / &d;
                let Some((t1, w1, w2)) = sigma_decomposition(&q1, &q2, &target, budget)? else {
                    r.push_outcome(format!("{label} witness at {x}"), Outcome::Inconclusive, x_str.to_string(), "no trace decomposition found");
                    continue;
                };
                // the formula works with D-scaled coordinates
                let scale = |w: &SofQVerdict| match w {
                    SofQVerdict::Member { x1, x3, x4 } => SofQVerdict::Member {
                        x1: x1 * &d,
                        x3: x3 * &d,
                        x4: x4 * &d,
                    },
                    other => other.clone(),
                };
                ev.hints = hints_for("y1", &(&t1 * &d), &scale(&w1), &scale(&w2), &names);
                let (truth, trail) = eval_global(&f, &ev, &env)?;
                let shown: Vec<String> = trail.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                if truth == Truth::True {
                    found += 1;
                }
                let outcome = match truth {
                    Truth::True => Outcome::Pass,
                    Truth::Unknown => Outcome::Inconclusive,
                    Truth::False => Outcome::Fail,
                };
                r.push_outcome(format!("{label} witness at {x}"), outcome, x_str.to_string(), shown.join(", "));
            } else {
                let (truth, trail) = eval_global(&f, &ev, &env)?;
                let shown: Vec<String> = trail.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                r.push(
                    format!("{label} sound at {x}"),
                    truth != Truth::True,
                    x_str.to_string(),
                    format!("{truth} {}", shown.join(", ")),
                );
            }
        }
    }
    // m_v and the universal O_v formula at a few points
    let m5 = crate::formula::build_m_v(field, &Place::Prime(5))?;
    let o5 = dualize(&m5, "x")?;
    for x_str in ["5", "1/5", "3", "10/3", "0", "2/25"] {
        let x = field.parse_element(x_str)?;
        let env = HashMap::from([("x".to_string(), x.clone())]);
        let ev = GlobalEval::new(field, 12, 200_000);
        let in_m = valuation(&x, &Place::Prime(5)) >= Valuation::Finite(1);
        let (tm, _) = eval_global(&m5, &ev, &env)?;
        r.push(format!("m_5 sound at {x}"), in_m || tm != Truth::True, x_str.to_string(), tm.to_string());
        let in_o = valuation(&x, &Place::Prime(5)) >= Valuation::Finite(0);
        let (to, _) = eval_global(&o5, &ev, &env)?;
        r.push(format!("O_5 sound at {x}"), !in_o || to != Truth::False, x_str.to_string(), to.to_string());
    }
    r.push(
        "explicit witnesses found",
        found >= 10,
        "",
        format!("{found} formula evaluations confirmed by a witness trail"),
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padic_squares() {
        let f = q();
        let e = |s: &str| f.parse_element(s).unwrap();
        assert!(padic_square(&e("17"), 2));
        assert!(!padic_square(&e("5"), 2));
        assert!(padic_square(&e("4/9"), 3));
        assert!(!padic_square(&e("2"), 3));
        assert!(padic_square(&e("-1"), 5));
        assert!(!padic_square(&e("10"), 5));
        assert!(padic_square(&e("1/7"), 3));
    }

    #[test]
    fn local_trace_test_agrees_with_witness_search() {
        let f = q();
        let (q1, q2) = semilocal_pair(f, &parse_places(f, "{q:5}").unwrap()).unwrap();
        let mut hits = 0;
        for q in [&q1, &q2] {
            for t in f.enumerate_by_height(5) {
                let local = in_s_of_q_local(q, &t).unwrap();
                let found = in_s_of_q(q, &t, 3000) != SofQVerdict::NoWitnessFound;
                assert!(!found || local, "{q} {t}");
                hits += usize::from(found);
            }
        }
        assert!(hits > 10);
    }
}
