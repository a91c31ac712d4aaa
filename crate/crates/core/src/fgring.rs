//! Finitely generated subrings of a global field: the places where the
//! ring is not integral, a conductor, coset representatives, and a
//! universal definition assembled from the one for `O_S`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_integer::Integer;

use crate::arith::{factor_u64, is_prime};
use crate::definable::in_o_s;
use crate::error::{Error, Result};
use crate::field::{FieldDesc, FieldElement, RatFunc};
use crate::formula::{build_complement_union, combine, dualize, ComplementUnion, Connective, Formula, Term};
use crate::place::{format_places, Place, PlaceSet};
use crate::poly::Poly;
use crate::synthesis::AbMemo;

/// A supported ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FgRingDesc {
    /// `Z[1/n]`; `n = 1` is `Z`.
    LocalizedIntegers(u64),
    /// `F_p[T]`.
    Polynomial(u64),
    /// The `F_p`-span of `T^k` for `k` in the numerical semigroup
    /// generated by `gens`.
    Monomial { p: u64, gens: Vec<u64> },
}

impl FgRingDesc {
    /// Parses `Zinv:6`, `Z`, `FpT:2` or `Mono:2:{2,3}`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::parse(0, format!("unknown ring descriptor '{s}'"));
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        let desc = if s == "Z" {
            FgRingDesc::LocalizedIntegers(1)
        } else if let Some(n) = s.strip_prefix("Zinv:") {
            FgRingDesc::LocalizedIntegers(num(n)?)
        } else if let Some(p) = s.strip_prefix("FpT:") {
            FgRingDesc::Polynomial(num(p)?)
        } else if let Some(rest) = s.strip_prefix("Mono:") {
            let (p, gens) = rest.split_once(':').ok_or_else(bad)?;
            let gens = gens
                .trim()
                .strip_prefix('{')
                .and_then(|g| g.strip_suffix('}'))
                .ok_or_else(bad)?;
            let gens = gens
                .split(',')
                .filter(|g| !g.trim().is_empty())
                .map(num)
                .collect::<Result<Vec<u64>>>()?;
            FgRingDesc::Monomial { p: num(p)?, gens }
        } else {
            return Err(bad());
        };
        desc.validate()?;
        Ok(desc)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FgRingDesc::LocalizedIntegers(0) => Err(Error::pre("Z[1/n] needs n >= 1")),
            FgRingDesc::LocalizedIntegers(_) => Ok(()),
            FgRingDesc::Polynomial(p) | FgRingDesc::Monomial { p, .. } if !is_prime(*p) => {
                Err(Error::pre(format!("{p} is not prime")))
            }
            FgRingDesc::Polynomial(_) => Ok(()),
            FgRingDesc::Monomial { gens, .. } => {
                let g = gens.iter().fold(0u64, |acc, &k| acc.gcd(&k));
                if g != 1 {
                    return Err(Error::pre(format!(
                        "semigroup generators {gens:?} are not coprime; the ring does not have fraction field F_p(T)"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn field(&self) -> FieldDesc {
        match self {
            FgRingDesc::LocalizedIntegers(_) => FieldDesc::Rationals,
            FgRingDesc::Polynomial(p) | FgRingDesc::Monomial { p, .. } => {
                FieldDesc::RationalFunctions { p: *p }
            }
        }
    }

    /// Direct membership test.
    pub fn contains(&self, x: &FieldElement) -> bool {
        match self {
            FgRingDesc::LocalizedIntegers(n) => in_o_s(x, &prime_places(*n)),
            FgRingDesc::Polynomial(_) => as_poly(x).is_some(),
            FgRingDesc::Monomial { gens, .. } => match as_poly(x) {
                None => false,
                Some(f) => {
                    let c = semigroup_conductor(gens);
                    f.coeffs()
                        .iter()
                        .enumerate()
                        .all(|(k, &a)| a == 0 || k as u64 >= c || in_semigroup(gens, k as u64))
                }
            },
        }
    }
}

impl fmt::Display for FgRingDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FgRingDesc::LocalizedIntegers(n) => write!(f, "Zinv:{n}"),
            FgRingDesc::Polynomial(p) => write!(f, "FpT:{p}"),
            FgRingDesc::Monomial { p, gens } => {
                let g: Vec<String> = gens.iter().map(u64::to_string).collect();
                write!(f, "Mono:{p}:{{{}}}", g.join(","))
            }
        }
    }
}

fn prime_places(n: u64) -> PlaceSet {
    factor_u64(n).into_iter().map(|(p, _)| Place::Prime(p)).collect()
}

fn as_poly(x: &FieldElement) -> Option<&Poly> {
    let f = x.as_ratfunc()?;
    f.den().is_one().then(|| f.num())
}

fn in_semigroup(gens: &[u64], k: u64) -> bool {
    let mut reach = vec![false; k as usize + 1];
    reach[0] = true;
    for i in 1..=k as usize {
        reach[i] = gens
            .iter()
            .any(|&g| g > 0 && g as usize <= i && reach[i - g as usize]);
    }
    reach[k as usize]
}

/// The least `c` such that every `k >= c` lies in the semigroup.
pub fn semigroup_conductor(gens: &[u64]) -> u64 {
    let m = gens.iter().copied().filter(|&g| g > 0).min().unwrap_or(1);
    let mut reach = vec![true];
    let mut run = 1u64;
    let mut last_gap: Option<u64> = None;
    let mut k = 0u64;
    while run < m {
        k += 1;
        let ok = gens
            .iter()
            .any(|&g| g > 0 && g <= k && reach[(k - g) as usize]);
        reach.push(ok);
        if ok {
            run += 1;
        } else {
            run = 0;
            last_gap = Some(k);
        }
    }
    last_gap.map_or(0, |g| g + 1)
}

/// `S`, a conductor `r` and coset representatives with
/// `R = ⋃ (y + r·O_S)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingAnalysis {
    pub s: PlaceSet,
    pub conductor: FieldElement,
    pub coset_reps: Vec<FieldElement>,
}

impl fmt::Display for RingAnalysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reps: Vec<String> = self.coset_reps.iter().map(|y| y.to_string()).collect();
        write!(
            f,
            "S = {}, r = {}, reps = {{{}}}",
            format_places(&self.s),
            self.conductor,
            reps.join(", ")
        )
    }
}

impl RingAnalysis {
    /// `x ∈ y + r·O_S` for some representative `y`.
    pub fn contains(&self, x: &FieldElement) -> Result<bool> {
        let r_inv = self.conductor.inv()?;
        Ok(self
            .coset_reps
            .iter()
            .any(|y| in_o_s(&(&(x - y) * &r_inv), &self.s)))
    }
}

/// Computes `(S, r, reps)` and checks the invariants on a small sample.
pub fn analyze(desc: &FgRingDesc) -> Result<RingAnalysis> {
    desc.validate()?;
    let field = desc.field();
    let analysis = match desc {
        FgRingDesc::LocalizedIntegers(n) => RingAnalysis {
            s: prime_places(*n),
            conductor: field.one(),
            coset_reps: vec![field.zero()],
        },
        FgRingDesc::Polynomial(_) => RingAnalysis {
            s: PlaceSet::from([Place::Infinity]),
            conductor: field.one(),
            coset_reps: vec![field.zero()],
        },
        FgRingDesc::Monomial { p, gens } => {
            let p = *p;
            let c = semigroup_conductor(gens);
            let ks: Vec<usize> = (0..c).filter(|&k| in_semigroup(gens, k)).map(|k| k as usize).collect();
            let count = (p as u128).pow(ks.len() as u32);
            let reps = (0..count)
                .map(|mut i| {
                    let mut coeffs = vec![0u64; c.max(1) as usize];
                    for &k in &ks {
                        coeffs[k] = (i % p as u128) as u64;
                        i /= p as u128;
                    }
                    FieldElement::Fun(RatFunc::from_poly(Poly::new(p, coeffs)))
                })
                .collect();
            RingAnalysis {
                s: PlaceSet::from([Place::Infinity]),
                conductor: FieldElement::Fun(RatFunc::from_poly(Poly::monomial(p, 1, c as usize))),
                coset_reps: reps,
            }
        }
    };
    let sample = field.enumerate_by_height(match field {
        FieldDesc::Rationals => 12,
        FieldDesc::RationalFunctions { p } if p <= 3 => 3,
        FieldDesc::RationalFunctions { .. } => 2,
    });
    check_analysis(desc, &analysis, &sample)?;
    Ok(analysis)
}

/// Verifies on `sample`: `r ≠ 0`, `r·O_S ⊆ R`, the representatives are
/// pairwise incongruent modulo `r·O_S`, and `R` is the union of the cosets.
pub fn check_analysis(desc: &FgRingDesc, analysis: &RingAnalysis, sample: &[FieldElement]) -> Result<()> {
    if analysis.conductor.is_zero() {
        return Err(Error::pre("conductor must be nonzero"));
    }
    let r_inv = analysis.conductor.inv()?;
    for (i, y) in analysis.coset_reps.iter().enumerate() {
        if !desc.contains(y) {
            return Err(Error::pre(format!("representative {y} is not in {desc}")));
        }
        for z in &analysis.coset_reps[..i] {
            if in_o_s(&(&(y - z) * &r_inv), &analysis.s) {
                return Err(Error::pre(format!("representatives {z} and {y} are congruent")));
            }
        }
    }
    for x in sample {
        if in_o_s(x, &analysis.s) && !desc.contains(&(&analysis.conductor * x)) {
            return Err(Error::pre(format!("r * {x} is not in {desc}")));
        }
        if desc.contains(x) != analysis.contains(x)? {
            return Err(Error::pre(format!("coset decomposition disagrees at {x}")));
        }
    }
    Ok(())
}

/// The universal definition of a ring together with the data it was built
/// from.
#[derive(Debug)]
pub struct RingDefinition {
    pub desc: FgRingDesc,
    pub analysis: RingAnalysis,
    pub union: ComplementUnion,
    pub formula: Formula,
    memo: AbMemo,
}

/// Disjunction over the representatives `y` of the universal `O_S`
/// formula at `(x - y)/r`.
pub fn build_ring_definition(desc: &FgRingDesc, optimized: bool) -> Result<RingDefinition> {
    let analysis = analyze(desc)?;
    let field = desc.field();
    let union = build_complement_union(field, &analysis.s, optimized)?;
    let o_s = dualize(&union.formula, "x")?;
    let r_inv = analysis.conductor.inv()?;
    let mut formula: Option<Formula> = None;
    for y in &analysis.coset_reps {
        let arg = Term::mul(Term::elem(&r_inv), Term::sub(Term::var("x"), Term::elem(y)));
        let part = o_s.subst(&HashMap::from([("x".to_string(), arg)]));
        formula = Some(match formula {
            None => part,
            Some(f) => combine(&f, &part, Connective::Or)?,
        });
    }
    let memo = AbMemo::new(union.pack.clone());
    Ok(RingDefinition {
        desc: desc.clone(),
        analysis,
        union,
        formula: formula.expect("at least one representative"),
        memo,
    })
}

pub fn build_ring_formula(desc: &FgRingDesc, optimized: bool) -> Result<Formula> {
    Ok(build_ring_definition(desc, optimized)?.formula)
}

impl RingDefinition {
    /// Membership following the formula: some representative `y` gives
    /// `x' = (x - y)/r` with `x' = 0` or `1/x'` outside the defined union.
    pub fn contains_via_formula(&self, x: &FieldElement) -> Result<bool> {
        let r_inv = self.analysis.conductor.inv()?;
        for y in &self.analysis.coset_reps {
            let xp = &(x - y) * &r_inv;
            if xp.is_zero() || !self.union.contains(&self.memo, &self.analysis.s, &xp.inv()?)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `|R / r·O_S|`, counted through the representatives.
    pub fn index(&self) -> usize {
        self.analysis.coset_reps.len()
    }
}

/// The semigroup elements below the conductor.
pub fn small_semigroup_elements(gens: &[u64]) -> BTreeSet<u64> {
    (0..semigroup_conductor(gens)).filter(|&k| in_semigroup(gens, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conductors() {
        assert_eq!(semigroup_conductor(&[2, 3]), 2);
        assert_eq!(semigroup_conductor(&[3, 5]), 8);
        assert_eq!(semigroup_conductor(&[1]), 0);
        assert_eq!(semigroup_conductor(&[4, 6, 7]), 10);
        assert_eq!(small_semigroup_elements(&[3, 5]), BTreeSet::from([0, 3, 5, 6]));
    }

    #[test]
    fn descriptors_roundtrip() {
        for s in ["Zinv:6", "FpT:2", "Mono:2:{2,3}", "Zinv:1"] {
            assert_eq!(FgRingDesc::parse(s).unwrap().to_string(), s);
        }
        assert!(FgRingDesc::parse("Mono:2:{2,4}").is_err());
        assert!(FgRingDesc::parse("Zinv:0").is_err());
        assert!(FgRingDesc::parse("FpT:4").is_err());
    }

    #[test]
    fn small_analyses() {
        let z6 = analyze(&FgRingDesc::parse("Zinv:6").unwrap()).unwrap();
        assert_eq!(z6.to_string(), "S = {q:2, q:3}, r = 1, reps = {0}");
        let mono = analyze(&FgRingDesc::parse("Mono:2:{2,3}").unwrap()).unwrap();
        assert_eq!(mono.to_string(), "S = {inf}, r = T^2, reps = {0, 1}");
        let z = analyze(&FgRingDesc::parse("Z").unwrap()).unwrap();
        assert_eq!(z.to_string(), "S = {}, r = 1, reps = {0}");
        let m35 = analyze(&FgRingDesc::parse("Mono:3:{3,5}").unwrap()).unwrap();
        assert_eq!(m35.coset_reps.len(), 81);
    }
}
