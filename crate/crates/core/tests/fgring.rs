use globaldef::fgring::{analyze, build_ring_definition, FgRingDesc};
use globaldef::{valuation, FieldDesc, FieldElement, Place, Poly, Valuation};

fn poly_elem(p: u64, s: &str) -> FieldElement {
    FieldDesc::function_field(p).unwrap().parse_element(s).unwrap()
}

/// `v_p(x) >= 0` for every prime `p` other than 2 and 3, read off the
/// denominator.
fn in_z_sixth(x: &FieldElement) -> bool {
    let mut d = x.as_rational().unwrap().denom().clone();
    for p in [2u32, 3] {
        while (&d % p) == 0u32.into() {
            d /= p;
        }
    }
    d == 1u32.into()
}

/// A polynomial whose coefficient of `T` vanishes.
fn in_f2_t2_t3(x: &FieldElement) -> bool {
    let f = x.as_ratfunc().unwrap();
    f.den().is_one() && f.num().coeff(1) == 0
}

#[test]
fn z_sixth_matches_derived_analysis_and_membership() {
    let desc = FgRingDesc::parse("Zinv:6").unwrap();
    let a = analyze(&desc).unwrap();
    assert_eq!(a.to_string(), "S = {q:2, q:3}, r = 1, reps = {0}");
    let def = build_ring_definition(&desc, false).unwrap();
    assert_eq!(def.formula.rank().unwrap(), 80);
    for x in FieldDesc::Rationals.enumerate_by_height(50) {
        let want = in_z_sixth(&x);
        assert_eq!(desc.contains(&x), want, "{x}");
        assert_eq!(def.contains_via_formula(&x).unwrap(), want, "{x}");
    }
}

#[test]
fn f2_t2_t3_matches_derived_analysis_and_membership() {
    let desc = FgRingDesc::parse("Mono:2:{2,3}").unwrap();
    let def = build_ring_definition(&desc, false).unwrap();
    assert_eq!(def.analysis.to_string(), "S = {inf}, r = T^2, reps = {0, 1}");
    assert_eq!(def.index(), 2);
    let single = build_ring_definition(&FgRingDesc::parse("FpT:2").unwrap(), false).unwrap();
    assert_eq!(def.formula.rank().unwrap(), 2 * single.formula.rank().unwrap());
    let t = poly_elem(2, "T");
    assert!(!def.contains_via_formula(&t).unwrap());
    assert!(def.contains_via_formula(&poly_elem(2, "T^3+T^2+1")).unwrap());
    let f2 = FieldDesc::function_field(2).unwrap();
    for x in f2.enumerate_by_height(6) {
        let want = in_f2_t2_t3(&x);
        assert_eq!(desc.contains(&x), want, "{x}");
        assert_eq!(def.contains_via_formula(&x).unwrap(), want, "{x}");
    }
}

#[test]
fn integers_and_polynomials() {
    let z = build_ring_definition(&FgRingDesc::parse("Z").unwrap(), false).unwrap();
    for x in FieldDesc::Rationals.enumerate_by_height(20) {
        let integral = x.as_rational().unwrap().is_integer();
        assert_eq!(z.contains_via_formula(&x).unwrap(), integral, "{x}");
    }
    let f3t = build_ring_definition(&FgRingDesc::parse("FpT:3").unwrap(), true).unwrap();
    for x in FieldDesc::function_field(3).unwrap().enumerate_by_height(3) {
        let poly = valuation(&x, &Place::Infinity) >= Valuation::Finite(-3)
            && x.as_ratfunc().unwrap().den().is_one();
        assert_eq!(f3t.contains_via_formula(&x).unwrap(), poly, "{x}");
    }
}

#[test]
fn monomial_ring_with_larger_conductor() {
    let desc = FgRingDesc::parse("Mono:2:{3,4,5}").unwrap();
    let def = build_ring_definition(&desc, true).unwrap();
    assert_eq!(def.analysis.conductor, FieldElement::Fun(globaldef::RatFunc::from_poly(Poly::monomial(2, 1, 3))));
    assert_eq!(def.index(), 2);
    for x in FieldDesc::function_field(2).unwrap().enumerate_by_height(5) {
        let want = x.as_ratfunc().unwrap().den().is_one()
            && (1..3).all(|k| x.as_ratfunc().unwrap().num().coeff(k) == 0);
        assert_eq!(def.contains_via_formula(&x).unwrap(), want, "{x}");
    }
}
