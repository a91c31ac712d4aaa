use num_bigint::BigInt;
use proptest::prelude::*;

use globaldef::definable::{in_complement_union, in_semilocal, Membership, SetExpr, SigmaMode};
use globaldef::place::places;
use globaldef::{reduce, support, valuation, weak_approximate, FieldDesc, FieldElement, Place, PlaceSet, Poly, RatFunc, Target, Valuation};

fn rat() -> impl Strategy<Value = FieldElement> {
    (-400i64..400, 1i64..400).prop_map(|(n, d)| FieldDesc::Rationals.from_ratio(n, d))
}

fn nonzero_rat() -> impl Strategy<Value = FieldElement> {
    rat().prop_filter("nonzero", |x| !x.is_zero())
}

fn poly3(max_len: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(0u64..3, 1..max_len).prop_map(|c| Poly::new(3, c))
}

fn fun3() -> impl Strategy<Value = FieldElement> {
    (poly3(6), poly3(5).prop_filter("nonzero", |d| !d.is_zero()))
        .prop_map(|(n, d)| FieldElement::Fun(RatFunc::new(n, d)))
}

fn nonzero_fun3() -> impl Strategy<Value = FieldElement> {
    fun3().prop_filter("nonzero", |x| !x.is_zero())
}

fn q_place() -> impl Strategy<Value = Place> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]).prop_map(Place::Prime)
}

fn f3_place() -> impl Strategy<Value = Place> {
    let f3 = FieldDesc::function_field(3).unwrap();
    prop::sample::select(places(f3).take(10).collect::<Vec<_>>())
}

fn place_set(field: FieldDesc, picks: Vec<bool>) -> PlaceSet {
    places(field).zip(picks).filter(|(_, b)| *b).map(|(v, _)| v).collect()
}

/// `x` times a power of a uniformizer at `v`, so that it is `v`-integral.
fn integral(x: FieldElement, v: &Place) -> FieldElement {
    match valuation(&x, v).finite() {
        Some(k) if k < 0 => &x * &v.uniformizer(x.field()).pow(-k),
        _ => x,
    }
}

fn additive(x: &FieldElement, y: &FieldElement, v: &Place) -> Result<(), TestCaseError> {
    let (vx, vy) = (valuation(x, v), valuation(y, v));
    let vxy = valuation(&(x * y), v);
    match (vx, vy) {
        (Valuation::Finite(a), Valuation::Finite(b)) => prop_assert_eq!(vxy, Valuation::Finite(a + b)),
        _ => prop_assert_eq!(vxy, Valuation::Infinite),
    }
    prop_assert!(valuation(&(x + y), v) >= vx.min(vy));
    if vx != vy {
        prop_assert_eq!(valuation(&(x + y), v), vx.min(vy));
    }
    Ok(())
}

proptest! {
    #[test]
    fn valuations_are_additive_over_q(x in rat(), y in rat(), v in q_place()) {
        additive(&x, &y, &v)?;
    }

    #[test]
    fn valuations_are_additive_over_f3t(x in fun3(), y in fun3(), v in f3_place()) {
        additive(&x, &y, &v)?;
    }

    #[test]
    fn product_formula_over_q(x in nonzero_rat()) {
        let r = x.as_rational().unwrap();
        let mut num = BigInt::from(1);
        let mut den = BigInt::from(1);
        for v in support(&x).unwrap() {
            let Place::Prime(p) = v else { unreachable!() };
            let k = valuation(&x, &v).finite().unwrap();
            let pk = BigInt::from(p).pow(k.unsigned_abs() as u32);
            if k > 0 { num *= pk } else { den *= pk }
        }
        prop_assert_eq!(num, r.numer().magnitude().clone().into());
        prop_assert_eq!(den, r.denom().clone());
    }

    #[test]
    fn product_formula_over_f3t(x in nonzero_fun3()) {
        let total: i64 = support(&x)
            .unwrap()
            .iter()
            .map(|v| v.degree() as i64 * valuation(&x, v).finite().unwrap())
            .sum();
        prop_assert_eq!(total, 0);
    }

    #[test]
    fn weak_approximation_meets_every_target(
        vals in prop::collection::vec(rat(), 3),
        precs in prop::collection::vec(-2i64..4, 3),
        picks in prop::sample::subsequence(vec![2u64, 3, 5, 7, 11], 1..4),
    ) {
        let targets: Vec<Target> = picks
            .iter()
            .zip(vals.iter().zip(&precs))
            .map(|(p, (x, k))| Target::new(Place::Prime(*p), x.clone(), *k))
            .collect();
        let x = weak_approximate(&targets).unwrap();
        for t in &targets {
            prop_assert!(t.is_met(&x), "{} misses {:?}", x, t);
        }
    }

    #[test]
    fn weak_approximation_over_f3t(
        vals in prop::collection::vec(fun3(), 3),
        precs in prop::collection::vec(-1i64..3, 3),
        picks in prop::sample::subsequence((0..8usize).collect::<Vec<_>>(), 1..4),
    ) {
        let f3 = FieldDesc::function_field(3).unwrap();
        let all: Vec<Place> = places(f3).take(8).collect();
        let targets: Vec<Target> = picks
            .iter()
            .zip(vals.iter().zip(&precs))
            .map(|(i, (x, k))| Target::new(all[*i].clone(), x.clone(), *k))
            .collect();
        let x = weak_approximate(&targets).unwrap();
        for t in &targets {
            prop_assert!(t.is_met(&x), "{} misses {:?}", x, t);
        }
    }

    #[test]
    fn reduction_is_a_ring_map(x in fun3(), y in fun3(), v in f3_place()) {
        let f3 = FieldDesc::function_field(3).unwrap();
        let (x, y) = (integral(x, &v), integral(y, &v));
        let k = v.residue_field(f3);
        let (rx, ry) = (reduce(&x, &v).unwrap().value, reduce(&y, &v).unwrap().value);
        prop_assert_eq!(reduce(&(&x * &y), &v).unwrap().value, k.reduce(&rx.mul(&ry)));
        prop_assert_eq!(reduce(&(&x + &y), &v).unwrap().value, k.reduce(&rx.add(&ry)));
    }

    #[test]
    fn reduction_mod_p_is_a_ring_map(x in rat(), y in rat(), v in q_place()) {
        let (x, y) = (integral(x, &v), integral(y, &v));
        let k = v.residue_field(FieldDesc::Rationals);
        let (rx, ry) = (reduce(&x, &v).unwrap().value, reduce(&y, &v).unwrap().value);
        prop_assert_eq!(reduce(&(&x * &y), &v).unwrap().value, k.reduce(&rx.mul(&ry)));
        prop_assert_eq!(reduce(&(&x + &y), &v).unwrap().value, k.reduce(&rx.add(&ry)));
    }

    #[test]
    fn semilocal_units_are_invertible_elements(x in nonzero_rat(), picks in prop::collection::vec(any::<bool>(), 6)) {
        let s = place_set(FieldDesc::Rationals, picks);
        let inv = x.inv().unwrap();
        let both = in_semilocal(&s, &x, SigmaMode::Plain) && in_semilocal(&s, &inv, SigmaMode::Plain);
        prop_assert_eq!(in_semilocal(&s, &x, SigmaMode::Units), both);
        prop_assert_eq!(in_semilocal(&s, &x, SigmaMode::Inverse), in_semilocal(&s, &inv, SigmaMode::Plain));
    }

    #[test]
    fn s_integers_are_dual_to_the_union_over_q(x in rat(), picks in prop::collection::vec(any::<bool>(), 6)) {
        let s = place_set(FieldDesc::Rationals, picks);
        let os = SetExpr::OS(s.clone()).contains(std::slice::from_ref(&x)).unwrap();
        let dual = x.is_zero() || !in_complement_union(&x.inv().unwrap(), &s);
        prop_assert_eq!(os == Membership::In, dual);
    }

    #[test]
    fn s_integers_are_dual_to_the_union_over_f3t(x in fun3(), picks in prop::collection::vec(any::<bool>(), 6)) {
        let s = place_set(FieldDesc::function_field(3).unwrap(), picks);
        let os = SetExpr::OS(s.clone()).contains(std::slice::from_ref(&x)).unwrap();
        let dual = x.is_zero() || !in_complement_union(&x.inv().unwrap(), &s);
        prop_assert_eq!(os == Membership::In, dual);
    }
}
