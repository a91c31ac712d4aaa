use globaldef::place::{places, Place};
use globaldef::quaternion::{
    is_nonreal, local_split_oracle, local_splits, ramification_set, OracleVerdict, QuaternionDesc,
};
use globaldef::{FieldDesc, FieldElement};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pool(field: FieldDesc, h: u64) -> Vec<FieldElement> {
    field
        .enumerate_by_height(h)
        .into_iter()
        .filter(|x| !x.is_zero())
        .collect()
}

fn sample_quaternions(field: FieldDesc, h: u64, n: usize, seed: u64) -> Vec<QuaternionDesc> {
    let elems = pool(field, h);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let a = elems.choose(&mut rng).unwrap().clone();
        let b = elems.choose(&mut rng).unwrap().clone();
        if let Ok(q) = QuaternionDesc::artin_schreier(a, b) {
            out.push(q);
        }
    }
    out
}

fn agreement(field: FieldDesc, h: u64, seed: u64, precision: u32) -> (usize, usize) {
    let mut checked = 0;
    let mut inconclusive = 0;
    let test_places: Vec<Place> = places(field).take(4).collect();
    for q in sample_quaternions(field, h, 80, seed) {
        for v in &test_places {
            match local_split_oracle(&q, v, precision) {
                OracleVerdict::Inconclusive => inconclusive += 1,
                verdict => {
                    assert_eq!(
                        local_splits(&q, v),
                        verdict == OracleVerdict::Split,
                        "{q} at {v}"
                    );
                    checked += 1;
                }
            }
        }
    }
    eprintln!("{field}: {checked} checked, {inconclusive} inconclusive");
    (checked, inconclusive)
}

#[test]
fn local_splits_matches_oracle_over_q() {
    let (checked, _) = agreement(FieldDesc::Rationals, 12, 1, 10);
    assert!(checked > 200);
}

#[test]
fn local_splits_matches_oracle_over_f2t() {
    let (checked, _) = agreement(FieldDesc::function_field(2).unwrap(), 3, 2, 12);
    assert!(checked > 200);
}

#[test]
fn local_splits_matches_oracle_over_f3t() {
    let (checked, _) = agreement(FieldDesc::function_field(3).unwrap(), 2, 3, 8);
    assert!(checked > 200);
}

#[test]
fn classicalize_preserves_splitting() {
    let field = FieldDesc::function_field(5).unwrap();
    for q in sample_quaternions(field, 2, 40, 4) {
        let cl = q.classicalize().unwrap();
        for v in places(field).take(6) {
            assert_eq!(local_splits(&q, &v), local_splits(&cl, &v), "{q} at {v}");
        }
    }
}

#[test]
fn nonreal_ramification_sets_have_even_size() {
    for field in [
        FieldDesc::Rationals,
        FieldDesc::function_field(2).unwrap(),
        FieldDesc::function_field(3).unwrap(),
    ] {
        let h = if field == FieldDesc::Rationals { 20 } else { 3 };
        for q in sample_quaternions(field, h, 60, 5) {
            if is_nonreal(&q) {
                assert_eq!(ramification_set(&q).unwrap().len() % 2, 0, "{q}");
            }
        }
    }
}
