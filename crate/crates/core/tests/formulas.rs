use std::collections::{BTreeSet, HashMap};

use globaldef::definable::SigmaMode;
use globaldef::ff::FqTable;
use globaldef::formula::{
    build_h, build_j, build_phi_sigma, build_square_class, combine, dualize, fq_defined_set,
    rank_ledger, to_diophantine, Ambient, Connective, Formula,
};

fn corpus() -> Vec<Formula> {
    include_str!("../data/corpus.txt")
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| Formula::parse(l).unwrap_or_else(|e| panic!("{l}: {e}")))
        .collect()
}

fn set_of(f: &Formula, t: &FqTable, params: &HashMap<String, u16>) -> BTreeSet<u16> {
    fq_defined_set(f, t, "x", params).unwrap().into_iter().collect()
}

fn no_params() -> HashMap<String, u16> {
    HashMap::new()
}

/// `[a, b)` as 2x2 matrices when it is `[0, 1)`: `u = diag(1, 0)`,
/// `v = antidiag(1, 1)`. Returns the traces of non-scalar matrices of
/// determinant one.
fn matrix_traces(t: &FqTable) -> BTreeSet<u16> {
    let mut out = BTreeSet::new();
    for a in t.elements() {
        for b in t.elements() {
            for c in t.elements() {
                for d in t.elements() {
                    let det = t.sub(t.mul(a, d), t.mul(b, c));
                    let scalar = b == 0 && c == 0 && a == d;
                    if det == 1 && !scalar {
                        out.insert(t.add(a, d));
                    }
                }
            }
        }
    }
    out
}

fn sumset(t: &FqTable, a: &BTreeSet<u16>, b: &BTreeSet<u16>) -> BTreeSet<u16> {
    let mut out = BTreeSet::new();
    for &x in a {
        for &y in b {
            out.insert(t.add(x, y));
        }
    }
    out
}

fn split_params(t: &FqTable) -> HashMap<String, u16> {
    [("a", 0), ("b", 1), ("a2", 0), ("b2", 1)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), t.from_int(v)))
        .collect()
}

#[test]
fn sigma_formulas_match_matrix_traces_over_f9() {
    let t = FqTable::new(9).unwrap();
    let s = matrix_traces(&t);
    let sigma = sumset(&t, &s, &s);
    let params = split_params(&t);
    assert_eq!(set_of(&build_phi_sigma(SigmaMode::Plain), &t, &params), sigma);
    let inverse: BTreeSet<u16> = t
        .elements()
        .filter(|&x| x != 0 && sigma.contains(&t.inv(x).unwrap()))
        .collect();
    assert_eq!(set_of(&build_phi_sigma(SigmaMode::Inverse), &t, &params), inverse);
    let units: BTreeSet<u16> = inverse.intersection(&sigma).copied().collect();
    let got = set_of(&build_phi_sigma(SigmaMode::Units), &t, &params);
    assert_eq!(got, units);
    assert!(!got.contains(&0));
}

#[test]
fn sigma_over_f3_with_distinct_algebras() {
    let t = FqTable::new(3).unwrap();
    for (a, b, a2, b2) in [(0, 1, 0, 2), (1, 1, 0, 1), (1, 2, 1, 1)] {
        let p: HashMap<String, u16> = [("a", a), ("b", b), ("a2", a2), ("b2", b2)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        // brute force over coordinates of [a, b)
        let traces = |a: u16, b: u16| -> BTreeSet<u16> {
            let mut out = BTreeSet::new();
            for x1 in t.elements() {
                for x2 in t.elements() {
                    for x3 in t.elements() {
                        for x4 in t.elements() {
                            let nrd = t.sub(
                                t.sub(t.add(t.mul(x1, x1), t.mul(x1, x2)), t.mul(a, t.mul(x2, x2))),
                                t.mul(b, t.sub(t.add(t.mul(x3, x3), t.mul(x3, x4)), t.mul(a, t.mul(x4, x4)))),
                            );
                            if nrd == 1 && (x2, x3, x4) != (0, 0, 0) {
                                out.insert(t.add(t.add(x1, x1), x2));
                            }
                        }
                    }
                }
            }
            out
        };
        let expected = sumset(&t, &traces(a, b), &traces(a2, b2));
        assert_eq!(set_of(&build_phi_sigma(SigmaMode::Plain), &t, &p), expected);
    }
}

#[test]
fn j_and_h_match_set_constructions_over_small_fields() {
    for q in [3usize, 5] {
        let t = &FqTable::new(q).unwrap();
        let s = matrix_traces(t);
        let sigma = sumset(&t, &s, &s);
        let units: BTreeSet<u16> = t
            .elements()
            .filter(|&x| x != 0 && sigma.contains(&x) && sigma.contains(&t.inv(x).unwrap()))
            .collect();
        let squares: BTreeSet<u16> = t.elements().map(|y| t.mul(y, y)).collect();
        let sq_units: BTreeSet<u16> = squares
            .iter()
            .flat_map(|&s| units.iter().map(move |&u| t.mul(s, u)))
            .chain([0])
            .collect();
        let mut params = split_params(&t);
        assert_eq!(set_of(&build_square_class(), &t, &params), sq_units);
        for c in t.elements().skip(1) {
            params.insert("c".to_string(), c);
            let mut j = BTreeSet::new();
            for y in t.elements().skip(1) {
                let cy2 = t.mul(c, t.mul(y, y));
                if sq_units.contains(&t.sub(1, cy2)) {
                    j.extend(sigma.iter().map(|&s| t.mul(cy2, s)));
                }
            }
            assert_eq!(set_of(&build_j(), &t, &params), j, "J over F_{q}, c = {c}");
            let inv_c = t.inv(c).unwrap();
            let mut h: BTreeSet<u16> = [0].into();
            for &s1 in &sigma {
                for &s2 in sigma.iter().filter(|&&s| s != 0) {
                    let sum = t.add(t.mul(inv_c, s1), t.mul(c, t.inv(s2).unwrap()));
                    if let Some(x) = t.inv(sum) {
                        h.insert(x);
                    }
                }
            }
            assert_eq!(set_of(&build_h(), &t, &params), h, "H over F_{q}, c = {c}");
        }
    }
}

#[test]
fn rank_ledger_is_exact() {
    for row in rank_ledger().unwrap() {
        assert_eq!(row.actual, row.expected, "{}", row.formula);
    }
}

#[test]
fn corpus_roundtrips_through_the_printer() {
    for f in corpus() {
        let printed = f.to_string();
        let g = Formula::parse(&printed).unwrap();
        assert!(f.alpha_eq(&g), "{printed}");
    }
}

#[test]
fn transformations_preserve_semantics_on_the_corpus() {
    let formulas = corpus();
    assert!(formulas.len() >= 30);
    for q in [3usize, 5, 9] {
        let t = FqTable::new(q).unwrap();
        let sets: Vec<BTreeSet<u16>> = formulas.iter().map(|f| set_of(f, &t, &no_params())).collect();
        for (f, set) in formulas.iter().zip(&sets) {
            let d = to_diophantine(f, Ambient::Finite(q as u64)).unwrap();
            assert!(d.rank().unwrap() <= f.rank().unwrap() + 1, "{f}");
            assert_eq!(&set_of(&d, &t, &no_params()), set, "to_diophantine over F_{q}: {f}");
            let dual = dualize(f, "x").unwrap();
            assert_eq!(dual.rank().unwrap(), f.rank().unwrap() + 1);
            let expected: BTreeSet<u16> = t
                .elements()
                .filter(|&x| x == 0 || !set.contains(&t.inv(x).unwrap()))
                .collect();
            assert_eq!(set_of(&dual, &t, &no_params()), expected, "dualize over F_{q}: {f}");
        }
        for i in 0..formulas.len() {
            let j = (i * 7 + 3) % formulas.len();
            let and = combine(&formulas[i], &formulas[j], Connective::And).unwrap();
            let or = combine(&formulas[i], &formulas[j], Connective::Or).unwrap();
            let meet: BTreeSet<u16> = sets[i].intersection(&sets[j]).copied().collect();
            let join: BTreeSet<u16> = sets[i].union(&sets[j]).copied().collect();
            assert_eq!(set_of(&and, &t, &no_params()), meet);
            assert_eq!(set_of(&or, &t, &no_params()), join);
            let (ri, rj) = (formulas[i].rank().unwrap(), formulas[j].rank().unwrap());
            assert_eq!(and.rank().unwrap(), ri + rj);
            assert_eq!(or.rank().unwrap(), ri.max(rj));
        }
    }
}

#[test]
fn dualize_of_inverse_over_f3() {
    let t = FqTable::new(3).unwrap();
    let f = Formula::parse("exists y. x*y = 1").unwrap();
    let d = dualize(&f, "x").unwrap();
    assert_eq!(set_of(&d, &t, &no_params()), [0].into());
}
