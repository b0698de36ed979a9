mod common;

use std::collections::HashSet;

use permtri::construct::{default_grid, enumerate_triples, SparsePoly};
use permtri::field::{make_field, FieldElement, FieldSpec};
use permtri::numtheory::{divisors, gcd};
use permtri::verify::{
    binomial_criterion, niho_subgroup_form, permutes_exhaustive, permutes_exhaustive_poly,
    permutes_expsum, permutes_via_subgroup, verify_with, BinomialPath, ExpsumSystem, Method,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Image-set size, independent of the bitmap verifier.
fn bijective_by_image_set<F: Fn(FieldElement) -> FieldElement>(field: &FieldSpec, f: F) -> bool {
    field.elements().map(f).collect::<HashSet<_>>().len() as u64 == field.order()
}

#[test]
fn three_verifiers_agree_on_niho_trinomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in 2..=5 {
        let field = make_field(m).unwrap();
        let (i, j, u) = default_grid(m);
        let mut polys: Vec<SparsePoly> = enumerate_triples(m, i, j, u)
            .triples
            .iter()
            .map(|t| t.as_polynomial().to_sparse())
            .collect();
        polys.extend((0..200).map(|_| {
            let d = common::random_niho_trinomial(&mut rng, m);
            SparsePoly::new(&field, &d.map(i128::from)).unwrap()
        }));
        for p in &polys {
            let ex = verify_with(Method::Exhaustive, &field, p).unwrap().verdict;
            let sub = verify_with(Method::Subgroup, &field, p).unwrap().verdict;
            assert_eq!(ex, sub, "m={m} {:?}", p.exponents());
            let es = verify_with(Method::Expsum, &field, p).unwrap().verdict;
            assert_eq!(ex, es, "m={m} {:?}", p.exponents());
        }
    }
}

#[test]
fn solution_counts_match_walsh_sums() {
    // Σ_x (-1)^Tr(δ^{d1} f(x)) = (N(δ) - 1) 2^m for every δ ≠ 0
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in [2u32, 3] {
        let field = make_field(m).unwrap();
        let q_minus_1 = field.group_order();
        for _ in 0..10 {
            let mut d = common::random_applicable_niho(&mut rng, m);
            let lead = d.iter().position(|&x| gcd(x, q_minus_1) == 1).unwrap();
            d.swap(0, lead);
            let system = ExpsumSystem::new(&field, &d).unwrap();
            let f = |x| {
                d.iter().fold(FieldElement::ZERO, |acc, &e| {
                    field.add(acc, field.pow_residue(x, e))
                })
            };
            for delta in field.elements().skip(1) {
                let b = field.pow_residue(delta, d[0]);
                let walsh: i64 = field
                    .elements()
                    .map(|x| {
                        if field.trace(field.mul(b, f(x))) == 0 {
                            1
                        } else {
                            -1
                        }
                    })
                    .sum();
                let n = system.count(delta) as i64;
                assert_eq!(walsh, (n - 1) << m, "m={m} d={d:?} δ={delta}");
            }
            assert_eq!(system.count(FieldElement::ZERO), 1);
        }
    }
}

#[test]
fn direct_counts_match_walsh_sums() {
    // no unit exponent: Σ_x (-1)^Tr(b f(x)) = (N(b) - 1) 2^m for every b ≠ 0
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let field = make_field(5).unwrap();
    let q_minus_1 = field.group_order();
    let mut seen = 0;
    while seen < 3 {
        let d = common::random_niho_trinomial(&mut rng, 5);
        if d.iter().any(|&e| gcd(e, q_minus_1) == 1) {
            continue;
        }
        let Ok(system) = ExpsumSystem::new(&field, &d) else {
            continue;
        };
        seen += 1;
        let f = |x| {
            d.iter().fold(FieldElement::ZERO, |acc, &e| {
                field.add(acc, field.pow_residue(x, e))
            })
        };
        let values: Vec<_> = field.elements().map(f).collect();
        for b in field.elements().skip(1).step_by(7) {
            let walsh: i64 = values
                .iter()
                .map(|&v| {
                    if field.trace(field.mul(b, v)) == 0 {
                        1
                    } else {
                        -1
                    }
                })
                .sum();
            assert_eq!(walsh, (system.count(b) as i64 - 1) << 5, "d={d:?} b={b}");
        }
    }
}

#[test]
fn exhaustive_matches_image_set_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in 1..=4 {
        let field = make_field(m).unwrap();
        for _ in 0..50 {
            let d: [i128; 3] = [(); 3].map(|_| rng.random_range(1..field.group_order()) as i128);
            let p = SparsePoly::new(&field, &d).unwrap();
            assert_eq!(
                permutes_exhaustive_poly(&field, &p).unwrap().verdict,
                bijective_by_image_set(&field, |x| p.eval(&field, x))
            );
        }
    }
}

#[test]
fn frobenius_twist_preserves_verdict() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in 1..=5 {
        let field = make_field(m).unwrap();
        let q_minus_1 = field.group_order();
        for _ in 0..50 {
            let d: Vec<u64> = (0..3).map(|_| rng.random_range(1..q_minus_1)).collect();
            let twisted: Vec<i128> = d.iter().map(|&e| i128::from(2 * e % q_minus_1)).collect();
            let p = SparsePoly::new(
                &field,
                &d.iter().map(|&e| i128::from(e)).collect::<Vec<_>>(),
            )
            .unwrap();
            let p2 = SparsePoly::new(&field, &twisted).unwrap();
            assert_eq!(
                permutes_exhaustive_poly(&field, &p).unwrap().verdict,
                permutes_exhaustive_poly(&field, &p2).unwrap().verdict,
                "m={m} {d:?}"
            );
        }
    }
}

#[test]
fn monomial_law() {
    for m in 1..=6 {
        let field = make_field(m).unwrap();
        let q_minus_1 = field.group_order();
        for d in 1..q_minus_1 {
            let v = permutes_exhaustive(&field, |x| field.pow_residue(x, d))
                .unwrap()
                .verdict;
            assert_eq!(v, gcd(d, q_minus_1) == 1, "n={} d={d}", 2 * m);
        }
    }
}

#[test]
fn binomial_criterion_agrees_with_image_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for m in 1..=6 {
        let field = make_field(m).unwrap();
        let q_minus_1 = field.group_order();
        let ds = divisors(q_minus_1);
        for _ in 0..40 {
            let d = ds[rng.random_range(0..ds.len())];
            let r = rng.random_range(1..q_minus_1);
            let a = FieldElement(rng.random_range(1..field.order()) as u32);
            let rep = binomial_criterion(&field, r, d, a).unwrap();
            assert!(matches!(rep.path, BinomialPath::ExhaustiveFallback { .. }));
            let s = q_minus_1 / d;
            let oracle = bijective_by_image_set(&field, |x| {
                field.mul(
                    field.pow_residue(x, r),
                    field.add(field.pow_residue(x, s), a),
                )
            });
            assert_eq!(rep.report.verdict, oracle, "n={} r={r} d={d} a={a}", 2 * m);
        }
    }
}

#[test]
fn subgroup_form_round_trips_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for m in 2..=4 {
        let field = make_field(m).unwrap();
        let s = i128::from(field.subfield_group_order());
        for _ in 0..20 {
            let d = common::random_niho_trinomial(&mut rng, m);
            let (r, h) = niho_subgroup_form(&field, &d).unwrap();
            for x in field.elements() {
                let direct = d.iter().fold(FieldElement::ZERO, |acc, &e| {
                    field.add(acc, field.pow_residue(x, e))
                });
                let y = field.pow(x, s).unwrap_or(FieldElement::ZERO);
                let hy = h.iter().fold(FieldElement::ZERO, |acc, &e| {
                    field.add(acc, field.pow(y, e).unwrap_or(FieldElement::ONE))
                });
                let via = if x.is_zero() {
                    FieldElement::ZERO
                } else {
                    field.mul(field.pow(x, r).unwrap(), hy)
                };
                assert_eq!(direct, via);
            }
            let _ = permutes_via_subgroup(&field, r, &h, field.circle_order()).unwrap();
        }
    }
}

#[test]
fn expsum_examples_against_oracle() {
    let f = make_field(2).unwrap();
    let p = SparsePoly::new(&f, &[4, 13, 7]).unwrap();
    assert_eq!(
        permutes_expsum(&f, &[4, 13, 7]).unwrap().verdict,
        bijective_by_image_set(&f, |x| p.eval(&f, x))
    );
}
