//! Method-of-types invariants against brute-force enumeration.

use di_codes::types::{
    self, empirical_type, enumerate_conditional_typical, hamming_distance, hamming_sphere_size_bound,
    hamming_sphere_size_exact, induced_joint_pmf, intersection_ratio, is_jointly_typical, EmpiricalType,
    TypicalityParams,
};
use num_bigint::BigUint;
use proptest::prelude::*;

/// All words of length `n` over `k` letters, lexicographic.
fn all_words(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut w = vec![0; n];
    loop {
        out.push(w.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            w[i] += 1;
            if w[i] < k {
                break;
            }
            w[i] = 0;
        }
    }
}

/// Independent strong-typicality test written from the definition.
fn typical_by_definition(x: &[usize], y: &[usize], q: &[Vec<f64>], delta: f64) -> bool {
    let n = x.len() as f64;
    for (a, row) in q.iter().enumerate() {
        for (b, &qab) in row.iter().enumerate() {
            let count = x.iter().zip(y).filter(|&(&s, &t)| s == a && t == b).count() as f64;
            if qab == 0.0 && count > 0.0 {
                return false;
            }
            if (count / n - qab).abs() > delta + 1e-9 / n {
                return false;
            }
        }
    }
    true
}

fn stochastic_row(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, k).prop_map(|w| {
        let w: Vec<f64> = w.into_iter().map(|v| v + 0.05).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    })
}

fn channel(k: usize, m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(stochastic_row(m), k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hamming_triangle_inequality(
        (a, b, c) in (1usize..30).prop_flat_map(|n| (
            prop::collection::vec(0usize..3, n),
            prop::collection::vec(0usize..3, n),
            prop::collection::vec(0usize..3, n),
        ))
    ) {
        let ab = hamming_distance(&a, &b).unwrap();
        let bc = hamming_distance(&b, &c).unwrap();
        let ac = hamming_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc);
        prop_assert_eq!(ab, hamming_distance(&b, &a).unwrap());
        for t in 0..=a.len() + 1 {
            prop_assert_eq!(types::hamming_at_least(&a, &b, t), ab >= t);
        }
    }

    #[test]
    fn typicality_is_monotone_in_delta(
        x in prop::collection::vec(0usize..2, 12),
        y in prop::collection::vec(0usize..3, 12),
        w in channel(2, 3),
        d1 in 0.0f64..0.3,
        extra in 0.0f64..0.3,
    ) {
        let joint = induced_joint_pmf(&empirical_type(&x, 2).unwrap(), &w);
        let p1 = TypicalityParams::new(d1).unwrap();
        let p2 = TypicalityParams::new(d1 + extra).unwrap();
        if is_jointly_typical(&x, &y, &joint, p1).unwrap() {
            prop_assert!(is_jointly_typical(&x, &y, &joint, p2).unwrap());
        }
        prop_assert_eq!(
            is_jointly_typical(&x, &y, &joint, p1).unwrap(),
            typical_by_definition(&x, &y, &joint, d1)
        );
    }

    #[test]
    fn class_size_matches_enumeration(counts in prop::collection::vec(0usize..4, 1..4)) {
        let n: usize = counts.iter().sum();
        prop_assume!(n <= 9);
        let k = counts.len();
        let ty = EmpiricalType::from_counts(counts.clone());
        let brute = all_words(n, k)
            .into_iter()
            .filter(|w| empirical_type(w, k).unwrap().counts() == counts.as_slice())
            .count();
        prop_assert_eq!(ty.class_size(), BigUint::from(brute));
        let canon = empirical_type(&ty.canonical_word(), k).unwrap();
        prop_assert_eq!(canon.counts(), counts.as_slice());
    }

    #[test]
    fn conditional_typical_set_matches_brute_force(
        x in prop::collection::vec(0usize..2, 1..9),
        w in channel(2, 2),
        delta in 0.0f64..0.4,
    ) {
        let params = TypicalityParams::new(delta).unwrap();
        let got = enumerate_conditional_typical(&x, &w, params, 1 << 20).unwrap();
        let joint = induced_joint_pmf(&empirical_type(&x, 2).unwrap(), &w);
        let want: Vec<Vec<usize>> = all_words(x.len(), 2)
            .into_iter()
            .filter(|y| typical_by_definition(&x, y, &joint, delta))
            .collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn sphere_size_against_enumeration(n in 1usize..10, k in 2usize..4, eps in 0.0f64..1.0) {
        prop_assume!((k as f64).powi(n as i32) <= 20_000.0);
        let radius = types::distance_threshold(n, eps).max(1);
        let origin = vec![0; n];
        let brute = all_words(n, k)
            .into_iter()
            .filter(|w| hamming_distance(&origin, w).unwrap() < radius)
            .count();
        let exact = hamming_sphere_size_exact(n, eps, k);
        prop_assert_eq!(exact.clone(), BigUint::from(brute));
        let bound = hamming_sphere_size_bound(n, eps, k).unwrap();
        prop_assert!(di_codes::info::log2_big(&exact) <= bound + 1e-9);
    }
}

/// Intersection ratio from scratch: enumerate every output word.
fn ratio_by_enumeration(x1: &[usize], x2: &[usize], w: &[Vec<f64>], delta: f64) -> f64 {
    let joint = induced_joint_pmf(&empirical_type(x1, w.len()).unwrap(), w);
    let mut g1 = 0usize;
    let mut both = 0usize;
    for y in all_words(x1.len(), w[0].len()) {
        if typical_by_definition(x1, &y, &joint, delta) {
            g1 += 1;
            if typical_by_definition(x2, &y, &joint, delta) {
                both += 1;
            }
        }
    }
    both as f64 / g1 as f64
}

#[test]
fn intersection_ratios_match_enumeration() {
    let w = vec![vec![0.9, 0.1], vec![0.1, 0.9]];
    let params = TypicalityParams::new(0.15).unwrap();
    for n in [6usize, 8, 10, 12] {
        let ty = di_codes::capacity::balanced_type(n, 2);
        let (x1, x2) = di_codes::capacity::canonical_pair(&ty, types::distance_threshold(n, 0.5)).unwrap();
        let fast = intersection_ratio(&x1, &x2, &w, params, 1 << 20).unwrap();
        let slow = ratio_by_enumeration(&x1, &x2, &w, 0.15);
        assert_eq!(fast, slow, "n = {n}");
    }
}

#[test]
fn intersection_ratio_sequence_at_small_n() {
    // Same-type binary words sit at even distances, so ceil(n/2) rounds up to
    // 4, 4, 6, 6 and the ratio is not monotone over this grid.
    let w = vec![vec![0.9, 0.1], vec![0.1, 0.9]];
    let params = TypicalityParams::new(0.15).unwrap();
    let ratios: Vec<f64> = [6usize, 8, 10, 12]
        .iter()
        .map(|&n| {
            let ty = di_codes::capacity::balanced_type(n, 2);
            let (x1, x2) = di_codes::capacity::canonical_pair(&ty, types::distance_threshold(n, 0.5)).unwrap();
            intersection_ratio(&x1, &x2, &w, params, 1 << 20).unwrap()
        })
        .collect();
    assert_eq!(ratios[0], 0.25);
    assert_eq!(ratios[1], 0.16);
    assert!(ratios[3] < ratios[2]);
    assert!(ratios[2] > ratios[1]);
}

#[test]
fn identical_words_have_ratio_one() {
    let w = vec![vec![0.8, 0.2], vec![0.3, 0.7]];
    let x = vec![0, 1, 0, 1, 1, 0];
    let p = TypicalityParams::new(0.2).unwrap();
    assert_eq!(intersection_ratio(&x, &x, &w, p, 1 << 20).unwrap(), 1.0);
}

#[test]
fn enumeration_budget_is_enforced() {
    let w = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
    let x = vec![0; 30];
    let p = TypicalityParams::new(0.1).unwrap();
    assert!(matches!(
        enumerate_conditional_typical(&x, &w, p, 1 << 20),
        Err(di_codes::Error::Budget { .. })
    ));
}
