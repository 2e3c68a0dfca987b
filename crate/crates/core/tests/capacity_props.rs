//! Capacity solver, reduction and converse counting.

use di_codes::capacity::{
    converse_count, di_capacity, error_exponents, estimate_l, gaussian_rate_bound, max_entropy_under_cost,
    number_of_types, DEFAULT_TYPE_BUDGET,
};
use di_codes::channel::{reduce, Dmc};
use di_codes::info::entropy_bits;
use num_bigint::BigUint;
use proptest::prelude::*;

fn mean(p: &[f64], c: &[f64]) -> f64 {
    p.iter().zip(c).map(|(a, b)| a * b).sum()
}

fn costs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..5.0, 2..7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// No feasible pmf beats the solver: compare with random feasible mixtures
    /// and with the Gibbs stationarity condition.
    #[test]
    fn maximizer_is_optimal(cost in costs(), t in 0.0f64..1.0, probes in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 6), 20)) {
        let min = cost.iter().copied().fold(f64::INFINITY, f64::min);
        let max = cost.iter().copied().fold(0.0, f64::max);
        let a = min + t * (max - min);
        let (p, lambda, binding) = max_entropy_under_cost(&cost, a).unwrap();
        let h = entropy_bits(&p);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(mean(&p, &cost) <= a + 1e-9);
        for w in probes {
            let w = &w[..cost.len()];
            let s: f64 = w.iter().sum();
            if s <= 0.0 { continue; }
            let q: Vec<f64> = w.iter().map(|v| v / s).collect();
            // pull q toward the cheapest letters until it is feasible
            let cheapest = cost.iter().position(|&c| c == min).unwrap();
            let mut mix = q.clone();
            let mut theta = 1.0;
            while mean(&mix, &cost) > a && theta > 1e-6 {
                theta *= 0.5;
                mix = q.iter().enumerate().map(|(i, &v)| theta * v + if i == cheapest { 1.0 - theta } else { 0.0 }).collect();
            }
            if mean(&mix, &cost) <= a {
                prop_assert!(entropy_bits(&mix) <= h + 1e-9);
            }
        }
        if binding && lambda.is_finite() {
            // log p_x + λ φ_x is constant on the support
            let k: Vec<f64> = p.iter().zip(&cost).map(|(pi, c)| pi.log2() + lambda * c).collect();
            for v in &k {
                prop_assert!((v - k[0]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn scaling_costs_leaves_capacity_and_scales_lambda(cost in costs(), t in 0.05f64..0.95, c in 0.1f64..10.0) {
        let min = cost.iter().copied().fold(f64::INFINITY, f64::min);
        let max = cost.iter().copied().fold(0.0, f64::max);
        prop_assume!(max - min > 1e-3);
        let a = min + t * (max - min);
        let (p1, l1, _) = max_entropy_under_cost(&cost, a).unwrap();
        let scaled: Vec<f64> = cost.iter().map(|v| v * c).collect();
        let (p2, l2, _) = max_entropy_under_cost(&scaled, a * c).unwrap();
        prop_assert!((entropy_bits(&p1) - entropy_bits(&p2)).abs() < 1e-8);
        if l1.is_finite() && l1 > 0.0 {
            prop_assert!((l2 * c - l1).abs() <= 1e-6 * l1.max(1.0));
        }
    }

    #[test]
    fn capacity_is_monotone_in_the_constraint(cost in costs(), t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        let min = cost.iter().copied().fold(f64::INFINITY, f64::min);
        let max = cost.iter().copied().fold(0.0, f64::max);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let (p_lo, _, _) = max_entropy_under_cost(&cost, min + lo * (max - min)).unwrap();
        let (p_hi, _, _) = max_entropy_under_cost(&cost, min + hi * (max - min)).unwrap();
        prop_assert!(entropy_bits(&p_lo) <= entropy_bits(&p_hi) + 1e-9);
    }

    #[test]
    fn capacity_is_invariant_under_reduction(
        rows in prop::collection::vec(0usize..3, 2..7),
        cost in prop::collection::vec(0.0f64..3.0, 6),
        t in 0.0f64..1.0,
    ) {
        let base = [vec![0.7, 0.3], vec![0.2, 0.8], vec![0.5, 0.5]];
        let matrix: Vec<Vec<f64>> = rows.iter().map(|&r| base[r].clone()).collect();
        let cost = cost[..matrix.len()].to_vec();
        let min = cost.iter().copied().fold(f64::INFINITY, f64::min);
        let max = cost.iter().copied().fold(0.0, f64::max);
        let ch = Dmc::new(matrix, cost, min + t * (max - min)).unwrap();
        let (reduced, map) = reduce(&ch);
        prop_assert_eq!(reduced.duplicate_rows(), None);
        let c1 = di_capacity(&ch).unwrap().value_bits;
        let c2 = di_capacity(&reduced).unwrap().value_bits;
        prop_assert!((c1 - c2).abs() < 1e-12);
        let (again, _) = reduce(&reduced);
        prop_assert_eq!(again.matrix(), reduced.matrix());
        prop_assert_eq!(again.cost(), reduced.cost());
        for (cls, &rep) in map.representative.iter().enumerate() {
            prop_assert_eq!(map.class_of[rep], cls);
            prop_assert_eq!(reduced.cost()[cls], ch.cost()[rep]);
        }
    }
}

/// Count words over a 3-letter alphabet with total cost `<= nA` by brute force.
fn brute_count(cost: &[f64], n: usize, a: f64) -> usize {
    let k = cost.len();
    let total = k.pow(n as u32);
    (0..total)
        .filter(|&mut_idx| {
            let mut idx = mut_idx;
            let mut c = 0.0;
            for _ in 0..n {
                c += cost[idx % k];
                idx /= k;
            }
            c <= n as f64 * a + 1e-9 * n as f64
        })
        .count()
}

#[test]
fn converse_count_matches_brute_force_and_type_sum() {
    let ch = Dmc::new(
        vec![vec![0.9, 0.1], vec![0.4, 0.6], vec![0.1, 0.9]],
        vec![0.0, 1.0, 2.5],
        0.8,
    )
    .unwrap();
    for n in 1..=9 {
        let cc = converse_count(&ch, n, DEFAULT_TYPE_BUDGET).unwrap();
        assert_eq!(cc.exact_count, BigUint::from(brute_count(ch.cost(), n, 0.8)), "n = {n}");
        // sum of multinomials over feasible types
        let mut by_types = BigUint::from(0u32);
        for a in 0..=n {
            for b in 0..=n - a {
                let c = n - a - b;
                if b as f64 + 2.5 * c as f64 <= 0.8 * n as f64 + 1e-9 * n as f64 {
                    by_types += di_codes::info::multinomial(&[a, b, c]);
                }
            }
        }
        assert_eq!(cc.exact_count, by_types);
        assert!(cc.log2_count <= cc.bound_log2);
    }
}

#[test]
fn converse_counts_reduced_alphabet() {
    // rows 0 and 2 coincide; the count is over two reduced letters
    let ch = Dmc::new(vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.9, 0.1]], vec![0.0, 1.0, 0.0], 1.0).unwrap();
    let cc = converse_count(&ch, 10, DEFAULT_TYPE_BUDGET).unwrap();
    assert_eq!(cc.exact_count, BigUint::from(1024u32));
    assert_eq!(cc.capacity_bits, 1.0);
}

#[test]
fn type_budget_is_enforced() {
    let ch = Dmc::unconstrained((0..8).map(|a| (0..8).map(|b| if a == b { 0.9 } else { 0.1 / 7.0 }).collect()).collect()).unwrap();
    assert_eq!(number_of_types(3, 2), BigUint::from(4u32));
    assert!(matches!(converse_count(&ch, 200, 1000), Err(di_codes::Error::Budget { .. })));
}

#[test]
fn gaussian_rate_bound_values() {
    assert!((gaussian_rate_bound(4.0, 1.0).unwrap() - 0.0).abs() < 1e-12);
    assert!((gaussian_rate_bound(1.0, 0.01).unwrap() - (0.5 * 100f64.log2() - 1.0)).abs() < 1e-12);
    assert!(gaussian_rate_bound(1.0, 1.0).is_err());
    // halving ε adds half a bit
    let a = gaussian_rate_bound(1.0, 0.02).unwrap();
    let b = gaussian_rate_bound(1.0, 0.01).unwrap();
    assert!((b - a - 0.5).abs() < 1e-12);
}

#[test]
fn exponents_are_ordered() {
    let e = error_exponents(0.1, 0.05, 2, 2, 0.05, 0.3);
    assert!(e.alpha2 <= e.alpha1);
    assert!(e.alpha1 > 0.0);
}

#[test]
fn l_fit_requires_distinct_rows() {
    let ch = Dmc::unconstrained(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
    assert!(matches!(
        estimate_l(&ch, 0.5, 0.1, &[6], 1 << 20),
        Err(di_codes::Error::DuplicateRows(0, 1))
    ));
}
