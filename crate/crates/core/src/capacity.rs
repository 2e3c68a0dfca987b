//! DI capacity of constrained DMCs, the Gaussian rate bound, converse
//! counting, and empirical fits of the analysis exponents.
//!
//! The capacity of a DMC under `E[φ(X)] <= A` is the largest input entropy
//! allowed by the constraint, taken over the row-reduced alphabet. When the
//! uniform pmf is feasible it is the maximiser; otherwise the maximiser is the
//! Gibbs pmf `p(x) ∝ 2^(-λ φ(x))` with `λ` chosen so the constraint holds with
//! equality. `E_λ[φ]` is continuous and strictly decreasing in `λ`, so `λ` is
//! found by bisection.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::channel::{reduce, Dmc};
use crate::info;
use crate::types::{self, EmpiricalType, Letter, TypicalityParams};
use crate::{Error, Result};

const MAX_BISECTION_STEPS: usize = 200;
const COST_SLACK: f64 = 1e-12;

fn serialize_nonfinite<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn deserialize_nonfinite<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// Capacity and its maximiser over the reduced input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub value_bits: f64,
    /// Maximising pmf, indexed by reduced letter.
    pub maximizer: Vec<f64>,
    /// `λ` of the Gibbs form; `null` in JSON when only the cheapest letters
    /// are usable (the `λ → ∞` limit).
    #[serde(serialize_with = "serialize_nonfinite", deserialize_with = "deserialize_nonfinite")]
    pub lagrange_multiplier: f64,
    /// Whether the cost constraint is active.
    pub binding: bool,
    /// Original letter standing for each reduced letter.
    pub reduced_letters: Vec<Letter>,
    pub expected_cost: f64,
}

impl CapacityResult {
    /// Maximiser spread over the original alphabet (zero off representatives).
    pub fn maximizer_on_original(&self, input_size: usize) -> Vec<f64> {
        let mut p = vec![0.0; input_size];
        for (&x, &q) in self.reduced_letters.iter().zip(&self.maximizer) {
            p[x] = q;
        }
        p
    }
}

fn gibbs(cost: &[f64], lambda: f64) -> Vec<f64> {
    let min = cost.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = cost.iter().map(|&c| (-(lambda * (c - min))).exp2()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

fn mean_cost(p: &[f64], cost: &[f64]) -> f64 {
    p.iter().zip(cost).map(|(p, c)| p * c).sum()
}

/// Maximum entropy over pmfs on `cost.len()` letters with `E[φ] <= constraint`.
/// Returns `(pmf, λ, binding)`.
pub fn max_entropy_under_cost(cost: &[f64], constraint: f64) -> Result<(Vec<f64>, f64, bool)> {
    let k = cost.len();
    if k == 0 {
        return Err(Error::domain("empty alphabet"));
    }
    let min = cost.iter().copied().fold(f64::INFINITY, f64::min);
    if min > constraint + COST_SLACK {
        return Err(Error::Infeasible {
            min_cost: min,
            constraint,
        });
    }
    let uniform = vec![1.0 / k as f64; k];
    if mean_cost(&uniform, cost) <= constraint + COST_SLACK {
        return Ok((uniform, 0.0, false));
    }
    if constraint - min <= COST_SLACK {
        let cheap = cost.iter().filter(|&&c| c - min <= COST_SLACK).count();
        let p = cost
            .iter()
            .map(|&c| if c - min <= COST_SLACK { 1.0 / cheap as f64 } else { 0.0 })
            .collect();
        return Ok((p, f64::INFINITY, true));
    }
    let mut hi = 1.0;
    while mean_cost(&gibbs(cost, hi), cost) > constraint {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::domain("Gibbs multiplier diverged"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_cost(&gibbs(cost, mid), cost) > constraint {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // hi is always on the feasible side
    Ok((gibbs(cost, hi), hi, true))
}

/// DI capacity in bits per channel use. The channel is reduced first.
pub fn di_capacity(channel: &Dmc) -> Result<CapacityResult> {
    let (reduced, map) = reduce(channel);
    let (p, lambda, binding) = max_entropy_under_cost(reduced.cost(), reduced.constraint())?;
    let value_bits = if binding {
        info::entropy_bits(&p)
    } else {
        // uniform over the reduced alphabet
        (p.len() as f64).log2()
    };
    Ok(CapacityResult {
        value_bits,
        expected_cost: mean_cost(&p, reduced.cost()),
        maximizer: p,
        lagrange_multiplier: lambda,
        binding,
        reduced_letters: map.representative,
    })
}

/// Closed-form DI capacity of the BSC with Hamming-weight constraint `A`:
/// `H2(A)` below one half, 1 from one half on, and 0 at crossover one half.
pub fn bsc_capacity_curve(crossover: f64, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(0.0..=0.5).contains(&crossover) {
        return Err(Error::domain(format!("crossover must lie in [0, 1/2], got {crossover}")));
    }
    if let Some(a) = grid.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::domain(format!("constraint {a} outside [0, 1]")));
    }
    // rows merge within the reduction tolerance
    let useless = (1.0 - 2.0 * crossover).abs() <= crate::channel::ROW_TOLERANCE;
    Ok(grid
        .iter()
        .map(|&a| {
            let c = if useless {
                0.0
            } else if a < 0.5 {
                info::binary_entropy(a)
            } else {
                1.0
            };
            (a, c)
        })
        .collect())
}

/// `½·log2(A/ε) − 1`, the rate guaranteed by a saturated packing of radius
/// `√ε` spheres in a ball of radius `√A − √ε`.
pub fn gaussian_rate_bound(power: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < power) {
        return Err(Error::domain(format!("need 0 < epsilon < power, got epsilon={epsilon}, power={power}")));
    }
    Ok(0.5 * (power / epsilon).log2() - 1.0)
}

/// Default cap on the number of n-types visited by [`converse_count`].
pub const DEFAULT_TYPE_BUDGET: u128 = 10_000_000;

/// Exact size of the constrained input set against the counting bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverseCount {
    pub n: usize,
    #[serde(with = "biguint_string")]
    pub exact_count: BigUint,
    pub log2_count: f64,
    /// `n·(C_DI + α_n)` with `α_n = |X_r|·log2(n+1)/n`.
    pub bound_log2: f64,
    pub capacity_bits: f64,
}

mod biguint_string {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of n-types over `k` letters, `C(n+k-1, k-1)`.
pub fn number_of_types(n: usize, k: usize) -> BigUint {
    info::binomial((n + k - 1) as u64, (k - 1) as u64)
}

/// `|{x^n : φ^n(x^n) <= A}|` over the reduced alphabet, by dynamic
/// programming over letters: each state is (positions filled, partial cost)
/// and adding `c` copies of the next letter multiplies the number of
/// arrangements by `C(n - filled, c)`.
pub fn converse_count(channel: &Dmc, n: usize, type_budget: u128) -> Result<ConverseCount> {
    if n == 0 {
        return Err(Error::domain("block length must be positive"));
    }
    let (reduced, _) = reduce(channel);
    let cap = di_capacity(channel)?;
    let k = reduced.input_size();
    let types = number_of_types(n, k);
    if types > BigUint::from(type_budget) {
        return Err(Error::Budget {
            what: "n-types for converse counting",
            needed: u128::try_from(&types).unwrap_or(u128::MAX),
            budget: type_budget,
        });
    }
    let limit = n as f64 * reduced.constraint() + 1e-9 * n as f64;
    let cost = reduced.cost();

    // (filled, partial cost) -> ways, merged on identical keys
    let mut states: Vec<(usize, f64, BigUint)> = vec![(0, 0.0, BigUint::from(1u32))];
    for (a, &phi) in cost.iter().enumerate() {
        let last = a + 1 == k;
        let mut next: std::collections::HashMap<(usize, u64), (f64, BigUint)> = Default::default();
        for (filled, partial, ways) in &states {
            let left = n - filled;
            let range = if last { left..=left } else { 0..=left };
            for c in range {
                let pc = partial + c as f64 * phi;
                if pc > limit {
                    break;
                }
                let w = ways * info::binomial(left as u64, c as u64);
                let key = (filled + c, pc.to_bits());
                next.entry(key)
                    .and_modify(|e| e.1 += &w)
                    .or_insert((pc, w));
            }
        }
        let mut v: Vec<(usize, f64, BigUint)> = next
            .into_iter()
            .map(|((f, _), (pc, w))| (f, pc, w))
            .collect();
        v.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        states = v;
    }
    let exact: BigUint = states
        .into_iter()
        .filter(|s| s.0 == n)
        .map(|s| s.2)
        .sum();
    let alpha_n = k as f64 * ((n + 1) as f64).log2() / n as f64;
    Ok(ConverseCount {
        n,
        log2_count: info::log2_big(&exact),
        exact_count: exact,
        bound_log2: n as f64 * (cap.value_bits + alpha_n),
        capacity_bits: cap.value_bits,
    })
}

/// Exponents appearing in the achievability analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorExponentBounds {
    /// `H2(ε) + ε·log2|X|`.
    pub theta: f64,
    /// `½·δ²/(4(1+δ/2))·μ_XY` with `μ_XY` the smallest positive joint probability.
    pub alpha1: f64,
    /// Fitted decay rate of the conditional-set intersection ratio (nats).
    #[serde(serialize_with = "serialize_nonfinite", deserialize_with = "deserialize_nonfinite")]
    pub l_empirical: f64,
    /// `min{α1, L − δ·log2|Y|}`.
    pub alpha2: f64,
}

pub fn error_exponents(
    epsilon: f64,
    delta: f64,
    input_size: usize,
    output_size: usize,
    mu_xy: f64,
    l_empirical: f64,
) -> ErrorExponentBounds {
    let theta = types::sphere_exponent(epsilon, input_size);
    let alpha1 = 0.5 * delta * delta / (4.0 * (1.0 + delta / 2.0)) * mu_xy;
    let alpha2 = alpha1.min(l_empirical - delta * (output_size as f64).log2());
    ErrorExponentBounds {
        theta,
        alpha1,
        l_empirical,
        alpha2,
    }
}

/// Smallest positive entry of `p_X · W`.
pub fn min_joint_mass(pmf: &[f64], channel: &Dmc) -> f64 {
    pmf.iter()
        .zip(channel.matrix())
        .flat_map(|(&p, row)| row.iter().map(move |&w| p * w))
        .filter(|&q| q > 0.0)
        .fold(f64::INFINITY, f64::min)
}

/// One point of the intersection-decay fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionPoint {
    pub n: usize,
    pub distance: usize,
    pub ratio: f64,
}

/// Fitted intersection decay rate and the data behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LFit {
    pub points: Vec<IntersectionPoint>,
    /// Least-squares `L` in `ratio ≈ e^(-nL)` over points with a positive
    /// ratio; `+∞` (JSON `null`) when every ratio is zero.
    #[serde(serialize_with = "serialize_nonfinite", deserialize_with = "deserialize_nonfinite")]
    pub l: f64,
}

/// Near-uniform n-type: `n / k` of each letter, the remainder going to the
/// lowest letters.
pub fn balanced_type(n: usize, k: usize) -> EmpiricalType {
    EmpiricalType::from_counts((0..k).map(|a| n / k + usize::from(a < n % k)).collect())
}

/// Two words of the same type at the smallest distance `>= min_distance`
/// reachable by disjoint transpositions of the sorted word. Each transposition
/// swaps two different letters, so distances come in steps of two.
pub fn canonical_pair(ty: &EmpiricalType, min_distance: usize) -> Result<(Vec<Letter>, Vec<Letter>)> {
    let x1 = ty.canonical_word();
    let n = x1.len();
    let block = ty.counts().iter().copied().max().unwrap_or(0);
    let available = block.min(n - block);
    let swaps = min_distance.div_ceil(2);
    if swaps > available {
        return Err(Error::domain(format!(
            "distance {min_distance} is not reachable within type {:?}",
            ty.counts()
        )));
    }
    let mut x2 = x1.clone();
    for p in 0..swaps {
        x2.swap(p, p + block);
    }
    Ok((x1, x2))
}

/// Fit `L` from exact intersection ratios of a canonical same-type pair at
/// distance `>= ceil(nε)` for each `n` in the grid.
pub fn estimate_l(channel: &Dmc, epsilon: f64, delta: f64, n_grid: &[usize], budget: u128) -> Result<LFit> {
    if let Some((i, j)) = channel.duplicate_rows() {
        return Err(Error::DuplicateRows(i, j));
    }
    let params = TypicalityParams::new(delta)?;
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let ty = balanced_type(n, channel.input_size());
        let (x1, x2) = canonical_pair(&ty, types::distance_threshold(n, epsilon))?;
        let distance = types::hamming_distance(&x1, &x2)?;
        let ratio = types::intersection_ratio(&x1, &x2, channel.matrix(), params, budget)?;
        points.push(IntersectionPoint { n, distance, ratio });
    }
    let (mut num, mut den) = (0.0, 0.0);
    for p in points.iter().filter(|p| p.ratio > 0.0) {
        let n = p.n as f64;
        num += n * -p.ratio.ln();
        den += n * n;
    }
    let l = if den == 0.0 { f64::INFINITY } else { num / den };
    Ok(LFit { points, l })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_capacity_is_log_distinct_rows() {
        let ch = Dmc::new(
            vec![vec![0.2, 0.8], vec![0.7, 0.3], vec![0.2, 0.8], vec![1.0, 0.0]],
            vec![0.0; 4],
            0.0,
        )
        .unwrap();
        let c = di_capacity(&ch).unwrap();
        assert!((c.value_bits - 3f64.log2()).abs() < 1e-12);
        assert!(!c.binding);
        assert_eq!(c.lagrange_multiplier, 0.0);
    }

    #[test]
    fn bsc_weight_constraint_binds() {
        let c = di_capacity(&Dmc::bsc(0.1, 0.25).unwrap()).unwrap();
        assert!((c.value_bits - 0.811_278_124_459_132_8).abs() < 1e-9);
        assert!(c.binding);
        assert!(c.expected_cost <= 0.25 + 1e-9);
        assert!((c.maximizer[1] - 0.25).abs() < 1e-9);
        // Gibbs closed form: p1/p0 = 2^-λ = 1/3
        assert!((c.lagrange_multiplier - 3f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn bsc_half_has_zero_capacity() {
        assert_eq!(di_capacity(&Dmc::bsc(0.5, 1.0).unwrap()).unwrap().value_bits, 0.0);
    }

    #[test]
    fn zero_constraint_uses_free_letters_only() {
        let c = di_capacity(&Dmc::bsc(0.1, 0.0).unwrap()).unwrap();
        assert_eq!(c.value_bits, 0.0);
        assert_eq!(c.maximizer, vec![1.0, 0.0]);
        assert!(c.lagrange_multiplier.is_infinite());
        let json = serde_json::to_string(&c).unwrap();
        let back: CapacityResult = serde_json::from_str(&json).unwrap();
        assert!(back.lagrange_multiplier.is_infinite());
    }

    #[test]
    fn curve_examples() {
        let c = bsc_capacity_curve(0.1, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(c, vec![(0.0, 0.0), (0.5, 1.0), (1.0, 1.0)]);
        assert!(bsc_capacity_curve(0.5, &[0.3]).unwrap()[0].1 == 0.0);
        assert!(bsc_capacity_curve(0.7, &[0.3]).is_err());
        assert!(bsc_capacity_curve(0.1, &[1.3]).is_err());
    }

    #[test]
    fn gaussian_bound_examples() {
        assert!((gaussian_rate_bound(4.0, 1.0).unwrap()).abs() < 1e-15);
        assert!((gaussian_rate_bound(4.0, 0.01).unwrap() - (0.5 * 400f64.log2() - 1.0)).abs() < 1e-12);
        assert!((gaussian_rate_bound(4.0, 0.01).unwrap() - 3.321_928).abs() < 1e-6);
        let a = gaussian_rate_bound(3.0, 0.2).unwrap();
        let b = gaussian_rate_bound(3.0, 0.1).unwrap();
        assert!((b - a - 0.5).abs() < 1e-12);
        assert!(gaussian_rate_bound(1.0, 1.0).is_err());
    }

    #[test]
    fn converse_count_examples() {
        let full = converse_count(&Dmc::bsc(0.1, 1.0).unwrap(), 10, DEFAULT_TYPE_BUDGET).unwrap();
        assert_eq!(full.exact_count, BigUint::from(1024u32));
        assert!(10.0 <= full.bound_log2);
        let c = converse_count(&Dmc::bsc(0.1, 0.2).unwrap(), 10, DEFAULT_TYPE_BUDGET).unwrap();
        assert_eq!(c.exact_count, BigUint::from(56u32));
        assert!(c.log2_count <= c.bound_log2);
        let big = Dmc::identity(8).unwrap();
        assert!(matches!(converse_count(&big, 200, 1000), Err(Error::Budget { .. })));
    }

    #[test]
    fn estimate_l_rejects_duplicate_rows() {
        let ch = Dmc::unconstrained(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(estimate_l(&ch, 0.5, 0.1, &[6], 1 << 24), Err(Error::DuplicateRows(0, 1))));
    }

    #[test]
    fn estimate_l_noiseless_is_infinite() {
        let fit = estimate_l(&Dmc::identity(2).unwrap(), 0.5, 0.0, &[4, 6, 8], 1 << 24).unwrap();
        assert!(fit.points.iter().all(|p| p.ratio == 0.0));
        assert!(fit.l.is_infinite());
    }

    #[test]
    fn canonical_pair_distances() {
        let ty = balanced_type(10, 2);
        let (a, b) = canonical_pair(&ty, 5).unwrap();
        assert_eq!(types::hamming_distance(&a, &b).unwrap(), 6);
        assert_eq!(types::empirical_type(&b, 2).unwrap(), ty);
        let ty3 = balanced_type(7, 3);
        assert_eq!(ty3.counts(), &[3, 2, 2]);
        let (a, b) = canonical_pair(&ty3, 4).unwrap();
        assert_eq!(types::hamming_distance(&a, &b).unwrap(), 4);
        assert!(canonical_pair(&ty, 11).is_err());
    }

    #[test]
    fn exponents() {
        let e = error_exponents(0.1, 0.03, 2, 2, 0.05, f64::INFINITY);
        assert!(e.theta > 0.0);
        assert_eq!(e.alpha2, e.alpha1);
        let e2 = error_exponents(0.1, 0.03, 2, 2, 0.05, 0.0);
        assert!(e2.alpha2 <= e2.alpha1);
    }
}
