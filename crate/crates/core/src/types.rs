//! Method of types: empirical and joint types, strong typicality, Hamming
//! geometry, and exact enumeration of conditional typical sets for small n.
//!
//! Typicality is the strong, additive-slack kind: a pair `(x, y)` is
//! δ-typical for a joint pmf `q` when every joint frequency is within δ of
//! `q(a, b)` and pairs outside the support of `q` never occur. Comparisons are
//! made on the count scale, `|N(a,b) - q(a,b)·n| <= δ·n`, so that exact ties
//! between an integer count and a decimal threshold resolve as "typical".

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::info;
use crate::{Error, Result};

/// Index of a channel input or output symbol.
pub type Letter = usize;

/// Default cap on `|Y|^n` for exact enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 24;

/// Absolute slack on the count scale. Integer counts are at least 1 apart,
/// so this only changes the outcome of exact ties.
const TIE_SLACK: f64 = 1e-9;

/// Occurrence counts of each letter in a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmpiricalType {
    counts: Vec<usize>,
    n: usize,
}

impl EmpiricalType {
    pub fn from_counts(counts: Vec<usize>) -> Self {
        let n = counts.iter().sum();
        EmpiricalType { counts, n }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// Induced pmf `counts / n`. All zeros when `n == 0`.
    pub fn pmf(&self) -> Vec<f64> {
        if self.n == 0 {
            return vec![0.0; self.counts.len()];
        }
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn entropy_bits(&self) -> f64 {
        info::entropy_of_counts(&self.counts)
    }

    /// Number of sequences with this type, `n! / prod(counts!)`.
    pub fn class_size(&self) -> BigUint {
        info::multinomial(&self.counts)
    }

    /// The lexicographically smallest sequence of this type.
    pub fn canonical_word(&self) -> Vec<Letter> {
        let mut w = Vec::with_capacity(self.n);
        for (a, &c) in self.counts.iter().enumerate() {
            w.extend(std::iter::repeat_n(a, c));
        }
        w
    }
}

/// Occurrence counts of each (input, output) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointType {
    counts: Vec<Vec<usize>>,
    n: usize,
}

impl JointType {
    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Type of the input sequence.
    pub fn input_marginal(&self) -> EmpiricalType {
        EmpiricalType::from_counts(self.counts.iter().map(|r| r.iter().sum()).collect())
    }

    /// Conditional type `N(a,b) / N(a)`; rows with `N(a) = 0` are all zeros.
    pub fn conditional(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let na: usize = row.iter().sum();
                row.iter()
                    .map(|&c| if na == 0 { 0.0 } else { c as f64 / na as f64 })
                    .collect()
            })
            .collect()
    }
}

/// Slack of the δ-typical sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalityParams {
    delta: f64,
}

impl TypicalityParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::domain(format!("delta must be finite and >= 0, got {delta}")));
        }
        Ok(TypicalityParams { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

fn check_letters(seq: &[Letter], size: usize) -> Result<()> {
    if let Some((t, &a)) = seq.iter().enumerate().find(|(_, &a)| a >= size) {
        return Err(Error::domain(format!(
            "letter {a} at position {t} is outside an alphabet of size {size}"
        )));
    }
    Ok(())
}

pub fn empirical_type(sequence: &[Letter], alphabet_size: usize) -> Result<EmpiricalType> {
    check_letters(sequence, alphabet_size)?;
    let mut counts = vec![0usize; alphabet_size];
    for &a in sequence {
        counts[a] += 1;
    }
    Ok(EmpiricalType {
        counts,
        n: sequence.len(),
    })
}

pub fn joint_type(
    x: &[Letter],
    y: &[Letter],
    input_size: usize,
    output_size: usize,
) -> Result<JointType> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "sequence lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    check_letters(x, input_size)?;
    check_letters(y, output_size)?;
    let mut counts = vec![vec![0usize; output_size]; input_size];
    for (&a, &b) in x.iter().zip(y) {
        counts[a][b] += 1;
    }
    Ok(JointType { counts, n: x.len() })
}

pub fn hamming_distance(a: &[Letter], b: &[Letter]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::domain(format!(
            "hamming distance needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// `d_H(a, b) >= threshold`, stopping as soon as the answer is known.
/// Both slices must have equal length.
pub fn hamming_at_least(a: &[Letter], b: &[Letter], threshold: usize) -> bool {
    debug_assert_eq!(a.len(), b.len());
    if threshold == 0 {
        return true;
    }
    let mut d = 0;
    for (x, y) in a.iter().zip(b) {
        if x != y {
            d += 1;
            if d >= threshold {
                return true;
            }
        }
    }
    false
}

/// Minimum separation `ceil(n·ε)` required between kept codewords.
pub fn distance_threshold(n: usize, epsilon: f64) -> usize {
    // nudge so that e.g. 100 * 0.1 = 10.000000000000002 rounds to 10
    (n as f64 * epsilon - 1e-9).ceil().max(0.0) as usize
}

/// `θ(ε) = H2(ε) + ε·log2|X|`, the exponent of the Hamming-sphere volume bound.
pub fn sphere_exponent(epsilon: f64, alphabet_size: usize) -> f64 {
    info::binary_entropy(epsilon) + epsilon * (alphabet_size as f64).log2()
}

/// `log2( C(n, floor(nε)) · |X|^floor(nε) )`, an upper bound on the number of
/// words within Hamming distance `< nε` of a fixed word.
pub fn hamming_sphere_size_bound(n: usize, epsilon: f64, alphabet_size: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::domain(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    if n == 0 || alphabet_size == 0 {
        return Err(Error::domain("n and alphabet size must be positive"));
    }
    let k = ((n as f64 * epsilon + 1e-9).floor() as u64).min(n as u64);
    Ok(info::log2_binomial(n as u64, k) + k as f64 * (alphabet_size as f64).log2())
}

/// Exact size of the open Hamming sphere `{x : d_H(x, c) < nε}`. A zero
/// radius degenerates to the centre alone.
pub fn hamming_sphere_size_exact(n: usize, epsilon: f64, alphabet_size: usize) -> BigUint {
    let radius = distance_threshold(n, epsilon).max(1);
    let mut total = BigUint::ZERO;
    let mut pow = BigUint::one();
    for d in 0..radius.min(n + 1) {
        total += info::binomial(n as u64, d as u64) * &pow;
        pow *= alphabet_size.saturating_sub(1);
    }
    total
}

#[inline]
fn entry_typical(count: usize, q: f64, n: f64, delta: f64) -> bool {
    if q == 0.0 {
        count == 0
    } else {
        (count as f64 - q * n).abs() <= delta * n + TIE_SLACK
    }
}

/// Is a joint count table δ-typical for `joint_pmf`?
pub fn joint_counts_typical(counts: &[Vec<usize>], n: usize, joint_pmf: &[Vec<f64>], delta: f64) -> bool {
    let nf = n as f64;
    counts.iter().zip(joint_pmf).all(|(crow, qrow)| {
        crow.iter()
            .zip(qrow)
            .all(|(&c, &q)| entry_typical(c, q, nf, delta))
    })
}

fn check_joint_pmf(joint_pmf: &[Vec<f64>]) -> Result<(usize, usize)> {
    let rows = joint_pmf.len();
    let cols = joint_pmf.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || joint_pmf.iter().any(|r| r.len() != cols) {
        return Err(Error::domain("joint pmf must be a non-empty rectangular matrix"));
    }
    if joint_pmf.iter().flatten().any(|&q| !(q >= 0.0)) {
        return Err(Error::domain("joint pmf has a negative or NaN entry"));
    }
    let total: f64 = joint_pmf.iter().flatten().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("joint pmf sums to {total}, not 1")));
    }
    Ok((rows, cols))
}

pub fn is_jointly_typical(
    x: &[Letter],
    y: &[Letter],
    joint_pmf: &[Vec<f64>],
    params: TypicalityParams,
) -> Result<bool> {
    let (rows, cols) = check_joint_pmf(joint_pmf)?;
    let jt = joint_type(x, y, rows, cols)?;
    Ok(joint_counts_typical(&jt.counts, jt.n, joint_pmf, params.delta))
}

/// `p_X(a) · W(b|a)` with `p_X` the type of `x`.
pub fn induced_joint_pmf(ty: &EmpiricalType, channel_matrix: &[Vec<f64>]) -> Vec<Vec<f64>> {
    ty.pmf()
        .iter()
        .zip(channel_matrix)
        .map(|(&p, row)| row.iter().map(|&w| p * w).collect())
        .collect()
}

fn check_matrix(channel_matrix: &[Vec<f64>]) -> Result<usize> {
    let cols = channel_matrix.first().map_or(0, Vec::len);
    if cols == 0 || channel_matrix.iter().any(|r| r.len() != cols) {
        return Err(Error::domain("channel matrix must be non-empty and rectangular"));
    }
    Ok(cols)
}

fn check_budget(output_size: usize, n: usize, budget: u128) -> Result<()> {
    let needed = (output_size as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget {
            what: "conditional typical set enumeration (|Y|^n sequences)",
            needed,
            budget,
        });
    }
    Ok(())
}

/// All output count vectors for one input letter that keep every joint entry
/// of that row typical.
fn admissible_rows(n_a: usize, qrow: &[f64], n: usize, delta: f64) -> Vec<Vec<usize>> {
    let nf = n as f64;
    let mut out = Vec::new();
    let mut cur = vec![0usize; qrow.len()];
    fn rec(
        b: usize,
        left: usize,
        cur: &mut Vec<usize>,
        qrow: &[f64],
        nf: f64,
        delta: f64,
        out: &mut Vec<Vec<usize>>,
    ) {
        if b + 1 == qrow.len() {
            cur[b] = left;
            if entry_typical(left, qrow[b], nf, delta) {
                out.push(cur.clone());
            }
            return;
        }
        for c in 0..=left {
            if entry_typical(c, qrow[b], nf, delta) {
                cur[b] = c;
                rec(b + 1, left - c, cur, qrow, nf, delta, out);
            }
        }
    }
    rec(0, n_a, &mut cur, qrow, nf, delta, &mut out);
    out
}

/// Next lexicographic permutation of a multiset; false when wrapped.
fn next_permutation(v: &mut [Letter]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Every `y` such that `(x, y)` is δ-typical for `p_X·W`, with `p_X` the type
/// of `x`. The result is sorted lexicographically.
///
/// Typicality of a joint type factors over input letters, so the set is a
/// product over the positions of each input letter of all arrangements with an
/// admissible conditional count vector.
pub fn enumerate_conditional_typical(
    x: &[Letter],
    channel_matrix: &[Vec<f64>],
    params: TypicalityParams,
    budget: u128,
) -> Result<Vec<Vec<Letter>>> {
    let output_size = check_matrix(channel_matrix)?;
    let n = x.len();
    check_budget(output_size, n, budget)?;
    let ty = empirical_type(x, channel_matrix.len())?;
    let joint = induced_joint_pmf(&ty, channel_matrix);

    // per input letter: its positions and the admissible local output words
    let mut blocks: Vec<(Vec<usize>, Vec<Vec<Letter>>)> = Vec::new();
    for (a, &na) in ty.counts().iter().enumerate() {
        if na == 0 {
            continue;
        }
        let positions: Vec<usize> = (0..n).filter(|&t| x[t] == a).collect();
        let mut words = Vec::new();
        for row in admissible_rows(na, &joint[a], n, params.delta) {
            let mut w = EmpiricalType::from_counts(row).canonical_word();
            loop {
                words.push(w.clone());
                if !next_permutation(&mut w) {
                    break;
                }
            }
        }
        if words.is_empty() {
            return Ok(Vec::new());
        }
        blocks.push((positions, words));
    }

    let mut out = Vec::new();
    let mut idx = vec![0usize; blocks.len()];
    let mut y = vec![0 as Letter; n];
    'outer: loop {
        for ((positions, words), &i) in blocks.iter().zip(&idx) {
            for (&t, &b) in positions.iter().zip(&words[i]) {
                y[t] = b;
            }
        }
        out.push(y.clone());
        for k in (0..blocks.len()).rev() {
            idx[k] += 1;
            if idx[k] < blocks[k].1.len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    out.sort_unstable();
    Ok(out)
}

/// `|G(x1) ∩ G(x2)| / |G(x1)|` where `G(x)` is the conditional typical set.
pub fn intersection_ratio(
    x1: &[Letter],
    x2: &[Letter],
    channel_matrix: &[Vec<f64>],
    params: TypicalityParams,
    budget: u128,
) -> Result<f64> {
    let input_size = channel_matrix.len();
    let t1 = empirical_type(x1, input_size)?;
    let t2 = empirical_type(x2, input_size)?;
    if t1 != t2 {
        return Err(Error::domain("intersection ratio needs two sequences of the same type"));
    }
    let g1 = enumerate_conditional_typical(x1, channel_matrix, params, budget)?;
    if g1.is_empty() {
        return Err(Error::DegenerateTypicality);
    }
    let joint = induced_joint_pmf(&t2, channel_matrix);
    let mut both = 0usize;
    for y in &g1 {
        if is_jointly_typical(x2, y, &joint, params)? {
            both += 1;
        }
    }
    Ok(both as f64 / g1.len() as f64)
}

/// Size of a type class as `f64` (may be `inf` for huge classes).
pub fn class_size_f64(ty: &EmpiricalType) -> f64 {
    ty.class_size().to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc(p: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
    }

    fn identity(k: usize) -> Vec<Vec<f64>> {
        (0..k)
            .map(|a| (0..k).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    #[test]
    fn empirical_type_examples() {
        let t = empirical_type(&[0, 1, 1, 0], 2).unwrap();
        assert_eq!(t.counts(), &[2, 2]);
        assert_eq!(t.n(), 4);
        let e = empirical_type(&[], 3).unwrap();
        assert_eq!(e.counts(), &[0, 0, 0]);
        assert_eq!(e.n(), 0);
        assert_eq!(empirical_type(&[1, 1, 1, 1], 2).unwrap().counts(), &[0, 4]);
        assert!(matches!(empirical_type(&[0, 2], 2), Err(Error::Domain(_))));
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(&[0, 0, 0], &[0, 0, 0]).unwrap(), 0);
        assert_eq!(hamming_distance(&[0, 1, 0], &[1, 1, 1]).unwrap(), 2);
        assert!(hamming_distance(&[0], &[0, 1]).is_err());
        assert!(hamming_at_least(&[0, 1, 0], &[1, 1, 1], 2));
        assert!(!hamming_at_least(&[0, 1, 0], &[1, 1, 1], 3));
    }

    #[test]
    fn sphere_bound_examples() {
        assert!((hamming_sphere_size_bound(4, 0.25, 2).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(hamming_sphere_size_exact(4, 0.25, 2), BigUint::from(1u32));
        assert_eq!(hamming_sphere_size_exact(9, 0.0, 2), BigUint::from(1u32));
        assert_eq!(hamming_sphere_size_exact(8, 0.5, 2), BigUint::from(93u32));
        assert!(93f64.log2() <= hamming_sphere_size_bound(8, 0.5, 2).unwrap());
        assert!(hamming_sphere_size_bound(8, 1.5, 2).is_err());
    }

    #[test]
    fn distance_threshold_rounds_decimal_products() {
        assert_eq!(distance_threshold(100, 0.1), 10);
        assert_eq!(distance_threshold(200, 0.01), 2);
        assert_eq!(distance_threshold(10, 0.55), 6);
        assert_eq!(distance_threshold(10, 0.0), 0);
    }

    #[test]
    fn typicality_examples() {
        let p = TypicalityParams::new(0.0).unwrap();
        let x = [0, 1, 1, 0];
        let joint = induced_joint_pmf(&empirical_type(&x, 2).unwrap(), &identity(2));
        assert!(is_jointly_typical(&x, &x, &joint, p).unwrap());

        // zero at (0,1) but the pair occurs
        let joint = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
        let big = TypicalityParams::new(10.0).unwrap();
        assert!(!is_jointly_typical(&[0, 1], &[1, 1], &joint, big).unwrap());

        assert!(is_jointly_typical(&[0, 1], &[0], &joint, big).is_err());
    }

    #[test]
    fn bsc_with_exact_flip_fraction_is_typical() {
        // n = 1000, x balanced, exactly 10% of each half flipped: every joint
        // frequency matches p_X·W exactly, so any delta >= 0 accepts
        let n = 1000;
        let x: Vec<Letter> = (0..n).map(|t| t % 2).collect();
        let mut y = x.clone();
        let (mut f0, mut f1) = (0, 0);
        for t in 0..n {
            if x[t] == 0 && f0 < 50 {
                y[t] = 1;
                f0 += 1;
            } else if x[t] == 1 && f1 < 50 {
                y[t] = 0;
                f1 += 1;
            }
        }
        let joint = induced_joint_pmf(&empirical_type(&x, 2).unwrap(), &bsc(0.1));
        let p = TypicalityParams::new(0.05).unwrap();
        assert!(is_jointly_typical(&x, &y, &joint, p).unwrap());
        // 40 extra flips in the 0-rows: N(0,1)/n = 0.09 vs 0.05, deviation 0.04 <= 0.05
        let mut z = y.clone();
        let mut extra = 0;
        for t in 0..n {
            if x[t] == 0 && z[t] == 0 && extra < 40 {
                z[t] = 1;
                extra += 1;
            }
        }
        assert!(is_jointly_typical(&x, &z, &joint, p).unwrap());
        // 60 extra flips: deviation 0.06 > 0.05
        let mut w = y;
        let mut extra = 0;
        for t in 0..n {
            if x[t] == 0 && w[t] == 0 && extra < 60 {
                w[t] = 1;
                extra += 1;
            }
        }
        assert!(!is_jointly_typical(&x, &w, &joint, p).unwrap());
    }

    #[test]
    fn enumeration_extremes() {
        let x = [0, 1, 1, 0, 1];
        let all = enumerate_conditional_typical(&x, &bsc(0.3), TypicalityParams::new(1.0).unwrap(), DEFAULT_ENUMERATION_BUDGET)
            .unwrap();
        assert_eq!(all.len(), 32);
        let single =
            enumerate_conditional_typical(&x, &identity(2), TypicalityParams::new(0.0).unwrap(), DEFAULT_ENUMERATION_BUDGET)
                .unwrap();
        assert_eq!(single, vec![x.to_vec()]);
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        let x = vec![0; 30];
        let err = enumerate_conditional_typical(&x, &bsc(0.1), TypicalityParams::new(0.1).unwrap(), 1 << 20)
            .unwrap_err();
        assert!(matches!(err, Error::Budget { budget, .. } if budget == 1 << 20));
    }

    #[test]
    fn intersection_ratio_extremes() {
        let p0 = TypicalityParams::new(0.0).unwrap();
        let x1 = [0, 0, 1, 1];
        let x2 = [1, 1, 0, 0];
        assert_eq!(intersection_ratio(&x1, &x1, &bsc(0.1), TypicalityParams::new(0.2).unwrap(), 1 << 24).unwrap(), 1.0);
        assert_eq!(intersection_ratio(&x1, &x2, &identity(2), p0, 1 << 24).unwrap(), 0.0);
        assert!(intersection_ratio(&x1, &[0, 0, 0, 1], &identity(2), p0, 1 << 24).is_err());
        // BSC(0.1), n = 4, delta = 0: p·n = 0.2 is not an integer, no output is typical
        assert!(matches!(
            intersection_ratio(&x1, &x2, &bsc(0.1), p0, 1 << 24),
            Err(Error::DegenerateTypicality)
        ));
    }

    #[test]
    fn canonical_word_and_class_size() {
        let t = EmpiricalType::from_counts(vec![2, 0, 1]);
        assert_eq!(t.canonical_word(), vec![0, 0, 2]);
        assert_eq!(t.class_size(), BigUint::from(3u32));
        assert_eq!(class_size_f64(&t), 3.0);
    }

    #[test]
    fn next_permutation_visits_every_arrangement() {
        let mut w = vec![0, 0, 1, 1];
        let mut count = 1;
        while next_permutation(&mut w) {
            count += 1;
        }
        assert_eq!(count, 6);
    }
}
