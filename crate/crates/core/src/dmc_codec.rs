//! DI codes for a DMC: type-class codebooks separated in Hamming distance,
//! the typicality identifier, and Monte Carlo estimation of both error types.
//!
//! Construction draws words uniformly from one type class and discards words
//! that sit too close to another. In `Faithful` mode every word of a close
//! pair is dropped, exactly as in the random-coding argument; `Greedy` mode
//! scans in order and keeps a word when it is far from everything kept so far.
//!
//! The identifier for message `j` accepts `y` when `(v_j, y)` is δ-typical for
//! `p_X·W`, where `p_X` is the codebook's type. Decoding sets of different
//! messages may overlap; that overlap is the type-II error.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::di_capacity;
use crate::channel::{input_cost, Dmc, DmcSampler};
use crate::rng::{self, sub_stream};
use crate::stats::Proportion;
use crate::types::{self, EmpiricalType, Letter};
use crate::{Error, Result};

/// Default cap on the number of sampled words.
pub const DEFAULT_MAX_CODEWORDS: usize = 4096;

const CONSTRUCTION_STREAM: u64 = 0;
const PAIR_STREAM: u64 = 1;
const TRIAL_BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Faithful,
    Greedy,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "faithful" => Ok(Mode::Faithful),
            "greedy" => Ok(Mode::Greedy),
            other => Err(Error::Parse(format!("unknown mode {other:?}, expected faithful or greedy"))),
        }
    }
}

/// Parameters of [`build_codebook`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub n: usize,
    /// Target rate in bits per symbol.
    pub rate: f64,
    pub epsilon: f64,
    pub mode: Mode,
    pub seed: u64,
    /// Required gap `H(base type) - rate`; defaults to `3θ(ε)`.
    pub backoff: Option<f64>,
    /// Cost margin: the base type satisfies `E[φ] <= A - γ`.
    pub gamma: f64,
    /// Cap on the number of sampled words `M`.
    pub max_codewords: usize,
}

impl BuildConfig {
    pub fn new(n: usize, rate: f64, epsilon: f64, mode: Mode, seed: u64) -> Self {
        BuildConfig {
            n,
            rate,
            epsilon,
            mode,
            seed,
            backoff: None,
            gamma: 0.0,
            max_codewords: DEFAULT_MAX_CODEWORDS,
        }
    }
}

/// Codewords of one type class with pairwise Hamming distance at least the
/// codebook's threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmcCodebook {
    pub n: usize,
    pub epsilon: f64,
    /// Letter counts shared by every codeword.
    pub base_type: Vec<usize>,
    pub mode: Mode,
    pub codewords: Vec<Vec<Letter>>,
}

/// Diagnostics from one construction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    /// Words actually sampled, `min(floor(2^(nR)), max_codewords)`.
    pub requested: usize,
    /// `n·R`, the log2 of the nominal message count before capping.
    pub nominal_log2_size: f64,
    pub retained: usize,
    pub dropped_indices: Vec<usize>,
    pub seed: u64,
    /// Minimum kept distance `max(ceil(nε), 1)`.
    pub threshold: usize,
    /// Words within the threshold of some earlier word.
    pub close_to_earlier: usize,
    /// Words within the threshold of some later word.
    pub close_to_later: usize,
    pub backoff: f64,
    pub base_type_entropy: f64,
}

impl DmcCodebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Minimum pairwise distance enforced by the construction.
    pub fn threshold(&self) -> usize {
        types::distance_threshold(self.n, self.epsilon).max(1)
    }

    pub fn base_type(&self) -> EmpiricalType {
        EmpiricalType::from_counts(self.base_type.clone())
    }

    /// Check the three codebook invariants: common type, separation, cost.
    pub fn validate(&self, channel: &Dmc) -> Result<()> {
        let t = self.threshold();
        for (i, w) in self.codewords.iter().enumerate() {
            if w.len() != self.n {
                return Err(Error::domain(format!("codeword {i} has length {}, expected {}", w.len(), self.n)));
            }
            let ty = types::empirical_type(w, channel.input_size())?;
            if ty.counts() != self.base_type.as_slice() {
                return Err(Error::domain(format!("codeword {i} is not of the base type")));
            }
            if input_cost(channel, w)? > channel.constraint() + 1e-9 {
                return Err(Error::domain(format!("codeword {i} violates the cost constraint")));
            }
        }
        if let Some(&(i, j)) = close_pairs(&self.codewords, t).first() {
            return Err(Error::domain(format!("codewords {i} and {j} are closer than {t}")));
        }
        Ok(())
    }
}

/// Finds stored words closer than `threshold` to a query. Positions are split
/// into `threshold` blocks; two words at distance `< threshold` agree on at
/// least one whole block, so only words sharing a block are compared.
struct CloseIndex<'a> {
    threshold: usize,
    bounds: Vec<(usize, usize)>,
    buckets: Vec<HashMap<&'a [Letter], Vec<usize>>>,
    words: Vec<&'a [Letter]>,
    stamp: Vec<usize>,
    query: usize,
}

impl<'a> CloseIndex<'a> {
    fn new(n: usize, threshold: usize) -> Self {
        // past n every pair is close and no block need be shared; scan all
        let blocks = if threshold > n { 0 } else { threshold.max(1) };
        let bounds = (0..blocks).map(|b| (b * n / blocks, (b + 1) * n / blocks)).collect();
        CloseIndex {
            threshold,
            bounds,
            buckets: vec![HashMap::new(); blocks],
            words: Vec::new(),
            stamp: Vec::new(),
            query: 0,
        }
    }

    fn insert(&mut self, word: &'a [Letter]) -> usize {
        let id = self.words.len();
        for (b, &(lo, hi)) in self.bounds.iter().enumerate() {
            self.buckets[b].entry(&word[lo..hi]).or_default().push(id);
        }
        self.words.push(word);
        self.stamp.push(0);
        id
    }

    /// Ids of stored words at distance `< threshold` from `word`, ascending.
    fn close_to(&mut self, word: &[Letter]) -> Vec<usize> {
        self.query += 1;
        let mut out = Vec::new();
        if self.bounds.is_empty() {
            return (0..self.words.len()).collect();
        }
        for (b, &(lo, hi)) in self.bounds.iter().enumerate() {
            if let Some(ids) = self.buckets[b].get(&word[lo..hi]) {
                for &k in ids {
                    if self.stamp[k] != self.query {
                        self.stamp[k] = self.query;
                        if !types::hamming_at_least(self.words[k], word, self.threshold) {
                            out.push(k);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Unordered pairs `(i, j)`, `i < j`, at distance `< threshold`.
pub fn close_pairs(words: &[Vec<Letter>], threshold: usize) -> Vec<(usize, usize)> {
    if threshold == 0 || words.is_empty() {
        return Vec::new();
    }
    let mut index = CloseIndex::new(words[0].len(), threshold);
    let mut pairs = Vec::new();
    for (j, w) in words.iter().enumerate() {
        pairs.extend(index.close_to(w).into_iter().map(|i| (i, j)));
        index.insert(w);
    }
    pairs
}

/// Round a pmf to an n-type by largest-remainder apportionment, then shift
/// mass from expensive to the cheapest usable letter until the average cost
/// is at most `budget`.
pub fn nearest_type(pmf: &[f64], n: usize, cost: &[f64], budget: f64) -> Result<EmpiricalType> {
    let scaled: Vec<f64> = pmf.iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..pmf.len()).collect();
    // largest remainder first, lower letter on ties
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &a in order.iter().take(n.saturating_sub(assigned)) {
        counts[a] += 1;
    }
    let cheapest = (0..cost.len())
        .min_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(a.cmp(&b)))
        .ok_or_else(|| Error::domain("empty alphabet"))?;
    let limit = budget * n as f64 + 1e-9;
    loop {
        let total: f64 = counts.iter().zip(cost).map(|(&c, &p)| c as f64 * p).sum();
        if total <= limit {
            break;
        }
        let dearest = (0..cost.len())
            .filter(|&a| counts[a] > 0 && cost[a] > cost[cheapest])
            .max_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(b.cmp(&a)))
            .ok_or(Error::Infeasible {
                min_cost: cost[cheapest],
                constraint: budget,
            })?;
        counts[dearest] -= 1;
        counts[cheapest] += 1;
    }
    Ok(EmpiricalType::from_counts(counts))
}

/// Sample `M` words uniformly from the base type class and drop close words.
pub fn build_codebook(channel: &Dmc, cfg: &BuildConfig) -> Result<(DmcCodebook, ConstructionReport)> {
    if cfg.n == 0 {
        return Err(Error::domain("block length must be positive"));
    }
    if !(0.0..=1.0).contains(&cfg.epsilon) {
        return Err(Error::domain(format!("epsilon must lie in [0, 1], got {}", cfg.epsilon)));
    }
    if !(cfg.rate >= 0.0) {
        return Err(Error::domain(format!("rate must be >= 0, got {}", cfg.rate)));
    }
    if !(cfg.gamma >= 0.0) {
        return Err(Error::domain("gamma must be >= 0"));
    }
    let budget = channel.constraint() - cfg.gamma;
    let target = di_capacity(&channel.with_constraint(budget.max(0.0))?)?;
    let pmf = target.maximizer_on_original(channel.input_size());
    let base = nearest_type(&pmf, cfg.n, channel.cost(), budget)?;
    let h = base.entropy_bits();
    let backoff = cfg
        .backoff
        .unwrap_or_else(|| 3.0 * types::sphere_exponent(cfg.epsilon, channel.input_size()));
    if cfg.rate > h - backoff + 1e-12 {
        return Err(Error::domain(format!(
            "rate {} exceeds H(base type) - backoff = {h} - {backoff}",
            cfg.rate
        )));
    }
    let nominal = cfg.n as f64 * cfg.rate;
    let requested = if nominal >= (cfg.max_codewords as f64).log2() {
        cfg.max_codewords
    } else {
        (nominal.exp2().floor() as usize).clamp(1, cfg.max_codewords)
    };
    let threshold = types::distance_threshold(cfg.n, cfg.epsilon).max(1);

    let mut rng = rng::stream(cfg.seed, CONSTRUCTION_STREAM);
    let canonical = base.canonical_word();
    let mut words = Vec::with_capacity(requested);
    for _ in 0..requested {
        let mut w = canonical.clone();
        w.shuffle(&mut rng);
        words.push(w);
    }

    let mut earlier = vec![false; requested];
    let mut later = vec![false; requested];
    let mut keep = vec![true; requested];
    match cfg.mode {
        Mode::Faithful => {
            for (i, j) in close_pairs(&words, threshold) {
                later[i] = true;
                earlier[j] = true;
            }
            for i in 0..requested {
                keep[i] = !(earlier[i] || later[i]);
            }
        }
        Mode::Greedy => {
            let mut index = CloseIndex::new(cfg.n, threshold);
            for i in 0..requested {
                if index.close_to(&words[i]).is_empty() {
                    index.insert(&words[i]);
                } else {
                    keep[i] = false;
                    earlier[i] = true;
                }
            }
        }
    }
    let dropped_indices: Vec<usize> = (0..requested).filter(|&i| !keep[i]).collect();
    let codewords: Vec<Vec<Letter>> = words
        .into_iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(w, _)| w)
        .collect();
    let report = ConstructionReport {
        requested,
        nominal_log2_size: nominal,
        retained: codewords.len(),
        dropped_indices,
        seed: cfg.seed,
        threshold,
        close_to_earlier: earlier.iter().filter(|&&b| b).count(),
        close_to_later: later.iter().filter(|&&b| b).count(),
        backoff,
        base_type_entropy: h,
    };
    if codewords.is_empty() {
        return Err(Error::Construction(format!(
            "every sampled word was dropped: {}",
            serde_json::to_string(&report).unwrap_or_default()
        )));
    }
    Ok((
        DmcCodebook {
            n: cfg.n,
            epsilon: cfg.epsilon,
            base_type: base.counts().to_vec(),
            mode: cfg.mode,
            codewords,
        },
        report,
    ))
}

/// Typicality identifier: message `j` is accepted iff `(v_j, y)` is δ-typical
/// for `p_X · W`.
#[derive(Debug, Clone)]
pub struct TypicalityDecoder {
    words: Vec<Vec<Letter>>,
    joint_pmf: Vec<Vec<f64>>,
    delta: f64,
    output_size: usize,
}

impl TypicalityDecoder {
    pub fn new(codebook: &DmcCodebook, channel: &Dmc, delta: f64) -> Result<Self> {
        let params = types::TypicalityParams::new(delta)?;
        if codebook.base_type.len() != channel.input_size() {
            return Err(Error::domain("codebook type and channel alphabet disagree"));
        }
        let joint_pmf = types::induced_joint_pmf(&codebook.base_type(), channel.matrix());
        Ok(TypicalityDecoder {
            words: codebook.codewords.clone(),
            joint_pmf,
            delta: params.delta(),
            output_size: channel.output_size(),
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `scratch` must have `|X|·|Y|` entries; it is overwritten.
    fn accepts_with(&self, j: usize, y: &[Letter], scratch: &mut [usize]) -> bool {
        scratch.iter_mut().for_each(|c| *c = 0);
        let k = self.output_size;
        for (&a, &b) in self.words[j].iter().zip(y) {
            scratch[a * k + b] += 1;
        }
        let n = y.len() as f64;
        for (a, row) in self.joint_pmf.iter().enumerate() {
            for (b, &q) in row.iter().enumerate() {
                let c = scratch[a * k + b];
                let ok = if q == 0.0 {
                    c == 0
                } else {
                    (c as f64 - q * n).abs() <= self.delta * n + 1e-9
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    pub fn accepts(&self, j: usize, y: &[Letter]) -> bool {
        let mut scratch = vec![0usize; self.joint_pmf.len() * self.output_size];
        self.accepts_with(j, y, &mut scratch)
    }
}

/// Does the identifier for message `j` accept the output `y`?
pub fn identify(codebook: &DmcCodebook, channel: &Dmc, j: usize, y: &[Letter], delta: f64) -> Result<bool> {
    if j >= codebook.len() {
        return Err(Error::domain(format!("message {j} out of range for {} codewords", codebook.len())));
    }
    if y.len() != codebook.n {
        return Err(Error::domain(format!("output has length {}, expected {}", y.len(), codebook.n)));
    }
    if let Some(&b) = y.iter().find(|&&b| b >= channel.output_size()) {
        return Err(Error::domain(format!("output letter {b} out of range")));
    }
    Ok(TypicalityDecoder::new(codebook, channel, delta)?.accepts(j, y))
}

/// Type-II estimate for one ordered pair: send `i`, ask about `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    pub estimate: Proportion,
}

/// Monte Carlo estimates of worst-case type-I and sampled type-II errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub pe1_max: f64,
    /// Maximum over the sampled pairs only; a lower bound on the true maximum.
    pub pe2_max: f64,
    pub pe1_per_message: Vec<Proportion>,
    pub pe2_sampled_pairs: Vec<PairEstimate>,
    pub trials_per_point: u64,
    pub seed: u64,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chebyshev_pe1_ref: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chebyshev_pe1_variance_ref: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chebyshev_pe2_ref: Option<f64>,
}

impl SimReport {
    pub(crate) fn assemble(
        pe1: Vec<Proportion>,
        pairs: Vec<PairEstimate>,
        trials: u64,
        seed: u64,
        delta: f64,
    ) -> SimReport {
        SimReport {
            pe1_max: pe1.iter().map(|p| p.estimate).fold(0.0, f64::max),
            pe2_max: pairs.iter().map(|p| p.estimate.estimate).fold(0.0, f64::max),
            pe1_per_message: pe1,
            pe2_sampled_pairs: pairs,
            trials_per_point: trials,
            seed,
            delta,
            chebyshev_pe1_ref: None,
            chebyshev_pe1_variance_ref: None,
            chebyshev_pe2_ref: None,
        }
    }

    /// Estimate carrying the largest type-I error.
    pub fn worst_pe1(&self) -> Option<&Proportion> {
        self.pe1_per_message
            .iter()
            .max_by(|a, b| a.estimate.total_cmp(&b.estimate))
    }

    pub fn worst_pe2(&self) -> Option<&PairEstimate> {
        self.pe2_sampled_pairs
            .iter()
            .max_by(|a, b| a.estimate.estimate.total_cmp(&b.estimate.estimate))
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<&PairEstimate> {
        self.pe2_sampled_pairs.iter().find(|p| p.i == i && p.j == j)
    }

    /// Header of [`SimReport::csv_row`].
    pub const CSV_HEADER: &'static str = "n,pe1_max,pe2_max,ci_low,ci_high,pe2_ci_low,pe2_ci_high";

    /// One CSV row; the intervals are Wilson 95% intervals of the worst
    /// type-I and worst sampled type-II estimates.
    pub fn csv_row(&self, n: usize) -> String {
        let (l1, h1) = self.worst_pe1().map_or((0.0, 0.0), |p| (p.ci_low, p.ci_high));
        let (l2, h2) = self
            .worst_pe2()
            .map_or((0.0, 0.0), |p| (p.estimate.ci_low, p.estimate.ci_high));
        format!("{n},{},{},{l1},{h1},{l2},{h2}", self.pe1_max, self.pe2_max)
    }
}

/// The closest pair (both directions) plus up to `pair_budget` random ordered
/// pairs, without repeats.
pub fn select_pairs(words: &[Vec<Letter>], pair_budget: usize, seed: u64) -> Vec<(usize, usize)> {
    let m = words.len();
    if m < 2 {
        return Vec::new();
    }
    let mut best = (usize::MAX, 0, 1);
    for i in 0..m {
        for j in i + 1..m {
            let d = words[i].iter().zip(&words[j]).filter(|(a, b)| a != b).count();
            if d < best.0 {
                best = (d, i, j);
            }
        }
    }
    with_random_pairs((best.1, best.2), m, pair_budget, seed)
}

/// `closest` in both directions followed by up to `pair_budget` distinct
/// random ordered pairs over `m` messages.
pub(crate) fn with_random_pairs(
    closest: (usize, usize),
    m: usize,
    pair_budget: usize,
    seed: u64,
) -> Vec<(usize, usize)> {
    let mut pairs = vec![closest, (closest.1, closest.0)];
    let mut seen: HashSet<(usize, usize)> = pairs.iter().copied().collect();
    let total = m * (m - 1);
    let mut rng = rng::stream(seed, PAIR_STREAM);
    let target = (pair_budget + 2).min(total);
    let mut attempts = 0;
    while pairs.len() < target && attempts < 100 * target {
        attempts += 1;
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..m - 1);
        let j = if j >= i { j + 1 } else { j };
        if seen.insert((i, j)) {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Run `trials` transmissions of each `sent[i]` through `channel` and score
/// them with `decoder`. Message `i` uses generator streams derived from
/// `(seed, i, block)`, so two runs that share a seed see the same uniforms.
pub fn simulate_code(
    decoder: &TypicalityDecoder,
    sent: &[Vec<Letter>],
    channel: &Dmc,
    trials: u64,
    pairs: &[(usize, usize)],
    seed: u64,
) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    if sent.len() != decoder.len() {
        return Err(Error::domain("one transmitted word per message is required"));
    }
    let sampler = DmcSampler::new(channel);
    let scratch_len = decoder.joint_pmf.len() * decoder.output_size;
    let results: Vec<(u64, Vec<u64>)> = (0..sent.len())
        .into_par_iter()
        .map(|i| {
            let mine: Vec<usize> = pairs
                .iter()
                .enumerate()
                .filter(|(_, p)| p.0 == i)
                .map(|(k, _)| k)
                .collect();
            let mut misses = 0u64;
            let mut false_hits = vec![0u64; mine.len()];
            let mut y = Vec::with_capacity(sent[i].len());
            let mut scratch = vec![0usize; scratch_len];
            let blocks = (trials as usize).div_ceil(TRIAL_BLOCK);
            for block in 0..blocks {
                let mut r = rng::stream(seed, sub_stream(i as u64, block as u64));
                let count = TRIAL_BLOCK.min(trials as usize - block * TRIAL_BLOCK);
                for _ in 0..count {
                    sampler.sample_into(&sent[i], &mut y, &mut r);
                    if !decoder.accepts_with(i, &y, &mut scratch) {
                        misses += 1;
                    }
                    for (slot, &k) in mine.iter().enumerate() {
                        if decoder.accepts_with(pairs[k].1, &y, &mut scratch) {
                            false_hits[slot] += 1;
                        }
                    }
                }
            }
            let mut by_pair = vec![0u64; pairs.len()];
            for (slot, &k) in mine.iter().enumerate() {
                by_pair[k] = false_hits[slot];
            }
            (misses, by_pair)
        })
        .collect();

    let pe1: Vec<Proportion> = results.iter().map(|r| Proportion::new(r.0, trials)).collect();
    let pair_estimates = pairs
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let hits = results[i].1[k];
            let d = decoder.words[i]
                .iter()
                .zip(&decoder.words[j])
                .filter(|(a, b)| a != b)
                .count();
            PairEstimate {
                i,
                j,
                distance: d as f64,
                estimate: Proportion::new(hits, trials),
            }
        })
        .collect();
    Ok(SimReport::assemble(pe1, pair_estimates, trials, seed, decoder.delta))
}

/// Estimate `P_e,1(i)` for every message and `P_e,2(i, j)` on the closest
/// pair plus `pair_budget` random pairs.
pub fn simulate_errors(
    codebook: &DmcCodebook,
    channel: &Dmc,
    delta: f64,
    trials: u64,
    pair_budget: usize,
    seed: u64,
) -> Result<SimReport> {
    let decoder = TypicalityDecoder::new(codebook, channel, delta)?;
    let pairs = select_pairs(&codebook.codewords, pair_budget, seed);
    simulate_code(&decoder, &codebook.codewords, channel, trials, &pairs, seed)
}

/// Whether two messages share a codeword. Such a code cannot keep both error
/// types small: for a shared word `x`, `P_e,1(i1) + P_e,2(i2, i1) = 1`.
pub fn same_codeword_conflict(codewords: &[Vec<Letter>]) -> bool {
    let mut seen = HashSet::with_capacity(codewords.len());
    codewords.iter().any(|w| !seen.insert(w.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_type_examples() {
        let t = nearest_type(&[0.5, 0.5], 7, &[0.0, 1.0], 1.0).unwrap();
        assert_eq!(t.counts(), &[4, 3]);
        let t = nearest_type(&[0.75, 0.25], 10, &[0.0, 1.0], 0.25).unwrap();
        // 7.5 / 2.5 rounds to 8 / 2 (ties to the lower letter)
        assert_eq!(t.counts(), &[8, 2]);
        let t = nearest_type(&[0.5, 0.5], 10, &[0.0, 1.0], 0.2).unwrap();
        assert_eq!(t.counts(), &[8, 2]);
    }

    #[test]
    fn epsilon_zero_keeps_everything() {
        let ch = Dmc::bsc(0.1, 1.0).unwrap();
        for mode in [Mode::Faithful, Mode::Greedy] {
            let mut cfg = BuildConfig::new(64, 0.1, 0.0, mode, 3);
            cfg.max_codewords = 64;
            let (cb, rep) = build_codebook(&ch, &cfg).unwrap();
            assert_eq!(rep.retained, rep.requested);
            assert!(rep.dropped_indices.is_empty());
            cb.validate(&ch).unwrap();
        }
    }

    #[test]
    fn rate_above_backoff_is_rejected() {
        let ch = Dmc::bsc(0.1, 1.0).unwrap();
        let cfg = BuildConfig::new(100, 0.9, 0.05, Mode::Greedy, 1);
        assert!(matches!(build_codebook(&ch, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn greedy_on_full_type_class_n4() {
        // all 6 words of type (2,2) at threshold 2: pairwise distances are
        // even and positive, so greedy keeps all of them
        let ch = Dmc::bsc(0.1, 1.0).unwrap();
        let mut cfg = BuildConfig::new(4, 0.0, 0.5, Mode::Greedy, 0);
        cfg.backoff = Some(0.0);
        let (cb, _) = build_codebook(&ch, &cfg).unwrap();
        cb.validate(&ch).unwrap();
        assert_eq!(cb.threshold(), 2);
    }

    #[test]
    fn identify_noiseless() {
        let ch = Dmc::identity(2).unwrap();
        let cb = DmcCodebook {
            n: 8,
            epsilon: 0.5,
            base_type: vec![4, 4],
            mode: Mode::Greedy,
            codewords: vec![vec![0, 0, 0, 0, 1, 1, 1, 1], vec![1, 1, 1, 1, 0, 0, 0, 0]],
        };
        cb.validate(&ch).unwrap();
        assert!(identify(&cb, &ch, 0, &cb.codewords[0], 0.0).unwrap());
        assert!(!identify(&cb, &ch, 0, &cb.codewords[1], 0.0).unwrap());
        assert!(identify(&cb, &ch, 2, &cb.codewords[1], 0.0).is_err());
        assert!(identify(&cb, &ch, 0, &[0, 1], 0.0).is_err());
    }

    #[test]
    fn conflict_detection() {
        assert!(!same_codeword_conflict(&[]));
        assert!(!same_codeword_conflict(&[vec![0, 1], vec![1, 0]]));
        assert!(same_codeword_conflict(&[vec![0, 1], vec![1, 0], vec![0, 1]]));
    }

    #[test]
    fn pairs_include_closest_both_ways() {
        let words = vec![vec![0, 0, 1, 1], vec![1, 1, 0, 0], vec![0, 1, 0, 1]];
        let p = select_pairs(&words, 10, 4);
        assert_eq!(p[0], (0, 2));
        assert_eq!(p[1], (2, 0));
        assert_eq!(p.len(), 6);
        let uniq: HashSet<_> = p.iter().collect();
        assert_eq!(uniq.len(), 6);
        assert!(select_pairs(&words[..1], 5, 4).is_empty());
    }

    #[test]
    fn csv_row_shape() {
        let r = SimReport::assemble(vec![Proportion::new(1, 10)], vec![], 10, 0, 0.1);
        assert_eq!(SimReport::CSV_HEADER.split(',').count(), r.csv_row(5).split(',').count());
    }
}
