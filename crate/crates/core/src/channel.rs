//! Channel models: the constrained DMC, its row reduction, and the additive
//! white Gaussian noise channel.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::types::Letter;
use crate::{Error, Result};

/// Tolerance on row sums and on row equality during reduction.
pub const ROW_TOLERANCE: f64 = 1e-12;

/// Adjustments made while validating a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChannelNote {
    /// The constraint exceeded the largest letter cost and was lowered to it.
    ConstraintClamped { requested: f64, clamped_to: f64 },
    /// No letter has zero cost.
    NoZeroCostLetter { min_cost: f64 },
}

/// A discrete memoryless channel `W(y|x)` with a per-letter input cost and an
/// average-cost constraint `(1/n) Σ φ(x_t) <= A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DmcSchema", into = "DmcSchema")]
pub struct Dmc {
    matrix: Vec<Vec<f64>>,
    cost: Vec<f64>,
    constraint: f64,
    notes: Vec<ChannelNote>,
}

#[derive(Serialize, Deserialize)]
struct DmcSchema {
    input_size: usize,
    output_size: usize,
    matrix: Vec<Vec<f64>>,
    #[serde(default)]
    cost: Option<Vec<f64>>,
    #[serde(default)]
    constraint: Option<f64>,
}

impl TryFrom<DmcSchema> for Dmc {
    type Error = Error;

    fn try_from(s: DmcSchema) -> Result<Dmc> {
        if s.matrix.len() != s.input_size || s.matrix.iter().any(|r| r.len() != s.output_size) {
            return Err(Error::Parse(format!(
                "matrix shape does not match input_size={} output_size={}",
                s.input_size, s.output_size
            )));
        }
        let cost = s.cost.unwrap_or_else(|| vec![0.0; s.input_size]);
        let constraint = s
            .constraint
            .unwrap_or_else(|| cost.iter().copied().fold(0.0, f64::max));
        Dmc::new(s.matrix, cost, constraint)
    }
}

impl From<Dmc> for DmcSchema {
    fn from(d: Dmc) -> DmcSchema {
        DmcSchema {
            input_size: d.input_size(),
            output_size: d.output_size(),
            matrix: d.matrix,
            cost: Some(d.cost),
            constraint: Some(d.constraint),
        }
    }
}

impl Dmc {
    /// Validates a channel. A constraint above the largest cost is clamped and
    /// recorded in [`Dmc::notes`]; a constraint below the cheapest letter is
    /// rejected as infeasible.
    pub fn new(matrix: Vec<Vec<f64>>, cost: Vec<f64>, constraint: f64) -> Result<Dmc> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::domain("channel matrix must be non-empty"));
        }
        for (x, row) in matrix.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::domain(format!("row {x} has {} entries, expected {cols}", row.len())));
            }
            if let Some(w) = row.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
                return Err(Error::domain(format!("row {x} has invalid entry {w}")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::domain(format!("row {x} sums to {s}, not 1")));
            }
        }
        if cost.len() != rows {
            return Err(Error::domain(format!("{} costs for {rows} input letters", cost.len())));
        }
        if let Some(c) = cost.iter().find(|c| !(**c >= 0.0) || !c.is_finite()) {
            return Err(Error::domain(format!("letter costs must be finite and >= 0, got {c}")));
        }
        if !(constraint >= 0.0) || !constraint.is_finite() {
            return Err(Error::domain(format!("constraint must be finite and >= 0, got {constraint}")));
        }
        let max_cost = cost.iter().copied().fold(0.0, f64::max);
        let min_cost = cost.iter().copied().fold(f64::INFINITY, f64::min);
        let mut notes = Vec::new();
        let mut a = constraint;
        if a > max_cost {
            log::warn!("constraint {a} exceeds the largest letter cost {max_cost}; clamping");
            notes.push(ChannelNote::ConstraintClamped {
                requested: a,
                clamped_to: max_cost,
            });
            a = max_cost;
        }
        if min_cost > 0.0 {
            notes.push(ChannelNote::NoZeroCostLetter { min_cost });
        }
        if min_cost > a {
            return Err(Error::Infeasible {
                min_cost,
                constraint: a,
            });
        }
        Ok(Dmc {
            matrix,
            cost,
            constraint: a,
            notes,
        })
    }

    /// Channel with zero costs; the constraint never binds.
    pub fn unconstrained(matrix: Vec<Vec<f64>>) -> Result<Dmc> {
        let k = matrix.len();
        Dmc::new(matrix, vec![0.0; k], 0.0)
    }

    /// Binary symmetric channel with Hamming-weight cost `φ(x) = x`.
    pub fn bsc(crossover: f64, weight_constraint: f64) -> Result<Dmc> {
        if !(0.0..=1.0).contains(&crossover) {
            return Err(Error::domain(format!("crossover must lie in [0, 1], got {crossover}")));
        }
        Dmc::new(
            vec![vec![1.0 - crossover, crossover], vec![crossover, 1.0 - crossover]],
            vec![0.0, 1.0],
            weight_constraint,
        )
    }

    /// Noiseless channel on `k` letters.
    pub fn identity(k: usize) -> Result<Dmc> {
        Dmc::unconstrained(
            (0..k)
                .map(|a| (0..k).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn input_size(&self) -> usize {
        self.matrix.len()
    }

    pub fn output_size(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn row(&self, x: Letter) -> &[f64] {
        &self.matrix[x]
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn constraint(&self) -> f64 {
        self.constraint
    }

    pub fn max_cost(&self) -> f64 {
        self.cost.iter().copied().fold(0.0, f64::max)
    }

    pub fn notes(&self) -> &[ChannelNote] {
        &self.notes
    }

    /// Same channel under a different constraint.
    pub fn with_constraint(&self, constraint: f64) -> Result<Dmc> {
        Dmc::new(self.matrix.clone(), self.cost.clone(), constraint)
    }

    /// Same channel with costs and constraint multiplied by `c > 0`.
    pub fn scale_cost(&self, c: f64) -> Result<Dmc> {
        Dmc::new(
            self.matrix.clone(),
            self.cost.iter().map(|v| v * c).collect(),
            self.constraint * c,
        )
    }

    /// First pair of rows equal within [`ROW_TOLERANCE`], if any.
    pub fn duplicate_rows(&self) -> Option<(usize, usize)> {
        for i in 0..self.input_size() {
            for j in i + 1..self.input_size() {
                if rows_equal(&self.matrix[i], &self.matrix[j]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    fn check_word(&self, codeword: &[Letter]) -> Result<()> {
        if let Some(&x) = codeword.iter().find(|&&x| x >= self.input_size()) {
            return Err(Error::domain(format!(
                "letter {x} outside input alphabet of size {}",
                self.input_size()
            )));
        }
        Ok(())
    }
}

fn rows_equal(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= ROW_TOLERANCE)
}

/// Partition of the input letters into classes of identical rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionMap {
    /// Class index of every original letter. Classes are numbered by their
    /// lowest member, so class `ℓ` is reduced letter `ℓ`.
    pub class_of: Vec<usize>,
    /// Original letter chosen for each class: the cheapest member, lowest
    /// index on ties.
    pub representative: Vec<Letter>,
}

impl ReductionMap {
    pub fn is_identity(&self) -> bool {
        self.class_of.iter().enumerate().all(|(x, &c)| x == c)
            && self.representative.iter().enumerate().all(|(c, &x)| x == c)
    }

    pub fn num_classes(&self) -> usize {
        self.representative.len()
    }

    /// Rewrite a word over the original alphabet as a word over the reduced one.
    pub fn project(&self, word: &[Letter]) -> Vec<Letter> {
        word.iter().map(|&x| self.class_of[x]).collect()
    }

    /// Replace every letter by its class representative, staying in the
    /// original alphabet.
    pub fn to_representatives(&self, word: &[Letter]) -> Vec<Letter> {
        word.iter()
            .map(|&x| self.representative[self.class_of[x]])
            .collect()
    }
}

/// Merge input letters with identical rows, keeping the cheapest letter of each
/// class.
pub fn reduce(channel: &Dmc) -> (Dmc, ReductionMap) {
    let k = channel.input_size();
    let mut class_of = vec![usize::MAX; k];
    let mut members: Vec<Vec<Letter>> = Vec::new();
    for x in 0..k {
        if class_of[x] != usize::MAX {
            continue;
        }
        let c = members.len();
        let mut m = vec![x];
        class_of[x] = c;
        for x2 in x + 1..k {
            if class_of[x2] == usize::MAX && rows_equal(channel.row(x), channel.row(x2)) {
                class_of[x2] = c;
                m.push(x2);
            }
        }
        members.push(m);
    }
    let representative: Vec<Letter> = members
        .iter()
        .map(|m| {
            // strict < keeps the lowest index among equal costs
            let mut best = m[0];
            for &x in &m[1..] {
                if channel.cost[x] < channel.cost[best] {
                    best = x;
                }
            }
            best
        })
        .collect();
    let matrix = representative.iter().map(|&x| channel.matrix[x].clone()).collect();
    let cost = representative.iter().map(|&x| channel.cost[x]).collect();
    let reduced = Dmc::new(matrix, cost, channel.constraint)
        .expect("a reduction of a valid channel is valid");
    (
        reduced,
        ReductionMap {
            class_of,
            representative,
        },
    )
}

/// Average per-letter cost of a word.
pub fn input_cost(channel: &Dmc, codeword: &[Letter]) -> Result<f64> {
    channel.check_word(codeword)?;
    if codeword.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = codeword.iter().map(|&x| channel.cost[x]).sum();
    Ok(total / codeword.len() as f64)
}

/// Inverse-cdf sampler for a DMC. One uniform draw per symbol, so two channels
/// with equal rows produce equal outputs from equal generator states.
#[derive(Debug, Clone)]
pub struct DmcSampler {
    cdf: Vec<Vec<f64>>,
}

impl DmcSampler {
    pub fn new(channel: &Dmc) -> Self {
        let cdf = channel
            .matrix
            .iter()
            .map(|row| {
                let last = row.iter().rposition(|&w| w > 0.0).unwrap_or(0);
                let mut acc = 0.0;
                row.iter()
                    .enumerate()
                    .map(|(b, &w)| {
                        acc += w;
                        if b >= last {
                            f64::INFINITY
                        } else {
                            acc
                        }
                    })
                    .collect()
            })
            .collect();
        DmcSampler { cdf }
    }

    #[inline]
    pub fn sample_letter(&self, x: Letter, rng: &mut Rng) -> Letter {
        let u: f64 = rng.random();
        let row = &self.cdf[x];
        row.iter().position(|&c| u < c).unwrap_or(row.len() - 1)
    }

    /// Fill `out` with one channel use per input letter.
    pub fn sample_into(&self, x: &[Letter], out: &mut Vec<Letter>, rng: &mut Rng) {
        out.clear();
        out.extend(x.iter().map(|&a| self.sample_letter(a, rng)));
    }
}

/// Pass a codeword through the channel `W^n`.
pub fn transmit_dmc(channel: &Dmc, codeword: &[Letter], rng: &mut Rng) -> Result<Vec<Letter>> {
    channel.check_word(codeword)?;
    let sampler = DmcSampler::new(channel);
    let mut y = Vec::with_capacity(codeword.len());
    sampler.sample_into(codeword, &mut y, rng);
    Ok(y)
}

/// `Y = x + Z` with `Z ~ N(0, σ² I)` and power constraint `‖x‖² <= nA`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussSchema", into = "GaussSchema")]
pub struct GaussChannel {
    noise_variance: f64,
    power: f64,
}

#[derive(Serialize, Deserialize)]
struct GaussSchema {
    sigma2: f64,
    power: f64,
}

impl TryFrom<GaussSchema> for GaussChannel {
    type Error = Error;
    fn try_from(s: GaussSchema) -> Result<Self> {
        GaussChannel::new(s.sigma2, s.power)
    }
}

impl From<GaussChannel> for GaussSchema {
    fn from(g: GaussChannel) -> Self {
        GaussSchema {
            sigma2: g.noise_variance,
            power: g.power,
        }
    }
}

/// Slack on the power check, absorbing rounding in `‖x‖²`.
pub const POWER_SLACK: f64 = 1e-9;

impl GaussChannel {
    pub fn new(noise_variance: f64, power: f64) -> Result<Self> {
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(Error::domain(format!("noise variance must be positive, got {noise_variance}")));
        }
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::domain(format!("power must be positive, got {power}")));
        }
        Ok(GaussChannel {
            noise_variance,
            power,
        })
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn power(&self) -> f64 {
        self.power
    }
}

/// Add i.i.d. `N(0, σ²)` noise to every coordinate.
pub fn transmit_gauss(channel: &GaussChannel, codeword: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
    let energy: f64 = codeword.iter().map(|v| v * v).sum();
    let n = codeword.len() as f64;
    if energy > n * channel.power + POWER_SLACK {
        return Err(Error::domain(format!(
            "codeword energy {energy} exceeds n·A = {}",
            n * channel.power
        )));
    }
    let sd = channel.noise_variance.sqrt();
    Ok(codeword
        .iter()
        .map(|&x| {
            let z: f64 = rng.sample(StandardNormal);
            x + sd * z
        })
        .collect())
}
