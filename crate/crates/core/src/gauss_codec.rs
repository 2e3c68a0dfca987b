//! Sphere-packing DI codes for the Gaussian channel.
//!
//! Centers live in the normalized domain `ū = u/√n`, inside the ball of
//! radius `r₁ = √A − √ε`, and are pairwise at least `2r₀ = 2√ε` apart. The
//! packing is built by greedy random saturation: uniform probes in the ball
//! are kept when they clear every existing center, until `probe_budget`
//! consecutive probes are rejected. A saturated packing has its doubled
//! spheres covering the ball, which gives `L ≥ 2^{-n}(r₁/r₀)^n`.
//!
//! Centers are sampled inside radius `r₁` only, a subset of the admissible
//! region (a sphere may stick out of the ball as long as it meets it).
//!
//! The identifier for message `j` accepts `y` when `‖y − u_j‖²/n ≤ σ² + δ`.

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dmc_codec::{with_random_pairs, PairEstimate, SimReport};
use crate::rng::{self, sub_stream, Rng};
use crate::stats::Proportion;
use crate::{Error, Result};

/// Default limit on the predicted packing size `2^{-n}(r₁/r₀)^n`.
pub const DEFAULT_MEMORY_BUDGET: f64 = 4.0e6;

const BUILD_STREAM: u64 = 0;
const VERIFY_STREAM: u64 = 2;
const TRIAL_BLOCK: usize = 256;
/// Verification probes whose exact nearest distance is recorded.
const NEAREST_SAMPLE: u64 = 1000;
/// Grids with more cells than this fall back to a linear scan.
const MAX_GRID_CELLS: usize = 1 << 23;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussCodebook {
    pub n: usize,
    pub power: f64,
    pub epsilon: f64,
    /// Normalized centers `ū_i`.
    pub centers: Vec<Vec<f64>>,
}

/// Evidence that no further sphere fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationCertificate {
    /// Probes drawn by the greedy pass, accepted or not.
    pub probes: u64,
    /// Largest distance to the nearest center over the first 1000 probes of
    /// the final verification pass.
    pub max_min_distance_found: f64,
    /// Every verification probe lay within `2r₀` of a center and the greedy
    /// pass ended on `probe_budget` consecutive rejections.
    pub saturated_at_tolerance: bool,
    pub consecutive_rejections: u64,
    pub verification_probes: u64,
    /// `2^{-n}(r₁/r₀)^n`.
    pub minkowski_bound: f64,
    /// The build stopped at `max_centers`.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussBuildConfig {
    pub n: usize,
    pub power: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Consecutive rejections that end the greedy pass.
    pub probe_budget: u64,
    /// Hard cap on the number of centers.
    pub max_centers: Option<usize>,
    /// Refuse builds whose predicted size exceeds this.
    pub memory_budget: f64,
    /// Size of the independent verification pass; defaults to `probe_budget`.
    pub verification_probes: Option<u64>,
}

impl GaussBuildConfig {
    pub fn new(n: usize, power: f64, epsilon: f64, seed: u64, probe_budget: u64) -> Self {
        GaussBuildConfig {
            n,
            power,
            epsilon,
            seed,
            probe_budget,
            max_centers: None,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            verification_probes: None,
        }
    }
}

impl GaussCodebook {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn small_radius(&self) -> f64 {
        self.epsilon.sqrt()
    }

    pub fn big_radius(&self) -> f64 {
        self.power.sqrt() - self.epsilon.sqrt()
    }

    /// Unnormalized codeword `u_j = √n·ū_j`.
    pub fn codeword(&self, j: usize) -> Vec<f64> {
        let s = (self.n as f64).sqrt();
        self.centers[j].iter().map(|v| v * s).collect()
    }

    /// Check dimensions, the power constraint and pairwise separation.
    pub fn validate(&self) -> Result<()> {
        let sep2 = 4.0 * self.epsilon;
        let r_max = self.power.sqrt() + 1e-12;
        for (i, c) in self.centers.iter().enumerate() {
            if c.len() != self.n {
                return Err(Error::domain(format!("center {i} has dimension {}", c.len())));
            }
            if norm2(c).sqrt() > r_max {
                return Err(Error::domain(format!("center {i} violates the power constraint")));
            }
            if norm2(c).sqrt() > self.big_radius() + self.small_radius() + 1e-12 {
                return Err(Error::domain(format!("center {i} misses the big ball")));
            }
        }
        let reach = self.centers.iter().map(|c| norm2(c).sqrt()).fold(0.0, f64::max);
        let mut packing = Packing::new(self.n, reach, self.small_radius());
        for (i, c) in self.centers.iter().enumerate() {
            if packing.blocked(c) {
                let j = (0..i).find(|&j| dist2(&self.centers[j], c) < sep2).unwrap_or(i);
                return Err(Error::domain(format!("centers {j} and {i} are closer than 2√ε")));
            }
            packing.insert(c);
        }
        Ok(())
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `2^{-n}(r₁/r₀)^n` as a real number.
pub fn minkowski_bound(n: usize, power: f64, epsilon: f64) -> f64 {
    let ratio = (power.sqrt() - epsilon.sqrt()) / epsilon.sqrt();
    (n as f64 * (ratio / 2.0).log2()).exp2()
}

/// Uniform point in the ball of radius `r`: Gaussian direction times
/// `r·U^{1/n}`.
pub fn sample_ball(n: usize, r: f64, rng: &mut Rng, out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let norm = norm2(out).sqrt();
    let u: f64 = rng.random();
    let scale = r * u.powf(1.0 / n as f64) / norm;
    out.iter_mut().for_each(|x| *x *= scale);
}

/// Centers stored flat, with an optional uniform grid of side `2r₀`. Grid
/// buckets are singly linked lists threaded through `next`.
struct Packing {
    n: usize,
    sep2: f64,
    flat: Vec<f64>,
    grid: Option<Grid>,
    // per-dimension search scratch: cell, (gap², step) for the near side,
    // then for the far side
    cell: Vec<usize>,
    near: Vec<(f64, isize)>,
    far: Vec<(f64, isize)>,
}

const EMPTY: u32 = u32::MAX;

struct Grid {
    side: f64,
    origin: f64,
    per_dim: usize,
    strides: Vec<usize>,
    head: Vec<u32>,
    next: Vec<u32>,
    /// Per cell, the two centers that most recently blocked a probe there.
    hints: Vec<[u32; 2]>,
}

impl Packing {
    fn new(n: usize, r1: f64, r0: f64) -> Packing {
        let side = 2.0 * r0;
        let per_dim = ((2.0 * r1 / side).ceil() as usize).max(1);
        let total = (per_dim as f64).powi(n as i32);
        let grid = (total <= MAX_GRID_CELLS as f64).then(|| Grid {
            side,
            origin: -r1,
            per_dim,
            strides: (0..n).map(|d| per_dim.pow(d as u32)).collect(),
            head: vec![EMPTY; per_dim.pow(n as u32)],
            next: Vec::new(),
            hints: vec![[EMPTY; 2]; per_dim.pow(n as u32)],
        });
        Packing {
            n,
            sep2: 4.0 * r0 * r0,
            flat: Vec::new(),
            grid,
            cell: vec![0; n],
            near: vec![(0.0, 0); n],
            far: vec![(0.0, 0); n],
        }
    }

    fn len(&self) -> usize {
        self.flat.len() / self.n.max(1)
    }

    fn center(&self, k: usize) -> &[f64] {
        &self.flat[k * self.n..(k + 1) * self.n]
    }

    fn is_close(&self, k: usize, p: &[f64]) -> bool {
        let mut acc = 0.0;
        for (x, y) in self.center(k).iter().zip(p) {
            acc += (x - y) * (x - y);
            if acc >= self.sep2 {
                return false;
            }
        }
        true
    }

    fn insert(&mut self, p: &[f64]) {
        let k = self.len() as u32;
        self.flat.extend_from_slice(p);
        if let Some(g) = &mut self.grid {
            let idx = g.index_of(p);
            g.next.push(g.head[idx]);
            g.head[idx] = k;
        }
    }

    /// Is `p` strictly closer than `2r₀` to some center? Neighbouring cells
    /// are visited nearest side first and pruned by their gap to `p`.
    fn blocked(&mut self, p: &[f64]) -> bool {
        let Some(g) = &self.grid else {
            return (0..self.len()).any(|k| self.is_close(k, p));
        };
        let home = g.index_of(p);
        for &k in &g.hints[home] {
            if k != EMPTY && self.is_close(k as usize, p) {
                return true;
            }
        }
        let mut base = 0;
        for d in 0..self.n {
            let c = g.coord(p[d]);
            self.cell[d] = c;
            base += c * g.strides[d];
            let left = g.origin + c as f64 * g.side;
            let lo = (p[d] - left).max(0.0);
            let hi = (left + g.side - p[d]).max(0.0);
            let stride = g.strides[d] as isize;
            let down = (if c > 0 { lo * lo } else { f64::INFINITY }, -stride);
            let up = (if c + 1 < g.per_dim { hi * hi } else { f64::INFINITY }, stride);
            if lo <= hi {
                self.near[d] = down;
                self.far[d] = up;
            } else {
                self.near[d] = up;
                self.far[d] = down;
            }
        }
        match self.search(g, p, 0, base, 0.0) {
            Some(k) => {
                let g = self.grid.as_mut().expect("grid present");
                g.hints[home] = [k, g.hints[home][0]];
                true
            }
            None => false,
        }
    }

    /// First center within `2r₀` of `p`, if any.
    fn search(&self, g: &Grid, p: &[f64], d: usize, idx: usize, gap: f64) -> Option<u32> {
        if d == self.n {
            let mut k = g.head[idx];
            while k != EMPTY {
                if self.is_close(k as usize, p) {
                    return Some(k);
                }
                k = g.next[k as usize];
            }
            return None;
        }
        if let Some(k) = self.search(g, p, d + 1, idx, gap) {
            return Some(k);
        }
        for &(g2, step) in [self.near[d], self.far[d]].iter() {
            let total = gap + g2;
            if total < self.sep2 {
                if let Some(k) = self.search(g, p, d + 1, idx.wrapping_add_signed(step), total) {
                    return Some(k);
                }
            }
        }
        None
    }

    fn nearest_distance(&self, p: &[f64]) -> f64 {
        (0..self.len())
            .map(|k| dist2(self.center(k), p))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }
}

impl Grid {
    fn coord(&self, x: f64) -> usize {
        let c = ((x - self.origin) / self.side).floor();
        (c.max(0.0) as usize).min(self.per_dim - 1)
    }

    fn index_of(&self, p: &[f64]) -> usize {
        p.iter().zip(&self.strides).map(|(&x, s)| self.coord(x) * s).sum()
    }
}

/// Greedy random saturation followed by an independent verification pass.
/// Uncovered verification probes are added and the greedy pass resumes.
pub fn build_gauss_codebook(cfg: &GaussBuildConfig) -> Result<(GaussCodebook, SaturationCertificate)> {
    let GaussBuildConfig { n, power, epsilon, .. } = *cfg;
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    if !(epsilon > 0.0) || !(power > 0.0) {
        return Err(Error::domain("power and epsilon must be positive"));
    }
    if epsilon >= power {
        return Err(Error::domain(format!("epsilon {epsilon} must be below the power {power}")));
    }
    if cfg.probe_budget == 0 {
        return Err(Error::domain("probe budget must be positive"));
    }
    let bound = minkowski_bound(n, power, epsilon);
    if !(bound <= cfg.memory_budget) {
        return Err(Error::Budget {
            what: "predicted packing size",
            needed: if bound.is_finite() { bound as u128 } else { u128::MAX },
            budget: cfg.memory_budget as u128,
        });
    }
    let r0 = epsilon.sqrt();
    let r1 = power.sqrt() - r0;
    let cap = cfg.max_centers.unwrap_or(usize::MAX);
    let mut packing = Packing::new(n, r1, r0);
    let mut rng = rng::stream(cfg.seed, BUILD_STREAM);
    let mut verify_rng = rng::stream(cfg.seed, VERIFY_STREAM);
    let verification = cfg.verification_probes.unwrap_or(cfg.probe_budget);
    let mut probe = Vec::with_capacity(n);
    let mut probes = 0u64;
    let mut run = 0u64;
    let mut truncated = false;
    let mut max_min = 0.0;
    let mut verified = false;

    'outer: loop {
        while run < cfg.probe_budget {
            if packing.len() >= cap {
                truncated = true;
                break 'outer;
            }
            sample_ball(n, r1, &mut rng, &mut probe);
            probes += 1;
            if packing.blocked(&probe) {
                run += 1;
            } else {
                packing.insert(&probe);
                run = 0;
            }
        }
        let mut clean = true;
        max_min = 0.0f64;
        for v in 0..verification {
            sample_ball(n, r1, &mut verify_rng, &mut probe);
            if packing.blocked(&probe) {
                if v < NEAREST_SAMPLE {
                    max_min = max_min.max(packing.nearest_distance(&probe));
                }
            } else {
                clean = false;
                if packing.len() >= cap {
                    truncated = true;
                    break 'outer;
                }
                packing.insert(&probe);
            }
        }
        if clean {
            verified = true;
            break;
        }
        run = 0;
    }
    if packing.len() == 0 {
        return Err(Error::Construction("no center was placed".into()));
    }
    let centers = packing.flat.chunks(n).map(<[f64]>::to_vec).collect();
    let cert = SaturationCertificate {
        probes,
        max_min_distance_found: max_min,
        saturated_at_tolerance: verified && !truncated,
        consecutive_rejections: run,
        verification_probes: verification,
        minkowski_bound: bound,
        truncated,
    };
    Ok((
        GaussCodebook {
            n,
            power,
            epsilon,
            centers,
        },
        cert,
    ))
}

/// Distance test `‖y − u_j‖²/n ≤ σ² + δ` on the unnormalized output `y`.
pub fn gauss_identify(codebook: &GaussCodebook, sigma2: f64, j: usize, y: &[f64], delta: f64) -> Result<bool> {
    if j >= codebook.len() {
        return Err(Error::domain(format!("message {j} out of range")));
    }
    if y.len() != codebook.n {
        return Err(Error::domain(format!("output has length {}, expected {}", y.len(), codebook.n)));
    }
    Ok(accepts(&codebook.codeword(j), y, sigma2 + delta))
}

fn accepts(u: &[f64], y: &[f64], radius2: f64) -> bool {
    dist2(u, y) / u.len() as f64 <= radius2
}

/// Chebyshev-style reference values for comparison with simulation:
/// `(σ²/(nδ²), 2σ⁴/(nδ²), 16σ²A/(nδ²) + 2σ⁴/(nδ²))`.
pub fn chebyshev_references(n: usize, sigma2: f64, delta: f64, power: f64) -> (f64, f64, f64) {
    let nd2 = n as f64 * delta * delta;
    let variance = 2.0 * sigma2 * sigma2 / nd2;
    (sigma2 / nd2, variance, 16.0 * sigma2 * power / nd2 + variance)
}

/// Monte Carlo type-I and type-II errors of the distance identifier, with
/// the same pair selection and stream layout as the DMC simulator.
pub fn simulate_gauss_errors(
    codebook: &GaussCodebook,
    sigma2: f64,
    delta: f64,
    trials: u64,
    pair_budget: usize,
    seed: u64,
) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    if !(sigma2 >= 0.0) || !(delta >= 0.0) {
        return Err(Error::domain("sigma2 and delta must be nonnegative"));
    }
    let m = codebook.len();
    let words: Vec<Vec<f64>> = (0..m).map(|j| codebook.codeword(j)).collect();
    let pairs = if m < 2 {
        Vec::new()
    } else {
        let mut best = (f64::INFINITY, 0, 1);
        for i in 0..m {
            for j in i + 1..m {
                let d = dist2(&codebook.centers[i], &codebook.centers[j]);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        with_random_pairs((best.1, best.2), m, pair_budget, seed)
    };
    let radius2 = sigma2 + delta;
    let sigma = sigma2.sqrt();
    let n = codebook.n;
    let results: Vec<(u64, Vec<u64>)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mine: Vec<usize> = (0..pairs.len()).filter(|&k| pairs[k].0 == i).collect();
            let mut misses = 0u64;
            let mut hits = vec![0u64; pairs.len()];
            let mut y = vec![0.0; n];
            let blocks = (trials as usize).div_ceil(TRIAL_BLOCK);
            for block in 0..blocks {
                let mut r = rng::stream(seed, sub_stream(i as u64, block as u64));
                let count = TRIAL_BLOCK.min(trials as usize - block * TRIAL_BLOCK);
                for _ in 0..count {
                    for (out, &u) in y.iter_mut().zip(&words[i]) {
                        *out = u + sigma * r.sample::<f64, _>(StandardNormal);
                    }
                    if !accepts(&words[i], &y, radius2) {
                        misses += 1;
                    }
                    for &k in &mine {
                        if accepts(&words[pairs[k].1], &y, radius2) {
                            hits[k] += 1;
                        }
                    }
                }
            }
            (misses, hits)
        })
        .collect();
    let pe1 = results.iter().map(|r| Proportion::new(r.0, trials)).collect();
    let estimates = pairs
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| PairEstimate {
            i,
            j,
            distance: dist2(&codebook.centers[i], &codebook.centers[j]).sqrt(),
            estimate: Proportion::new(results[i].1[k], trials),
        })
        .collect();
    let mut report = SimReport::assemble(pe1, estimates, trials, seed, delta);
    let (pe1, variance, pe2) = chebyshev_references(n, sigma2, delta, codebook.power);
    report.chebyshev_pe1_ref = Some(pe1);
    report.chebyshev_pe1_variance_ref = Some(variance);
    report.chebyshev_pe2_ref = Some(pe2);
    Ok(report)
}
