//! The acceptance suite behind `di-codes verify`.
//!
//! Each check runs one fixed experiment with fixed seeds and reports a
//! pass/fail line with the measured quantities.

use std::time::Instant;

use rand::Rng as _;
use serde::Serialize;

use di_codes::capacity::{self, bsc_capacity_curve, converse_count, di_capacity, estimate_l};
use di_codes::channel::{reduce, Dmc};
use di_codes::discretization::{entropy_curve, gaussian_differential_entropy};
use di_codes::dmc_codec::{
    build_codebook, select_pairs, simulate_code, simulate_errors, BuildConfig, DmcCodebook, Mode,
    TypicalityDecoder,
};
use di_codes::gauss_codec::{build_gauss_codebook, simulate_gauss_errors, GaussBuildConfig};
use di_codes::info::binary_entropy;
use di_codes::rng;
use di_codes::types::DEFAULT_ENUMERATION_BUDGET;

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<28} ({:.1}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

type Check = fn() -> Result<(bool, String), String>;

pub const CRITERIA: [(u8, &str, Check); 12] = [
    (1, "bsc-capacity-curve", bsc_curve),
    (2, "distinct-row-capacity", distinct_rows),
    (3, "reduction-equivalence", reduction_equivalence),
    (4, "construction-invariants", construction),
    (5, "dmc-error-decay", dmc_error_decay),
    (6, "duplicate-codeword-identity", duplicate_codeword),
    (7, "intersection-decay", intersection_decay),
    (8, "converse-counting", converse_counting),
    (9, "gaussian-packing-bound", gaussian_packing),
    (10, "gaussian-error-decay", gaussian_error_decay),
    (11, "discretization-limit", discretization_limit),
    (12, "determinism", determinism),
];

/// Run one criterion by id.
pub fn run(id: u8) -> Option<Outcome> {
    let &(id, name, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = match check() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Some(Outcome {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Run the given criteria (all when `ids` is empty), in id order.
pub fn run_all(ids: &[u8]) -> Vec<Outcome> {
    CRITERIA
        .iter()
        .filter(|c| ids.is_empty() || ids.contains(&c.0))
        .filter_map(|c| run(c.0))
        .collect()
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn bsc_curve() -> Result<(bool, String), String> {
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let curve = bsc_capacity_curve(0.1, &grid).map_err(e)?;
    let mut worst: f64 = 0.0;
    for &a in &grid {
        let c = di_capacity(&Dmc::bsc(0.1, a).map_err(e)?).map_err(e)?.value_bits;
        let closed = if a < 0.5 { binary_entropy(a) } else { 1.0 };
        worst = worst.max((c - closed).abs());
    }
    let curve_worst = curve
        .iter()
        .map(|&(a, c)| (c - if a < 0.5 { binary_entropy(a) } else { 1.0 }).abs())
        .fold(0.0, f64::max);
    let worst = worst.max(curve_worst);
    Ok((worst <= 1e-9, format!("101 grid points, max |error| = {worst:.3e} bits")))
}

fn random_row(r: &mut rng::Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| r.random::<f64>() + 0.01).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Random channel with `distinct` distinct rows, padded with exact copies up
/// to `inputs` rows placed at random positions.
fn channel_with_copies(r: &mut rng::Rng, distinct: usize, inputs: usize, outputs: usize) -> Vec<Vec<f64>> {
    let base: Vec<Vec<f64>> = (0..distinct).map(|_| random_row(r, outputs)).collect();
    let mut rows = base.clone();
    for _ in distinct..inputs {
        let src = r.random_range(0..distinct);
        let at = r.random_range(0..=rows.len());
        rows.insert(at, base[src].clone());
    }
    rows
}

fn distinct_rows() -> Result<(bool, String), String> {
    let mut r = rng::stream(2, 0);
    let mut failures = 0;
    for _ in 0..50 {
        let inputs = r.random_range(2..=8);
        let distinct = r.random_range(1..inputs);
        let outputs = r.random_range(2..=8);
        let rows = channel_with_copies(&mut r, distinct, inputs, outputs);
        let ch = Dmc::unconstrained(rows).map_err(e)?;
        let c = di_capacity(&ch).map_err(e)?.value_bits;
        if c != (distinct as f64).log2() {
            failures += 1;
        }
    }
    Ok((failures == 0, format!("50 channels, {failures} mismatches against log2(distinct rows)")))
}

fn reduction_equivalence() -> Result<(bool, String), String> {
    let mut worst_ratio: f64 = 0.0;
    let mut violations = 0;
    let mut compared = 0;
    for config in 0..20u64 {
        let mut r = rng::stream(3, config);
        let inputs = r.random_range(3..=6);
        let distinct = r.random_range(2..inputs);
        let outputs = r.random_range(2..=4);
        let rows = channel_with_copies(&mut r, distinct, inputs, outputs);
        let cost: Vec<f64> = (0..inputs).map(|_| r.random_range(0..3) as f64).collect();
        let max_cost = cost.iter().copied().fold(0.0, f64::max);
        let ch = Dmc::new(rows, cost, max_cost).map_err(e)?;
        let (reduced, map) = reduce(&ch);

        let mut cfg = BuildConfig::new(16, 0.2, 0.1, Mode::Greedy, 100 + config);
        cfg.backoff = Some(0.0);
        cfg.max_codewords = 8;
        let (book, _) = build_codebook(&ch, &cfg).map_err(e)?;
        let decoder = TypicalityDecoder::new(&book, &ch, 0.2).map_err(e)?;
        // replace each letter by a random member of its class
        let members: Vec<Vec<usize>> = (0..map.num_classes())
            .map(|c| (0..inputs).filter(|&x| map.class_of[x] == c).collect())
            .collect();
        let sent: Vec<Vec<usize>> = book
            .codewords
            .iter()
            .map(|w| {
                w.iter()
                    .map(|&x| {
                        let m = &members[map.class_of[x]];
                        m[r.random_range(0..m.len())]
                    })
                    .collect()
            })
            .collect();
        let projected: Vec<Vec<usize>> = sent.iter().map(|w| map.project(w)).collect();
        let pairs = select_pairs(&book.codewords, 8, 7);
        let seed = 1000 + config;
        let full = simulate_code(&decoder, &sent, &ch, 2000, &pairs, seed).map_err(e)?;
        let red = simulate_code(&decoder, &projected, &reduced, 2000, &pairs, seed).map_err(e)?;
        let estimates = full
            .pe1_per_message
            .iter()
            .zip(&red.pe1_per_message)
            .chain(
                full.pe2_sampled_pairs
                    .iter()
                    .zip(&red.pe2_sampled_pairs)
                    .map(|(a, b)| (&a.estimate, &b.estimate)),
            );
        for (a, b) in estimates {
            compared += 1;
            let diff = (a.estimate - b.estimate).abs();
            let se = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
            if diff > 3.0 * se {
                violations += 1;
            }
            if se > 0.0 {
                worst_ratio = worst_ratio.max(diff / se);
            }
        }
    }
    Ok((
        violations == 0,
        format!("20 configurations, {compared} estimates compared, {violations} beyond 3 SE, max |diff|/SE = {worst_ratio:.2}"),
    ))
}

fn construction() -> Result<(bool, String), String> {
    let ch = Dmc::bsc(0.1, 1.0).map_err(e)?;
    let h = di_capacity(&ch).map_err(e)?.value_bits;
    let mut invalid = 0;
    let mut half_kept = 0;
    let mut min_retained = usize::MAX;
    let mut requested = 0;
    for seed in 0..100 {
        let cfg = BuildConfig::new(200, 0.5 * h, 0.01, Mode::Faithful, seed);
        let (book, report) = build_codebook(&ch, &cfg).map_err(e)?;
        if book.validate(&ch).is_err() {
            invalid += 1;
        }
        if 2 * report.retained >= report.requested {
            half_kept += 1;
        }
        min_retained = min_retained.min(report.retained);
        requested = report.requested;
    }
    Ok((
        invalid == 0 && half_kept >= 99,
        format!(
            "100 seeds, M = {requested} (nominal 2^100), {invalid} invalid, {half_kept} with retained >= M/2, min retained {min_retained}"
        ),
    ))
}

fn dmc_error_decay() -> Result<(bool, String), String> {
    let ch = Dmc::bsc(0.1, 1.0).map_err(e)?;
    let mut rows = Vec::new();
    for &n in &[100usize, 200, 400] {
        let mut cfg = BuildConfig::new(n, 0.5, 0.1, Mode::Faithful, 5);
        cfg.backoff = Some(0.0);
        cfg.max_codewords = 32;
        let (book, _) = build_codebook(&ch, &cfg).map_err(e)?;
        let rep = simulate_errors(&book, &ch, 0.03, 10_000, 64, 55).map_err(e)?;
        rows.push((n, rep));
    }
    let mut ok = true;
    for w in rows.windows(2) {
        let (a, b) = (&w[0].1, &w[1].1);
        let (pa, pb) = (a.worst_pe1().unwrap(), b.worst_pe1().unwrap());
        ok &= pb.ci_low <= pa.ci_high;
        let (qa, qb) = (a.worst_pe2().unwrap(), b.worst_pe2().unwrap());
        ok &= qb.estimate.ci_low <= qa.estimate.ci_high;
    }
    let last = &rows[2].1;
    let closest = &last.pe2_sampled_pairs[0];
    let closest_back = &last.pe2_sampled_pairs[1];
    let pe2_closest = closest.estimate.estimate.max(closest_back.estimate.estimate);
    ok &= pe2_closest < 0.05;
    let summary: Vec<String> = rows
        .iter()
        .map(|(n, r)| format!("n={n}: pe1_max={:.4} pe2_max={:.4}", r.pe1_max, r.pe2_max))
        .collect();
    Ok((
        ok,
        format!("{}; closest-pair pe2 at n=400 = {pe2_closest:.4}", summary.join(", ")),
    ))
}

fn duplicate_codeword() -> Result<(bool, String), String> {
    let ch = Dmc::bsc(0.1, 1.0).map_err(e)?;
    let mut cfg = BuildConfig::new(100, 0.05, 0.1, Mode::Greedy, 6);
    cfg.backoff = Some(0.0);
    cfg.max_codewords = 3;
    let (mut book, _) = build_codebook(&ch, &cfg).map_err(e)?;
    let w = book.codewords[0].clone();
    book.codewords.push(w);
    let i1 = 0;
    let i2 = book.codewords.len() - 1;
    let rep = simulate_errors(&book, &ch, 0.03, 10_000, 16, 66).map_err(e)?;
    let p1 = &rep.pe1_per_message[i1];
    let p2 = &rep.pair(i2, i1).ok_or("duplicated pair was not sampled")?.estimate;
    let sum = p1.estimate + p2.estimate;
    let se = (p1.std_error().powi(2) + p2.std_error().powi(2)).sqrt();
    Ok((
        (sum - 1.0).abs() <= 3.0 * se,
        format!(
            "P_e1(i1) = {:.4}, P_e2(i2,i1) = {:.4}, sum = {sum:.4}, 3 SE = {:.4}",
            p1.estimate,
            p2.estimate,
            3.0 * se
        ),
    ))
}

fn intersection_decay() -> Result<(bool, String), String> {
    let ch = Dmc::bsc(0.1, 1.0).map_err(e)?;
    let fit = estimate_l(&ch, 0.5, 0.15, &[6, 8, 10, 12], DEFAULT_ENUMERATION_BUDGET).map_err(e)?;
    let decreasing = fit.points.windows(2).all(|w| w[1].ratio < w[0].ratio);
    let pts: Vec<String> = fit
        .points
        .iter()
        .map(|p| format!("n={} d={} ratio={:.4}", p.n, p.distance, p.ratio))
        .collect();
    Ok((
        decreasing && fit.l > 0.0,
        format!("{}; strictly decreasing: {decreasing}; L = {:.4}", pts.join(", "), fit.l),
    ))
}

fn converse_counting() -> Result<(bool, String), String> {
    let ch = Dmc::bsc(0.1, 0.3).map_err(e)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for &n in &[10usize, 15, 20] {
        let cc = converse_count(&ch, n, capacity::DEFAULT_TYPE_BUDGET).map_err(e)?;
        let limit = 0.3 * n as f64 + 1e-9;
        let brute = (0u32..1 << n).filter(|w| w.count_ones() as f64 <= limit).count();
        let matches = cc.exact_count == num_bigint::BigUint::from(brute);
        let bounded = cc.log2_count <= cc.bound_log2;
        ok &= matches && bounded;
        parts.push(format!(
            "n={n}: dp={} brute={brute} log2={:.3} <= {:.3}",
            cc.exact_count, cc.log2_count, cc.bound_log2
        ));
    }
    Ok((ok, parts.join(", ")))
}

fn gaussian_packing() -> Result<(bool, String), String> {
    let cfg = GaussBuildConfig::new(6, 1.0, 0.01, 9, 100_000);
    let (book, cert) = build_gauss_codebook(&cfg).map_err(e)?;
    let bound = cert.minkowski_bound.ceil() as usize;
    let valid = book.validate();
    Ok((
        cert.saturated_at_tolerance && book.len() >= bound && valid.is_ok(),
        format!(
            "L = {} centers, bound {bound}, saturated {}, probes {}, invariants {}",
            book.len(),
            cert.saturated_at_tolerance,
            cert.probes,
            if valid.is_ok() { "hold" } else { "violated" }
        ),
    ))
}

fn gaussian_error_decay() -> Result<(bool, String), String> {
    let (sigma2, delta) = (1.0, 0.1);
    let mut ok = true;
    let mut prev: Option<(f64, f64)> = None;
    let mut parts = Vec::new();
    for &n in &[100usize, 1000, 10_000] {
        let mut cfg = GaussBuildConfig::new(n, 2.0, 0.3, 10, 200);
        cfg.max_centers = Some(8);
        let (book, _) = build_gauss_codebook(&cfg).map_err(e)?;
        let rep = simulate_gauss_errors(&book, sigma2, delta, 10_000, 16, 1010).map_err(e)?;
        let worst = rep.worst_pe1().ok_or("empty codebook")?;
        let bound = rep
            .chebyshev_pe1_ref
            .unwrap_or(0.0)
            .max(rep.chebyshev_pe1_variance_ref.unwrap_or(0.0));
        ok &= worst.estimate <= bound + 3.0 * worst.std_error();
        if let Some((_, hi)) = prev {
            ok &= worst.ci_low <= hi;
        }
        prev = Some((worst.estimate, worst.ci_high));
        parts.push(format!(
            "n={n}: L={} pe1_max={:.4} pe2_max={:.4} ref={bound:.3}",
            book.len(),
            rep.pe1_max,
            rep.pe2_max
        ));
    }
    Ok((ok, parts.join(", ")))
}

fn discretization_limit() -> Result<(bool, String), String> {
    let steps: Vec<f64> = (4..=10).map(|k| (-(k as f64)).exp2()).collect();
    let curve = entropy_curve(1.0, 8.0, &steps).map_err(e)?;
    let target = gaussian_differential_entropy(1.0);
    let errs: Vec<f64> = curve.iter().map(|p| (p.h_plus_log2_step - target).abs()).collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let last = *errs.last().unwrap();
    let listed: Vec<String> = errs.iter().map(|x| format!("{x:.2e}")).collect();
    Ok((
        decreasing && last < 0.05,
        format!("|H + log2 Δ - {target:.4}| for k=4..10: [{}]", listed.join(", ")),
    ))
}

fn determinism() -> Result<(bool, String), String> {
    fn twice<T: Serialize>(f: impl Fn() -> Result<T, String>) -> Result<bool, String> {
        let a = serde_json::to_string(&f()?).map_err(e)?;
        let b = serde_json::to_string(&f()?).map_err(e)?;
        Ok(a == b)
    }
    let ch = Dmc::bsc(0.1, 1.0).map_err(e)?;
    let build = || {
        let mut cfg = BuildConfig::new(60, 0.3, 0.1, Mode::Faithful, 12);
        cfg.backoff = Some(0.0);
        cfg.max_codewords = 64;
        build_codebook(&ch, &cfg).map_err(e)
    };
    let book: DmcCodebook = build()?.0;
    let sim = || simulate_errors(&book, &ch, 0.05, 2000, 32, 12).map_err(e);
    let gcfg = GaussBuildConfig::new(3, 1.0, 0.04, 12, 2000);
    let gbuild = || build_gauss_codebook(&gcfg).map_err(e);
    let gbook = gbuild()?.0;
    let gsim = || simulate_gauss_errors(&gbook, 0.5, 0.1, 2000, 32, 12).map_err(e);
    let pooled = |threads: usize| -> Result<String, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(e)?;
        pool.install(|| serde_json::to_string(&sim()?).map_err(e))
    };
    let checks = [
        ("dmc build", twice(build)?),
        ("dmc simulate", twice(sim)?),
        ("gauss build", twice(gbuild)?),
        ("gauss simulate", twice(gsim)?),
        ("thread count", pooled(1)? == pooled(3)?),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    Ok((
        failed.is_empty(),
        if failed.is_empty() {
            "builds and simulations replay bit-for-bit, independent of thread count".to_string()
        } else {
            format!("differing runs: {}", failed.join(", "))
        },
    ))
}
