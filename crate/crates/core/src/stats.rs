//! Binomial proportion estimates for Monte Carlo error rates.

use serde::{Deserialize, Serialize};

/// A Monte Carlo proportion with its Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub events: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

const Z95: f64 = 1.959_963_984_540_054;

impl Proportion {
    pub fn new(events: u64, trials: u64) -> Self {
        let (lo, hi) = wilson(events, trials, Z95);
        Proportion {
            events,
            trials,
            estimate: if trials == 0 {
                0.0
            } else {
                events as f64 / trials as f64
            },
            ci_low: lo,
            ci_high: hi,
        }
    }

    /// Plug-in standard error `sqrt(p(1-p)/T)`.
    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let p = self.estimate;
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval for `events / trials`.
pub fn wilson(events: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = events as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if events == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if events == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}
