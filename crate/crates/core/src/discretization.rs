//! Quantising the Gaussian channel into a finite DMC.
//!
//! The discretizer rounds toward zero onto the grid `{−JΔ, …, 0, …, JΔ}` and
//! clips at `±JΔ`, so `|x̂| ≤ |x|`. Applied to `X ~ N(0, A)` it gives an input
//! pmf with `E[X̂²] ≤ A` whose entropy grows like `½·log2(2πeA) − log2 Δ`.
//! Bin probabilities use the complementary error function from `statrs`,
//! evaluated on the tail nearer to the interval so that differences never
//! cancel catastrophically.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::channel::Dmc;
use crate::info::entropy_bits;
use crate::{Error, Result};

/// Rows count as distinct when some entry differs by more than this.
pub const ROW_GAP: f64 = 1e-9;

fn check(step: f64, levels: usize) -> Result<()> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::domain(format!("step must be positive, got {step}")));
    }
    if levels == 0 {
        return Err(Error::domain("levels must be at least 1"));
    }
    Ok(())
}

/// Grid index of the discretized value, in `−J..=J`.
pub fn discretize_index(x: f64, step: f64, levels: usize) -> i64 {
    let j = levels as i64;
    let top = levels as f64 * step;
    if x >= top {
        j
    } else if x <= -top {
        -j
    } else if x >= 0.0 {
        ((x / step).floor() as i64).min(j)
    } else {
        -((-x / step).floor() as i64).min(j)
    }
}

/// Largest grid point not exceeding `|x|` in magnitude, with the sign of `x`,
/// clipped to `±JΔ`.
pub fn discretize_value(x: f64, step: f64, levels: usize) -> f64 {
    discretize_index(x, step, levels) as f64 * step
}

/// Upper tail `P(Z ≥ z)` of a standard normal.
fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// `P(a ≤ Z < b)` for `Z ~ N(mean, var)`; infinite endpoints allowed.
pub fn normal_interval(a: f64, b: f64, mean: f64, var: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let s = var.sqrt();
    let za = (a - mean) / s;
    let zb = (b - mean) / s;
    if za >= 0.0 {
        upper_tail(za) - upper_tail(zb)
    } else if zb <= 0.0 {
        upper_tail(-zb) - upper_tail(-za)
    } else {
        1.0 - upper_tail(-za) - upper_tail(zb)
    }
}

/// Probabilities of `g_{J,Δ}(V)` on the grid `−J..=J` for `V ~ N(mean, var)`.
fn bin_masses(mean: f64, var: f64, step: f64, levels: usize) -> Vec<f64> {
    let j = levels as i64;
    (-j..=j)
        .map(|k| {
            let (lo, hi) = match k {
                k if k == j => (j as f64 * step, f64::INFINITY),
                k if k == -j => (f64::NEG_INFINITY, -(j as f64) * step),
                0 => (-step, step),
                k if k > 0 => (k as f64 * step, (k + 1) as f64 * step),
                k => ((k - 1) as f64 * step, k as f64 * step),
            };
            normal_interval(lo, hi, mean, var)
        })
        .collect()
}

/// Pmf of `X̂` for `X ~ N(0, A)`, indexed from `−JΔ` to `JΔ`.
pub fn input_pmf(power: f64, step: f64, levels: usize) -> Result<Vec<f64>> {
    check(step, levels)?;
    if !(power > 0.0) {
        return Err(Error::domain(format!("power must be positive, got {power}")));
    }
    let mut pmf = bin_masses(0.0, power, step, levels);
    // enforce exact symmetry
    for k in 0..levels {
        let mirrored = pmf[2 * levels - k];
        pmf[k] = mirrored;
    }
    Ok(pmf)
}

/// `H(X̂)` in bits.
pub fn discretized_entropy(power: f64, step: f64, levels: usize) -> Result<f64> {
    Ok(entropy_bits(&input_pmf(power, step, levels)?))
}

/// The grid `{−JΔ, …, JΔ}`.
pub fn grid(step: f64, levels: usize) -> Vec<f64> {
    let j = levels as i64;
    (-j..=j).map(|k| k as f64 * step).collect()
}

/// Default output clip level `J + ⌈4σ/Δ⌉`.
pub fn default_output_levels(levels: usize, sigma2: f64, step: f64) -> usize {
    levels + (4.0 * sigma2.sqrt() / step).ceil() as usize
}

/// The quantised Gaussian channel from `X̂` to `Ỹ = g_{J′,Δ}(X̂ + Z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedChannel {
    pub step: f64,
    pub levels: usize,
    pub levels_out: usize,
    pub power: f64,
    pub sigma2: f64,
    pub grid: Vec<f64>,
    pub input_pmf: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
}

impl DiscretizedChannel {
    /// Build the channel; `levels_out` defaults to [`default_output_levels`].
    pub fn new(power: f64, sigma2: f64, step: f64, levels: usize, levels_out: Option<usize>) -> Result<Self> {
        check(step, levels)?;
        if !(sigma2 > 0.0) {
            return Err(Error::domain(format!("noise variance must be positive, got {sigma2}")));
        }
        let input = input_pmf(power, step, levels)?;
        let levels_out = levels_out.unwrap_or_else(|| default_output_levels(levels, sigma2, step));
        if levels_out == 0 {
            return Err(Error::domain("output levels must be at least 1"));
        }
        let points = grid(step, levels);
        let transition: Vec<Vec<f64>> = points
            .iter()
            .map(|&x| {
                let mut row = bin_masses(x, sigma2, step, levels_out);
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= total);
                row
            })
            .collect();
        for a in 0..transition.len() {
            for b in a + 1..transition.len() {
                let gap = transition[a]
                    .iter()
                    .zip(&transition[b])
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0, f64::max);
                if gap <= ROW_GAP {
                    return Err(Error::Construction(format!(
                        "rows for {} and {} are indistinguishable (gap {gap:e}); use a finer step or more output levels",
                        points[a], points[b]
                    )));
                }
            }
        }
        Ok(DiscretizedChannel {
            step,
            levels,
            levels_out,
            power,
            sigma2,
            grid: points,
            input_pmf: input,
            transition,
        })
    }

    /// `E[X̂²]` under the induced pmf.
    pub fn second_moment(&self) -> f64 {
        self.grid.iter().zip(&self.input_pmf).map(|(x, p)| x * x * p).sum()
    }

    /// As a [`Dmc`] with cost `x̂²` and constraint `A`.
    pub fn to_dmc(&self) -> Result<Dmc> {
        let cost = self.grid.iter().map(|x| x * x).collect();
        Dmc::new(self.transition.clone(), cost, self.power)
    }
}

/// Discretize the Gaussian channel straight to a [`Dmc`].
pub fn to_dmc(power: f64, sigma2: f64, step: f64, levels: usize, levels_out: Option<usize>) -> Result<Dmc> {
    DiscretizedChannel::new(power, sigma2, step, levels, levels_out)?.to_dmc()
}

/// One point of the entropy-versus-step curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub step: f64,
    pub levels: usize,
    pub h_bits: f64,
    pub h_plus_log2_step: f64,
}

/// `H(X̂)` at each step with `J = ⌈span/Δ⌉`, so the grid reaches `±span`.
pub fn entropy_curve(power: f64, span: f64, steps: &[f64]) -> Result<Vec<EntropyPoint>> {
    steps
        .iter()
        .map(|&step| {
            check(step, 1)?;
            let levels = ((span / step).ceil() as usize).max(1);
            let h = discretized_entropy(power, step, levels)?;
            Ok(EntropyPoint {
                step,
                levels,
                h_bits: h,
                h_plus_log2_step: h + step.log2(),
            })
        })
        .collect()
}

/// `½·log2(2πeA)`, the differential entropy of `N(0, A)` in bits.
pub fn gaussian_differential_entropy(power: f64) -> f64 {
    0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * power).log2()
}
