//! Scalar information measures and combinatorial helpers (base 2).

use num_bigint::BigUint;
use num_traits::One;

/// Shannon entropy of a pmf in bits. Zero entries contribute nothing.
pub fn entropy_bits(pmf: &[f64]) -> f64 {
    pmf.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Binary entropy `H2(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// Entropy of an integer count vector viewed as a pmf.
pub fn entropy_of_counts(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// `log2 C(n, k)` via log-gamma.
pub fn log2_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let ln = statrs::function::gamma::ln_gamma(n as f64 + 1.0)
        - statrs::function::gamma::ln_gamma(k as f64 + 1.0)
        - statrs::function::gamma::ln_gamma((n - k) as f64 + 1.0);
    ln / std::f64::consts::LN_2
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Exact multinomial coefficient `n! / prod(c!)` with `n = sum(c)`.
pub fn multinomial(counts: &[usize]) -> BigUint {
    let mut acc = BigUint::one();
    let mut filled = 0u64;
    for &c in counts {
        filled += c as u64;
        acc *= binomial(filled, c as u64);
    }
    acc
}

/// `log2` of a big unsigned integer (exact for values that fit in f64 range).
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        let f: f64 = x.to_string().parse().unwrap_or(f64::INFINITY);
        if f.is_finite() {
            return f.log2();
        }
    }
    // keep the top 64 bits
    let shift = bits - 64;
    let top = (x >> shift).iter_u64_digits().next().unwrap_or(0);
    (top as f64).log2() + shift as f64
}
