//! Small numeric helpers shared across modules.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `log log x`, or NaN when undefined.
pub fn log2(x: f64) -> f64 {
    x.ln().ln()
}

/// `log log log x`, or NaN when undefined.
pub fn log3(x: f64) -> f64 {
    x.ln().ln().ln()
}

/// Natural log of the binomial coefficient `C(m, n)`.
pub fn ln_binomial(m: u64, n: u64) -> f64 {
    if n > m {
        return f64::NEG_INFINITY;
    }
    let n = n.min(m - n);
    (1..=n)
        .map(|i| ((m - n + i) as f64 / i as f64).ln())
        .sum()
}

/// `log(sum exp(x_i))`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}
