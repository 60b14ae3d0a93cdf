//! Resonance quadratic forms, GCD sums, the Gál product, `A(N, sigma)` and
//! the Rankin tail bound.

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::construct::{FactoredInt, ResonatorSet};
use crate::error::{Error, Result};
use crate::math::log2;
use crate::primes::PrimeTable;
use crate::sum::KahanSum;

// Slack toward inclusion on `log k <= log kLimit`.
const K_SLACK: f64 = 1e-12;

/// Largest factor count for which `rankin_tail` enumerates divisors.
pub const RANKIN_MAX_FACTORS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadFormReport {
    /// `sum_{n in M, mk = n, k <= kLimit} f(n) f(m) / k^sigma`
    pub numerator: f64,
    /// `sum_{n in M} f(n)^2`
    pub denominator: f64,
    pub ratio: f64,
    pub term_count: u64,
    /// `null` in JSON when unbounded.
    #[serde(serialize_with = "ser_limit", deserialize_with = "de_limit")]
    pub k_limit: f64,
}

fn ser_limit<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

fn de_limit<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// Sums `xs` in index order with compensation; used after every parallel map
/// so results do not depend on scheduling.
fn ordered_sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<KahanSum>().value()
}

/// Exact enumeration of the resonance quadratic form over divisor pairs in the set.
pub fn resonance_ratio(set: &ResonatorSet, sigma: f64, k_limit: f64) -> Result<QuadFormReport> {
    if set.is_empty() {
        return Err(Error::param("resonance ratio of an empty set"));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::domain(format!("sigma must lie in (0,1], got {sigma}")));
    }
    if !(k_limit >= 1.0) {
        return Err(Error::param(format!("kLimit must be at least 1, got {k_limit}")));
    }
    let log_limit = k_limit.ln() + K_SLACK;
    let per: Vec<(f64, u64)> = set
        .elements()
        .par_iter()
        .map(|e| {
            let log_n = e.factors.log_value();
            let mut acc = KahanSum::new();
            let mut count = 0u64;
            for m in e.factors.divisors() {
                let log_k = log_n - m.log_value();
                if log_k > log_limit {
                    continue;
                }
                if let Some(fm) = set.weight(&m) {
                    acc.add(fm * (-sigma * log_k).exp());
                    count += 1;
                }
            }
            (e.weight * acc.value(), count)
        })
        .collect();
    let terms: Vec<f64> = per.iter().map(|p| p.0).collect();
    let numerator = ordered_sum(&terms);
    let denominator = set.weight_sq_sum();
    Ok(QuadFormReport {
        numerator,
        denominator,
        ratio: numerator / denominator,
        term_count: per.iter().map(|p| p.1).sum(),
        k_limit,
    })
}

/// `prod_{p <= x} (1 + sum_{nu=1}^{ell-1} (1 - nu/ell) p^(-nu sigma))`.
pub fn gal_ratio_product(table: &PrimeTable, x: f64, ell: u32, sigma: f64) -> Result<f64> {
    check_gal_args(x, ell)?;
    let l = f64::from(ell);
    let mut log = KahanSum::new();
    for &p in table.primes_up_to(x)? {
        let q = (p as f64).powf(-sigma);
        let mut inner = 0.0;
        let mut pw = 1.0;
        for nu in 1..ell {
            pw *= q;
            inner += (1.0 - f64::from(nu) / l) * pw;
        }
        log.add(inner.ln_1p());
    }
    Ok(log.value().exp())
}

/// `prod_{p <= x} (1 + p^-sigma)^(1 - 1/ell)`.
pub fn gal_bernoulli_lower(table: &PrimeTable, x: f64, ell: u32, sigma: f64) -> Result<f64> {
    check_gal_args(x, ell)?;
    let e = 1.0 - 1.0 / f64::from(ell);
    let log: KahanSum = table
        .primes_up_to(x)?
        .iter()
        .map(|&p| e * (p as f64).powf(-sigma).ln_1p())
        .collect();
    Ok(log.value().exp())
}

fn check_gal_args(x: f64, ell: u32) -> Result<()> {
    if !(x >= 2.0) {
        return Err(Error::domain(format!("x must be at least 2, got {x}")));
    }
    if ell < 1 {
        return Err(Error::param("ell must be at least 1"));
    }
    Ok(())
}

/// `(m, n)^(2 sigma) / (mn)^sigma` in logs.
fn gcd_kernel_log(m: &FactoredInt, n: &FactoredInt, sigma: f64) -> f64 {
    sigma * (2.0 * m.gcd(n).log_value() - m.log_value() - n.log_value())
}

fn pairwise<F>(n: usize, row: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let rows: Vec<f64> = (0..n).into_par_iter().map(row).collect();
    ordered_sum(&rows)
}

/// `sum_{m, n} (m, n)^(2 sigma) / (mn)^sigma`.
pub fn gcd_sum(set: &[FactoredInt], sigma: f64) -> f64 {
    pairwise(set.len(), |i| {
        set.iter()
            .map(|n| gcd_kernel_log(&set[i], n, sigma).exp())
            .collect::<KahanSum>()
            .value()
    })
}

/// `sum f(m) f(n) (m, n)^(2 sigma) / (mn)^sigma / sum f(n)^2`.
pub fn gcd_quadform(set: &ResonatorSet, sigma: f64) -> f64 {
    let el = set.elements();
    let num = pairwise(el.len(), |i| {
        el.iter()
            .map(|e| el[i].weight * e.weight * gcd_kernel_log(&el[i].factors, &e.factors, sigma).exp())
            .collect::<KahanSum>()
            .value()
    });
    num / set.weight_sq_sum()
}

/// `A(N, sigma) = prod_{p in P} (1 + f(p)^2 + f(p) p^-sigma) / (1 + f(p)^2)`.
pub fn a_product(band: &[u64], weights: &[f64], sigma: f64) -> Result<f64> {
    if band.len() != weights.len() {
        return Err(Error::param(format!(
            "{} primes but {} weights",
            band.len(),
            weights.len()
        )));
    }
    let mut log = KahanSum::new();
    for (&p, &w) in band.iter().zip(weights) {
        if !(w > 0.0) {
            return Err(Error::param(format!("f({p}) = {w} is not positive")));
        }
        log.add((w * (p as f64).powf(-sigma) / (1.0 + w * w)).ln_1p());
    }
    Ok(log.value().exp())
}

/// Main term of the lower bound for `A(N, sigma)` with the `o(1)` dropped:
/// `exp(alpha L^(3/2)/(1 + L) (log N)^(1-sigma) / (log2 N)^sigma)`, `L = |log(2 sigma - 1)|`.
pub fn a_lower_bound(n: u64, sigma: f64, alpha: f64) -> Result<f64> {
    if !(sigma > 0.5 && sigma <= 0.75) {
        return Err(Error::domain(format!("sigma must lie in (1/2, 3/4], got {sigma}")));
    }
    let ln = (n as f64).ln();
    let l2 = log2(n as f64);
    if !(l2 > 0.0) {
        return Err(Error::domain(format!("N = {n} too small for log log N > 0")));
    }
    let l = (2.0 * sigma - 1.0).ln().abs();
    Ok((alpha * l.powf(1.5) / (1.0 + l) * ln.powf(1.0 - sigma) / l2.powf(sigma)).exp())
}

/// `log M` for the divisor-restriction threshold
/// `M = exp(e (sqrt|log(2 sigma - 1)| + 3) (log N log2 N)^(1-sigma))`,
/// or `exp(e sqrt(log N log2 N log3 N))` at `sigma = 1/2`.
pub fn rankin_log_threshold(n: u64, sigma: f64) -> f64 {
    let ln = (n as f64).ln();
    let l2 = ln.ln();
    if sigma == 0.5 {
        std::f64::consts::E * (ln * l2 * l2.ln()).sqrt()
    } else {
        let l = (2.0 * sigma - 1.0).ln().abs();
        std::f64::consts::E * (l.sqrt() + 3.0) * (ln * l2).powf(1.0 - sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankinTail {
    /// `sum_{k | n, k >= M} 1 / (f(k) k^sigma)`
    pub exact: f64,
    /// `M^-delta prod_{p | n} (1 + 1 / (p^(sigma - delta) f(p)))`
    pub bound: f64,
}

/// The tail `sum_{k | n, k >= M} 1/(f(k) k^sigma)` and its Rankin bound.
/// `log_m` is `log M`; `f` gives the weight of each prime factor of `n`.
pub fn rankin_tail<F>(n: &FactoredInt, f: F, sigma: f64, log_m: f64, delta: f64) -> Result<RankinTail>
where
    F: Fn(u64) -> f64,
{
    if !n.is_square_free() {
        return Err(Error::param(format!("{n} is not square-free")));
    }
    if !(log_m >= 0.0) {
        return Err(Error::param(format!("M must be at least 1, got log M = {log_m}")));
    }
    if !(delta > 0.0 && delta < sigma) {
        return Err(Error::param(format!("need 0 < delta < sigma, got delta = {delta}")));
    }
    // per-prime log(1 / (f(p) p^sigma)) and log p
    let parts: Vec<(f64, f64)> = n
        .primes()
        .map(|p| {
            let lp = (p as f64).ln();
            (-(f(p).ln()) - sigma * lp, lp)
        })
        .collect();
    let log_bound = -delta * log_m
        + parts
            .iter()
            .map(|&(c, lp)| (c + delta * lp).exp().ln_1p())
            .sum::<f64>();
    let bound = log_bound.exp();
    if parts.len() > RANKIN_MAX_FACTORS {
        return Err(Error::DivisorExplosion {
            factors: parts.len(),
            bound,
        });
    }
    let mut acc = KahanSum::new();
    for mask in 0u64..1 << parts.len() {
        let (mut c, mut lk) = (0.0, 0.0);
        for (i, &(ci, lp)) in parts.iter().enumerate() {
            if mask >> i & 1 == 1 {
                c += ci;
                lk += lp;
            }
        }
        if lk >= log_m - K_SLACK {
            acc.add(c.exp());
        }
    }
    Ok(RankinTail {
        exact: acc.value(),
        bound,
    })
}
