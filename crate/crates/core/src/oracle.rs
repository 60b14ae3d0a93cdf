//! Slow, independent reference implementations used to cross-check the fast
//! paths. Nothing here shares code with the routines it checks.

use crate::construct::ResonatorSet;

/// Primes up to `limit` by trial division.
pub fn primes_by_trial_division(limit: u64) -> Vec<u64> {
    (2..=limit)
        .filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect()
}

/// Prime factorisation by trial division, as `(p, e)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// The resonance quadratic form by looping over all ordered pairs and testing
/// divisibility.
pub fn resonance_ratio_pairwise(set: &ResonatorSet, sigma: f64, k_limit: f64) -> f64 {
    let el = set.elements();
    let mut num = 0.0;
    for n in el {
        for m in el {
            if m.factors.divides(&n.factors) {
                let log_k = n.factors.log_value() - m.factors.log_value();
                if log_k <= k_limit.ln() + 1e-12 {
                    num += n.weight * m.weight * (-sigma * log_k).exp();
                }
            }
        }
    }
    num / el.iter().map(|e| e.weight * e.weight).sum::<f64>()
}

/// `A(N, sigma)` from its definition as a ratio of sums over all square-free
/// products of the band primes.
pub fn a_direct(band: &[u64], weights: &[f64], sigma: f64) -> f64 {
    let k = band.len();
    let f = |mask: u32| -> f64 {
        (0..k).filter(|i| mask >> i & 1 == 1).map(|i| weights[i]).product()
    };
    let val = |mask: u32| -> f64 {
        (0..k)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| band[i] as f64)
            .product()
    };
    let mut den = 0.0;
    let mut num = 0.0;
    for n in 0u32..1 << k {
        let fnn = f(n);
        den += fnn * fnn;
        let mut inner = 0.0;
        // submasks of n, including 0
        let mut d = n;
        loop {
            inner += f(d) * val(d).powf(sigma);
            if d == 0 {
                break;
            }
            d = (d - 1) & n;
        }
        num += fnn / val(n).powf(sigma) * inner;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_division() {
        assert_eq!(primes_by_trial_division(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(97), vec![(97, 1)]);
    }

    #[test]
    fn a_direct_single_prime() {
        let w: f64 = 0.3;
        let want = (1.0 + w * w + w * 7f64.powf(-0.5)) / (1.0 + w * w);
        assert!((a_direct(&[7], &[w], 0.5) - want).abs() < 1e-15);
    }
}
