//! Prime generation, prime counting, prime bands and Mertens products.

use crate::error::{Error, Result};

/// Largest sieve limit accepted by [`sieve_primes`].
pub const DEFAULT_SIEVE_CAP: u64 = 200_000_000;

const SEGMENT: u64 = 1 << 18;

/// An immutable list of all primes up to `limit`.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

/// Sieve all primes up to `limit` with the default memory cap.
pub fn sieve_primes(limit: u64) -> Result<PrimeTable> {
    sieve_primes_capped(limit, DEFAULT_SIEVE_CAP)
}

/// Segmented sieve of Eratosthenes; memory is `O(sqrt(limit) + segment)`
/// beyond the output list itself.
pub fn sieve_primes_capped(limit: u64, cap: u64) -> Result<PrimeTable> {
    if limit == 0 {
        return Err(Error::param("sieve limit must be at least 1"));
    }
    if limit > cap {
        return Err(Error::Resource { limit, cap });
    }
    let root = isqrt(limit);
    let base = simple_sieve(root);
    let mut primes = Vec::with_capacity(estimate_count(limit));
    let mut mark = vec![true; SEGMENT as usize];
    let mut low = 2u64;
    while low <= limit {
        let high = (low + SEGMENT - 1).min(limit);
        let len = (high - low + 1) as usize;
        mark[..len].iter_mut().for_each(|m| *m = true);
        for &p in &base {
            if p * p > high {
                break;
            }
            let mut start = (p * p).max(low.div_ceil(p) * p);
            while start <= high {
                mark[(start - low) as usize] = false;
                start += p;
            }
        }
        primes.extend(
            mark[..len]
                .iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(i, _)| low + i as u64),
        );
        low = high + 1;
    }
    Ok(PrimeTable { limit, primes })
}

fn simple_sieve(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut is = vec![true; n + 1];
    is[0] = false;
    is[1] = false;
    let mut i = 2;
    while i * i <= n {
        if is[i] {
            let mut j = i * i;
            while j <= n {
                is[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    is.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u64)
        .collect()
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn estimate_count(limit: u64) -> usize {
    if limit < 17 {
        return 8;
    }
    let x = limit as f64;
    (1.26 * x / x.ln()) as usize
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    fn check(&self, x: f64) -> Result<()> {
        if x.is_nan() || x > self.limit as f64 {
            return Err(Error::InsufficientTable {
                limit: self.limit,
                requested: x,
            });
        }
        Ok(())
    }

    /// Number of primes `<= x`.
    pub fn pi(&self, x: f64) -> Result<usize> {
        self.check(x)?;
        Ok(self.primes.partition_point(|&p| (p as f64) <= x))
    }

    /// All primes `<= x`.
    pub fn primes_up_to(&self, x: f64) -> Result<&[u64]> {
        let n = self.pi(x)?;
        Ok(&self.primes[..n])
    }

    /// Primes in the half-open band `lo < p <= hi`. An empty band
    /// (`hi <= lo`) is not an error.
    pub fn primes_in_band(&self, lo: f64, hi: f64) -> Result<&[u64]> {
        self.check(hi)?;
        if hi <= lo {
            return Ok(&[]);
        }
        let start = self.primes.partition_point(|&p| (p as f64) <= lo);
        let end = self.primes.partition_point(|&p| (p as f64) <= hi);
        Ok(&self.primes[start..end.max(start)])
    }

    /// `prod_{p <= x} (1 - 1/p)^{-1}`, evaluated as `exp(-sum log(1 - 1/p))`.
    pub fn mertens_product(&self, x: f64) -> Result<f64> {
        if !(x >= 2.0) {
            return Err(Error::domain(format!("mertens_product needs x >= 2, got {x}")));
        }
        let s: crate::sum::KahanSum = self
            .primes_up_to(x)?
            .iter()
            .map(|&p| -(-1.0 / p as f64).ln_1p())
            .collect();
        Ok(s.value().exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limit_one_is_empty() {
        let t = sieve_primes(1).unwrap();
        assert!(t.primes().is_empty());
        assert_eq!(t.pi(1.0).unwrap(), 0);
    }

    #[test]
    fn limit_ten() {
        let t = sieve_primes(10).unwrap();
        assert_eq!(t.primes(), &[2, 3, 5, 7]);
        assert_eq!(t.pi(10.0).unwrap(), 4);
        assert_eq!(t.pi(6.5).unwrap(), 3);
    }

    #[test]
    fn zero_limit_rejected() {
        assert!(matches!(sieve_primes(0), Err(Error::Parameter(_))));
    }

    #[test]
    fn cap_is_enforced() {
        let err = sieve_primes_capped(1000, 999).unwrap_err();
        assert!(matches!(err, Error::Resource { limit: 1000, cap: 999 }));
    }

    #[test]
    fn segment_boundaries_are_seamless() {
        // Straddle two segments.
        let n = SEGMENT * 2 + 17;
        let t = sieve_primes(n).unwrap();
        let reference = simple_sieve(n);
        assert_eq!(t.primes(), reference.as_slice());
    }

    #[test]
    fn band_is_half_open() {
        let t = sieve_primes(200).unwrap();
        assert!(t.primes_in_band(2.0, 2.0).unwrap().is_empty());
        assert_eq!(t.primes_in_band(2.0, 7.0).unwrap(), &[3, 5, 7]);
        assert_eq!(
            t.primes_in_band(100.0, 150.0).unwrap(),
            &[101, 103, 107, 109, 113, 127, 131, 137, 139, 149]
        );
    }

    #[test]
    fn band_beyond_table_is_an_error() {
        let t = sieve_primes(100).unwrap();
        assert!(matches!(
            t.primes_in_band(10.0, 101.0),
            Err(Error::InsufficientTable { .. })
        ));
    }

    #[test]
    fn mertens_small_cases() {
        let t = sieve_primes(100).unwrap();
        assert!((t.mertens_product(2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((t.mertens_product(10.0).unwrap() - 35.0 / 8.0).abs() < 1e-13);
        assert!(t.mertens_product(1.5).is_err());
    }

    #[test]
    fn isqrt_exact() {
        for n in [0u64, 1, 2, 3, 4, 15, 16, 17, 999_999_999_999, u32::MAX as u64 * 3] {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
    }
}
