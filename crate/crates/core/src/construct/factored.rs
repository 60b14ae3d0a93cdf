use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A positive integer stored as its prime factorization.
///
/// Resonator elements overflow native integers almost immediately, so all
/// size comparisons go through `log_value` and all divisibility through the
/// exponent vector. Ordering is by `log_value` with the factor list as a
/// tie-break; equality and hashing use the factor list alone, which agrees
/// with the ordering because equal factor lists produce bit-identical logs.
#[derive(Debug, Clone)]
pub struct FactoredInt {
    factors: Vec<(u64, u32)>,
    log_value: f64,
}

fn log_of(factors: &[(u64, u32)]) -> f64 {
    factors.iter().map(|&(p, e)| f64::from(e) * (p as f64).ln()).sum()
}

impl FactoredInt {
    pub fn one() -> Self {
        Self {
            factors: Vec::new(),
            log_value: 0.0,
        }
    }

    pub fn prime(p: u64) -> Self {
        Self::from_sorted_unchecked(vec![(p, 1)])
    }

    /// Builds from `(prime, exponent)` pairs. Primes must be strictly
    /// increasing and exponents positive; primality is not rechecked.
    pub fn from_factors(factors: Vec<(u64, u32)>) -> Result<Self> {
        for w in factors.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::param(format!(
                    "factor primes must be strictly increasing: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(p, e)) = factors.iter().find(|&&(p, e)| p < 2 || e == 0) {
            return Err(Error::param(format!("invalid factor {p}^{e}")));
        }
        Ok(Self::from_sorted_unchecked(factors))
    }

    pub(crate) fn from_sorted_unchecked(factors: Vec<(u64, u32)>) -> Self {
        let log_value = log_of(&factors);
        Self { factors, log_value }
    }

    /// Square-free product of increasing primes.
    pub fn from_primes(primes: &[u64]) -> Self {
        Self::from_sorted_unchecked(primes.iter().map(|&p| (p, 1)).collect())
    }

    /// Factorizes `n` by trial division.
    pub fn from_u64(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("zero has no factorization"));
        }
        let mut factors = Vec::new();
        let mut m = n;
        let mut p = 2u64;
        while p * p <= m {
            if m % p == 0 {
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if m > 1 {
            factors.push((m, 1));
        }
        Ok(Self::from_sorted_unchecked(factors))
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn log_value(&self) -> f64 {
        self.log_value
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn is_square_free(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Exact value when it fits in a `u128`.
    pub fn to_u128(&self) -> Option<u128> {
        let mut acc: u128 = 1;
        for &(p, e) in &self.factors {
            for _ in 0..e {
                acc = acc.checked_mul(u128::from(p))?;
            }
        }
        Some(acc)
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .binary_search_by_key(&p, |&(q, _)| q)
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    /// Whether `self` divides `other`.
    pub fn divides(&self, other: &FactoredInt) -> bool {
        let mut j = 0;
        for &(p, e) in &self.factors {
            while j < other.factors.len() && other.factors[j].0 < p {
                j += 1;
            }
            match other.factors.get(j) {
                Some(&(q, f)) if q == p && f >= e => j += 1,
                _ => return false,
            }
        }
        true
    }

    pub fn gcd(&self, other: &FactoredInt) -> FactoredInt {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (p, e) = self.factors[i];
            let (q, f) = other.factors[j];
            match p.cmp(&q) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    out.push((p, e.min(f)));
                    i += 1;
                    j += 1;
                }
            }
        }
        FactoredInt::from_sorted_unchecked(out)
    }

    /// `self * other`.
    pub fn mul(&self, other: &FactoredInt) -> FactoredInt {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() || j < other.factors.len() {
            match (self.factors.get(i), other.factors.get(j)) {
                (Some(&(p, e)), Some(&(q, f))) => match p.cmp(&q) {
                    Ordering::Less => {
                        out.push((p, e));
                        i += 1;
                    }
                    Ordering::Greater => {
                        out.push((q, f));
                        j += 1;
                    }
                    Ordering::Equal => {
                        out.push((p, e + f));
                        i += 1;
                        j += 1;
                    }
                },
                (Some(&a), None) => {
                    out.push(a);
                    i += 1;
                }
                (None, Some(&b)) => {
                    out.push(b);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        FactoredInt::from_sorted_unchecked(out)
    }

    /// `self / d` when `d` divides `self`.
    pub fn checked_div(&self, d: &FactoredInt) -> Option<FactoredInt> {
        if !d.divides(self) {
            return None;
        }
        let out = self
            .factors
            .iter()
            .filter_map(|&(p, e)| {
                let r = e - d.exponent_of(p);
                (r > 0).then_some((p, r))
            })
            .collect();
        Some(FactoredInt::from_sorted_unchecked(out))
    }

    /// The divisors obtained by lowering exactly one exponent by one.
    pub fn maximal_proper_divisors(&self) -> Vec<FactoredInt> {
        (0..self.factors.len())
            .map(|i| {
                let mut f = self.factors.clone();
                if f[i].1 == 1 {
                    f.remove(i);
                } else {
                    f[i].1 -= 1;
                }
                FactoredInt::from_sorted_unchecked(f)
            })
            .collect()
    }

    /// Number of divisors, saturating.
    pub fn divisor_count(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(_, e)| acc.saturating_mul(u64::from(e) + 1))
    }

    /// All divisors, visited by odometer over the exponent vector.
    pub fn divisors(&self) -> Divisors<'_> {
        Divisors {
            base: self,
            exps: vec![0; self.factors.len()],
            done: false,
        }
    }
}

pub struct Divisors<'a> {
    base: &'a FactoredInt,
    exps: Vec<u32>,
    done: bool,
}

impl Iterator for Divisors<'_> {
    type Item = FactoredInt;

    fn next(&mut self) -> Option<FactoredInt> {
        if self.done {
            return None;
        }
        let current = FactoredInt::from_sorted_unchecked(
            self.base
                .factors
                .iter()
                .zip(&self.exps)
                .filter(|(_, &e)| e > 0)
                .map(|(&(p, _), &e)| (p, e))
                .collect(),
        );
        // advance
        let mut i = 0;
        loop {
            if i == self.exps.len() {
                self.done = true;
                break;
            }
            if self.exps[i] < self.base.factors[i].1 {
                self.exps[i] += 1;
                break;
            }
            self.exps[i] = 0;
            i += 1;
        }
        Some(current)
    }
}

impl PartialEq for FactoredInt {
    fn eq(&self, other: &Self) -> bool {
        self.factors == other.factors
    }
}

impl Eq for FactoredInt {}

impl Hash for FactoredInt {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.factors.hash(state);
    }
}

impl PartialOrd for FactoredInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FactoredInt {
    fn cmp(&self, other: &Self) -> Ordering {
        self.log_value
            .total_cmp(&other.log_value)
            .then_with(|| self.factors.cmp(&other.factors))
    }
}

impl std::fmt::Display for FactoredInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl Serialize for FactoredInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.factors.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FactoredInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let factors = Vec::<(u64, u32)>::deserialize(d)?;
        FactoredInt::from_factors(factors).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fi(n: u64) -> FactoredInt {
        FactoredInt::from_u64(n).unwrap()
    }

    #[test]
    fn factorization_and_log() {
        let n = fi(360);
        assert_eq!(n.factors(), &[(2, 3), (3, 2), (5, 1)]);
        assert!((n.log_value() - 360f64.ln()).abs() < 1e-12 * 360f64.ln());
        assert_eq!(n.to_u128(), Some(360));
        assert_eq!(fi(1), FactoredInt::one());
    }

    #[test]
    fn rejects_malformed_factor_lists() {
        assert!(FactoredInt::from_factors(vec![(3, 1), (2, 1)]).is_err());
        assert!(FactoredInt::from_factors(vec![(2, 0)]).is_err());
        assert!(FactoredInt::from_factors(vec![(1, 1)]).is_err());
    }

    #[test]
    fn divisors_of_36() {
        let mut ds: Vec<u128> = fi(36).divisors().map(|d| d.to_u128().unwrap()).collect();
        ds.sort();
        assert_eq!(ds, vec![1, 2, 3, 4, 6, 9, 12, 18, 36]);
        assert_eq!(fi(36).divisor_count(), 9);
    }

    #[test]
    fn maximal_proper_divisors() {
        let ds: Vec<u128> = fi(12)
            .maximal_proper_divisors()
            .iter()
            .map(|d| d.to_u128().unwrap())
            .collect();
        assert_eq!(ds, vec![6, 4]);
    }

    #[test]
    fn huge_values_order_by_log() {
        let big = FactoredInt::from_primes(&[1009, 1013, 1019, 1021, 1031, 1033, 1039]);
        assert!(big.to_u128().is_none() || big.to_u128().unwrap() > u64::MAX as u128);
        let bigger = big.mul(&FactoredInt::prime(2));
        assert!(bigger > big);
        assert!(big.divides(&bigger));
        assert_eq!(bigger.checked_div(&big).unwrap(), FactoredInt::prime(2));
    }

    proptest! {
        #[test]
        fn arithmetic_matches_integers(a in 1u64..5000, b in 1u64..5000) {
            let (x, y) = (fi(a), fi(b));
            let g = num_gcd(a, b);
            prop_assert_eq!(x.gcd(&y).to_u128().unwrap(), g as u128);
            prop_assert_eq!(x.mul(&y).to_u128().unwrap(), (a as u128) * (b as u128));
            prop_assert_eq!(x.divides(&y), b % a == 0);
            prop_assert_eq!(x.cmp(&y), a.cmp(&b));
            if b % a == 0 {
                prop_assert_eq!(y.checked_div(&x).unwrap().to_u128().unwrap(), (b / a) as u128);
            }
        }
    }

    fn num_gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
}
