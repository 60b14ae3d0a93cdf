//! Divisor sets of `K(x, ell) = prod_{p <= x} p^(ell-1)` with unit weights.

use super::{ConstructionParams, FactoredInt, ResonatorSet, SetKind};
use crate::error::{Error, Result};
use crate::math::log2;
use crate::primes::PrimeTable;

/// All divisors of `K(x, ell)`, weight 1 each. The cardinality `ell^pi(x)`
/// is checked against `cap` before anything is enumerated.
pub fn gal_divisor_set(table: &PrimeTable, x: f64, ell: u32, cap: u64) -> Result<ResonatorSet> {
    if ell < 1 {
        return Err(Error::param("ell must be at least 1"));
    }
    let primes = table.primes_up_to(x)?;
    let log_size = primes.len() as f64 * f64::from(ell).ln();
    if log_size > (cap as f64).ln() + 1e-9 {
        return Err(Error::SizeOverflow {
            predicted: log_size.exp(),
            description: format!("{ell}^{}", primes.len()),
            cap,
        });
    }
    let mut elements = Vec::with_capacity(log_size.exp().round() as usize);
    let mut exps = vec![0u32; primes.len()];
    loop {
        elements.push(FactoredInt::from_sorted_unchecked(
            primes
                .iter()
                .zip(&exps)
                .filter(|(_, &e)| e > 0)
                .map(|(&p, &e)| (p, e))
                .collect(),
        ));
        let mut i = 0;
        while i < exps.len() && exps[i] + 1 == ell {
            exps[i] = 0;
            i += 1;
        }
        if i == exps.len() {
            break;
        }
        exps[i] += 1;
    }
    ResonatorSet::unit_weights(elements, SetKind::GalDivisors, ConstructionParams::gal(x, ell, cap, 1.0))
}

/// `x = log T / (2 log log T)` and `ell = [log log T]`.
pub fn gal_params_for(t: f64) -> Result<(f64, u32)> {
    let l2 = log2(t);
    if !(l2 > 1.0) {
        return Err(Error::domain(format!(
            "gal parameters need T > e^e, got T = {t}"
        )));
    }
    let x = t.ln() / (2.0 * l2);
    let ell = (l2 + 1e-12).floor() as u32;
    Ok((x, ell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::sieve_primes;

    fn values(s: &ResonatorSet) -> Vec<u128> {
        let mut v: Vec<u128> = s.iter().map(|(n, _)| n.to_u128().unwrap()).collect();
        v.sort();
        v
    }

    #[test]
    fn divisors_of_30() {
        let t = sieve_primes(100).unwrap();
        let s = gal_divisor_set(&t, 5.0, 2, 1000).unwrap();
        assert_eq!(values(&s), vec![1, 2, 3, 5, 6, 10, 15, 30]);
        assert!(s.iter().all(|(_, w)| w == 1.0));
        assert!(s.is_divisor_closed());
    }

    #[test]
    fn ell_one_is_singleton() {
        let t = sieve_primes(100).unwrap();
        assert_eq!(values(&gal_divisor_set(&t, 2.0, 1, 10).unwrap()), vec![1]);
    }

    #[test]
    fn divisors_of_36() {
        let t = sieve_primes(100).unwrap();
        let s = gal_divisor_set(&t, 3.0, 3, 100).unwrap();
        let oracle: Vec<u128> = (1..=36u128).filter(|d| 36 % d == 0).collect();
        assert_eq!(values(&s), oracle);
    }

    #[test]
    fn cardinality_is_ell_to_pi() {
        let t = sieve_primes(100).unwrap();
        for ell in 1..=4u32 {
            for x in [2.0, 3.0, 7.5, 13.0] {
                let s = gal_divisor_set(&t, x, ell, 1 << 20).unwrap();
                let pi = t.pi(x).unwrap() as u32;
                assert_eq!(s.len() as u64, u64::from(ell).pow(pi));
                assert!(s.is_divisor_closed());
            }
        }
    }

    #[test]
    fn overflow_is_reported_before_enumeration() {
        let t = sieve_primes(1000).unwrap();
        let err = gal_divisor_set(&t, 100.0, 3, 1_000_000).unwrap_err();
        match err {
            Error::SizeOverflow { description, .. } => assert_eq!(description, "3^25"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn params_for_t() {
        let (x, ell) = gal_params_for(std::f64::consts::E.powf(std::f64::consts::E.powi(2))).unwrap();
        assert!((x - std::f64::consts::E.powi(2) / 4.0).abs() < 1e-9);
        assert_eq!(ell, 2);

        let (x, ell) = gal_params_for(1e6).unwrap();
        let lt = 1e6f64.ln();
        assert!((x - lt / (2.0 * lt.ln())).abs() < 1e-12);
        assert_eq!(ell, 2);

        assert_eq!(gal_params_for(1e100).unwrap().1, 5);
        assert!(gal_params_for(15.0).is_err());
    }
}
