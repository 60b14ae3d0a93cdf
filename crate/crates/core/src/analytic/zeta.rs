//! Pointwise evaluation of zeta and of the partial sums `D_M`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::KahanComplex;

/// Smallest `|1 - s|` accepted by [`zeta_approx`].
pub const POLE_GUARD: f64 = 1e-6;

/// Largest `|t|` for which [`zeta_oracle`] meets its accuracy target.
pub const ORACLE_T_MAX: f64 = 1e4;

/// `sum_{n <= x} n^-s - x^(1-s)/(1-s)`, `s = sigma + it`; the error is
/// `O(x^-sigma)` uniformly for `sigma >= sigma_0 > 0`, `|t| <= x`.
pub fn zeta_approx(sigma: f64, t: f64, x: f64) -> Result<Complex64> {
    if !(sigma >= 0.1) {
        return Err(Error::domain(format!("zeta_approx needs sigma >= 0.1, got {sigma}")));
    }
    if !(x >= 2.0) {
        return Err(Error::domain(format!("zeta_approx needs x >= 2, got {x}")));
    }
    if t.abs() > x {
        return Err(Error::domain(format!("zeta_approx needs |t| <= x, got t = {t}, x = {x}")));
    }
    let one_minus_s = Complex64::new(1.0 - sigma, -t);
    if one_minus_s.norm() < POLE_GUARD {
        return Err(Error::NearPole {
            distance: one_minus_s.norm(),
        });
    }
    let mut acc = KahanComplex::new();
    for n in 1..=(x.floor() as u64) {
        let ln = (n as f64).ln();
        let (s, c) = (t * ln).sin_cos();
        acc.add(Complex64::new(c, -s) * (-sigma * ln).exp());
    }
    Ok(acc.value() - correction(sigma, t, x))
}

/// `x^(1-s) / (1-s)`.
pub(crate) fn correction(sigma: f64, t: f64, x: f64) -> Complex64 {
    let lx = x.ln();
    let (s, c) = (t * lx).sin_cos();
    Complex64::new(c, -s) * ((1.0 - sigma) * lx).exp() / Complex64::new(1.0 - sigma, -t)
}

/// Number of terms for the accelerated eta series at height `t`.
fn oracle_terms(sigma: f64, t: f64) -> usize {
    let at = t.abs();
    let need = std::f64::consts::FRAC_PI_2 * at
        + (1.0 + 2.0 * at).ln()
        + 3f64.ln()
        + 25.0 * std::f64::consts::LN_10
        + (0.5 - sigma).max(0.0) * at.max(1.0).ln();
    (need / (3.0 + 8f64.sqrt()).ln()).ceil() as usize + 1
}

/// Coefficients `e_k = (d_n - d_k)/d_n` of Borwein's acceleration, k = 0..n-1.
fn borwein_weights(n: usize) -> Vec<f64> {
    // c_i = (n+i-1)! 4^i / ((n-i)! (2i)!), so d_k = n sum_{i<=k} c_i
    let nf = n as f64;
    let mut logc = Vec::with_capacity(n + 1);
    logc.push(-(nf.ln()));
    for i in 1..=n {
        let fi = i as f64;
        let r = 4.0 * (nf + fi - 1.0) * (nf - fi + 1.0) / ((2.0 * fi) * (2.0 * fi - 1.0));
        logc.push(logc[i - 1] + r.ln());
    }
    let top = logc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c: Vec<f64> = logc.iter().map(|l| (l - top).exp()).collect();
    // suffix sums give d_n - d_k without cancellation
    let mut suffix = vec![0.0; n + 2];
    for i in (0..=n).rev() {
        suffix[i] = suffix[i + 1] + c[i];
    }
    let total = suffix[0];
    (0..n).map(|k| suffix[k + 1] / total).collect()
}

/// Reference evaluator: `zeta(s) = eta(s) / (1 - 2^(1-s))` with the eta series
/// accelerated by Borwein's method. Accurate to about `1e-10` for
/// `|t| <= 1e4`, `sigma >= 0.4`.
pub fn zeta_oracle(sigma: f64, t: f64) -> Result<Complex64> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("zeta_oracle needs sigma > 0, got {sigma}")));
    }
    if t.abs() > ORACLE_T_MAX {
        return Err(Error::domain(format!(
            "zeta_oracle is calibrated for |t| <= {ORACLE_T_MAX}, got {t}"
        )));
    }
    // 1 - 2^(1-s)
    let ln2 = std::f64::consts::LN_2;
    let (s2, c2) = (-t * ln2).sin_cos();
    let denom = Complex64::new(1.0, 0.0) - Complex64::new(c2, s2) * ((1.0 - sigma) * ln2).exp();
    if denom.norm() < 1e-8 {
        return Err(Error::RemovableSingularity { sigma, t });
    }
    let n = oracle_terms(sigma, t);
    let e = borwein_weights(n);
    let mut acc = KahanComplex::new();
    for (k, &ek) in e.iter().enumerate() {
        let ln = ((k + 1) as f64).ln();
        let (s, c) = (t * ln).sin_cos();
        let mag = ek * (-sigma * ln).exp();
        let term = Complex64::new(c, -s) * mag;
        acc.add(if k % 2 == 0 { term } else { -term });
    }
    Ok(acc.value() / denom)
}

/// `D_M(t) = sum_{n <= M} n^(-1/2 - it)`.
pub fn partial_sum(m: u64, t: f64) -> Result<Complex64> {
    if m < 1 {
        return Err(Error::param("partial sum length must be at least 1"));
    }
    let mut acc = KahanComplex::new();
    for n in 1..=m {
        let ln = (n as f64).ln();
        let (s, c) = (t * ln).sin_cos();
        acc.add(Complex64::new(c, -s) * (-0.5 * ln).exp());
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    // mpmath zeta at 30 digits; see scripts/oracle_values.py
    const REFERENCE: &[(f64, f64, f64, f64)] = &include!("../../tests/data/zeta_reference.in");

    #[test]
    fn zeta_two() {
        let z = zeta_oracle(2.0, 0.0).unwrap();
        assert!((z.re - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);
        assert!(z.im.abs() < 1e-15);
        let a = zeta_approx(2.0, 0.0, 1e4).unwrap();
        assert!((a.re - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-8);
    }

    #[test]
    fn first_zero() {
        assert!(zeta_oracle(0.5, 14.134725).unwrap().norm() < 1e-4);
        assert!(zeta_approx(0.5, 14.134725, 1e4).unwrap().norm() < 1e-2);
    }

    #[test]
    fn zeta_half_at_zero() {
        let a = zeta_approx(0.5, 0.0, 1e4).unwrap();
        assert!((a.re + 1.4603545).abs() < 1e-2);
        let o = zeta_oracle(0.5, 0.0).unwrap();
        assert!((o.re + 1.460_354_508_809_586_8).abs() < 1e-10);
    }

    #[test]
    fn oracle_matches_reference_values() {
        for &(sigma, t, re, im) in REFERENCE {
            let z = zeta_oracle(sigma, t).unwrap();
            let err = (z - Complex64::new(re, im)).norm();
            assert!(err < 1e-10 * (1.0 + Complex64::new(re, im).norm()), "({sigma}, {t}): {z} vs {re}+{im}i, err {err:e}");
        }
    }

    #[test]
    fn approx_within_stated_error() {
        for &sigma in &[0.5, 0.6, 0.75, 1.0] {
            for &t in &[0.0, 10.0, 100.0, 999.0] {
                if sigma == 1.0 && t == 0.0 {
                    assert!(matches!(zeta_approx(sigma, t, 1000.0), Err(Error::NearPole { .. })));
                    continue;
                }
                let a = zeta_approx(sigma, t, 1000.0).unwrap();
                let o = zeta_oracle(sigma, t).unwrap();
                assert!((a - o).norm() <= 5.0 * 1000f64.powf(-sigma), "({sigma},{t})");
            }
        }
    }

    #[test]
    fn sigma_one_cross_check() {
        let a = zeta_approx(1.0, 1.0, 1e5).unwrap();
        let o = zeta_oracle(1.0, 1.0).unwrap();
        assert!((a - o).norm() < 1e-4);
    }

    #[test]
    fn removable_points_are_refused() {
        let t = 2.0 * std::f64::consts::PI / std::f64::consts::LN_2;
        assert!(matches!(zeta_oracle(1.0, t), Err(Error::RemovableSingularity { .. })));
        assert!(zeta_oracle(1.0, 0.0).is_err());
    }

    #[test]
    fn approx_domain() {
        assert!(zeta_approx(0.05, 1.0, 100.0).is_err());
        assert!(zeta_approx(0.5, 200.0, 100.0).is_err());
        assert!(zeta_approx(0.5, 1.0, 1.0).is_err());
        assert!(zeta_approx(1.0, 1e-7, 100.0).is_err());
        assert!(zeta_approx(1.0, 1e-3, 100.0).is_ok());
    }

    #[test]
    fn partial_sums() {
        assert_eq!(partial_sum(1, 123.4).unwrap(), Complex64::new(1.0, 0.0));
        let v = partial_sum(4, 0.0).unwrap();
        assert!((v.re - 2.784_457_050_376_173_3).abs() < 1e-14);
        assert!(partial_sum(0, 1.0).is_err());
        let bound: f64 = (1..=50).map(|n| (n as f64).powf(-0.5)).sum();
        for i in 0..100 {
            assert!(partial_sum(50, f64::from(i) * 3.7).unwrap().norm() <= bound + 1e-12);
        }
    }
}
