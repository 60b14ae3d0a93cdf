//! Closed-form main terms: `nu(sigma)`, predicted maxima, Levinson's bound,
//! the prime-sum estimate, `E(T, sigma)`, `W(T, sigma)`, the combined
//! parameter rule and the random-matrix comparator. Every `O(.)`/`o(.)` is
//! dropped; unpinned absolute constants default to 0.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::EULER_GAMMA;
use crate::primes::PrimeTable;
use crate::sum::KahanSum;

/// Edges of the linear blend between the two asymptotic branches of `nu`.
pub const NU_BLEND: (f64, f64) = (0.6, 0.9);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct BoundConstants {
    /// The additive constant in the exponent of the `sigma >= 3/4` bound.
    pub c_intermediate: f64,
    /// The constant `c in (0, 1/2)` of `W(T, 1/2)`.
    pub c_w: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self {
            c_intermediate: 0.0,
            c_w: 0.49,
        }
    }
}

fn logs(t: f64) -> Result<(f64, f64, f64)> {
    if !(t >= 16.0) {
        return Err(Error::domain(format!("T must be at least 16 (log3 T > 0), got {t}")));
    }
    let l1 = t.ln();
    let l2 = l1.ln();
    Ok((l1, l2, l2.ln()))
}

fn open_strip(sigma: f64) -> Result<()> {
    if !(sigma > 0.5 && sigma < 1.0) {
        return Err(Error::domain(format!("sigma must lie in (1/2, 1), got {sigma}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuProfile {
    /// `1 / (2 - 2 sigma)`
    pub floor: f64,
    /// Blend of the two asymptotic main terms, at least `floor`.
    pub asym: f64,
}

/// `(1/sqrt 2) sqrt|log(2 sigma - 1)|`, the branch at `sigma -> 1/2`.
pub fn nu_low(sigma: f64) -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 * (2.0 * sigma - 1.0).ln().abs().sqrt()
}

/// `1 / (1 - sigma)`, the branch at `sigma -> 1`.
pub fn nu_high(sigma: f64) -> f64 {
    1.0 / (1.0 - sigma)
}

pub fn nu_profile(sigma: f64) -> Result<NuProfile> {
    open_strip(sigma)?;
    let floor = 1.0 / (2.0 - 2.0 * sigma);
    let w = ((sigma - NU_BLEND.0) / (NU_BLEND.1 - NU_BLEND.0)).clamp(0.0, 1.0);
    let blend = (1.0 - w) * nu_low(sigma) + w * nu_high(sigma);
    Ok(NuProfile {
        floor,
        asym: floor.max(blend),
    })
}

/// `e^gamma log log T`.
pub fn levinson(t: f64) -> Result<f64> {
    let (_, l2, _) = logs(t)?;
    Ok(EULER_GAMMA.exp() * l2)
}

/// `(log T)^(1 - sigma) / (log2 T)^sigma`.
fn strip_scale(sigma: f64, l1: f64, l2: f64) -> f64 {
    l1.powf(1.0 - sigma) / l2.powf(sigma)
}

/// Log of the predicted maximum of `|zeta(sigma + it)|`:
/// the critical-line bound at `sigma = 1/2`, `nu (log T)^(1-sigma) / (log2 T)^sigma`
/// on `(1/2, 3/4)`, plus `log log2 T + c` on `[3/4, 1)`, and Levinson at `sigma = 1`.
pub fn predicted_log_max(sigma: f64, t: f64, consts: &BoundConstants) -> Result<f64> {
    let (l1, l2, l3) = logs(t)?;
    if sigma == 0.5 {
        return Ok(std::f64::consts::FRAC_1_SQRT_2 * (l1 * l3 / l2).sqrt());
    }
    if sigma == 1.0 {
        return Ok(levinson(t)?.ln());
    }
    let nu = nu_profile(sigma)?.asym;
    let main = nu * strip_scale(sigma, l1, l2);
    Ok(if sigma >= 0.75 {
        l2.ln() + consts.c_intermediate + main
    } else {
        main
    })
}

pub fn predicted_max(sigma: f64, t: f64, consts: &BoundConstants) -> Result<f64> {
    if !(0.5..=1.0).contains(&sigma) {
        return Err(Error::domain(format!("sigma must lie in [1/2, 1], got {sigma}")));
    }
    Ok(predicted_log_max(sigma, t, consts)?.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PsumEstimate {
    pub sigma: f64,
    pub x: f64,
    /// `sum_{p <= x} p^-sigma`
    pub lhs: f64,
    /// `sigma log2 x + x^(1-sigma) / ((1 - sigma) log x)`
    pub main_terms: f64,
    /// `lhs - main_terms`, the empirical constant.
    pub gap: f64,
}

/// Whether `(1 - sigma) log x >= 1/2`.
pub fn psum_applies(sigma: f64, x: f64) -> bool {
    (1.0 - sigma) * x.ln() >= 0.5
}

pub fn psum_main_terms(sigma: f64, x: f64) -> f64 {
    let lx = x.ln();
    sigma * lx.ln() + x.powf(1.0 - sigma) / ((1.0 - sigma) * lx)
}

pub fn psum_estimate(table: &PrimeTable, sigma: f64, x: f64) -> Result<PsumEstimate> {
    if !(sigma < 1.0) || !psum_applies(sigma, x) {
        return Err(Error::domain(format!(
            "prime-sum estimate needs (1-sigma) log x >= 1/2, got (1-sigma) log x = {:.6} (sigma = {sigma}, x = {x})",
            (1.0 - sigma) * x.ln()
        )));
    }
    let lhs: KahanSum = table
        .primes_up_to(x)?
        .iter()
        .map(|&p| (-sigma * (p as f64).ln()).exp())
        .collect();
    let lhs = lhs.value();
    let main_terms = psum_main_terms(sigma, x);
    Ok(PsumEstimate {
        sigma,
        x,
        lhs,
        main_terms,
        gap: lhs - main_terms,
    })
}

/// `(1 + delta) log3 T (log T)^(1-sigma) / ((1 - sigma) (log2 T)^(sigma+1))`.
pub fn e_error_term(sigma: f64, t: f64, delta: f64) -> Result<f64> {
    open_strip(sigma)?;
    if !(delta > 0.0) {
        return Err(Error::domain(format!("delta must be positive, got {delta}")));
    }
    let (l1, l2, l3) = logs(t)?;
    Ok((1.0 + delta) * l3 * l1.powf(1.0 - sigma) / ((1.0 - sigma) * l2.powf(sigma + 1.0)))
}

/// `nu(sigma) (log T)^(1-sigma) / (log2 T)^sigma`.
pub fn nu_term(sigma: f64, t: f64) -> Result<f64> {
    let (l1, l2, _) = logs(t)?;
    Ok(nu_profile(sigma)?.asym * strip_scale(sigma, l1, l2))
}

/// `W(T, sigma)`: `exp(c sqrt(log T log3 T / log2 T))` at `sigma = 1/2`, and
/// `exp(nu(sigma) (log T)^(1-sigma) / (log2 T)^sigma)` for `1/2 < sigma <= 3/4`.
pub fn w_target(sigma: f64, t: f64, c: f64) -> Result<f64> {
    let (l1, l2, l3) = logs(t)?;
    if sigma == 0.5 {
        if !(c > 0.0 && c < 0.5) {
            return Err(Error::domain(format!("c must lie in (0, 1/2), got {c}")));
        }
        return Ok((c * (l1 * l3 / l2).sqrt()).exp());
    }
    if !(sigma > 0.5 && sigma <= 0.75) {
        return Err(Error::domain(format!("W is defined for 1/2 <= sigma <= 3/4, got {sigma}")));
    }
    if sigma < 0.5 + 1.0 / l2 {
        log::warn!("sigma = {sigma} lies below 1/2 + 1/log2 T = {}", 0.5 + 1.0 / l2);
    }
    Ok((nu_profile(sigma)?.asym * strip_scale(sigma, l1, l2)).exp())
}

/// `exp(e sqrt(log T log2 T log3 T / 2))`, returned as its log.
pub fn partial_sum_log_threshold(t: f64) -> Result<f64> {
    let (l1, l2, l3) = logs(t)?;
    Ok(std::f64::consts::E * (l1 * l2 * l3 / 2.0).sqrt())
}

pub fn partial_sum_threshold(t: f64) -> Result<f64> {
    Ok(partial_sum_log_threshold(t)?.exp())
}

/// `exp((1/sqrt 2) sqrt(log T log2 T))`, the random-matrix prediction on the
/// critical line, used as an envelope for every `sigma`.
pub fn fgh_prediction(t: f64) -> Result<f64> {
    let (l1, l2, _) = logs(t)?;
    Ok((std::f64::consts::FRAC_1_SQRT_2 * (l1 * l2).sqrt()).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedParams {
    pub x: f64,
    pub ell: u32,
    /// `pi(x)`
    pub prime_count: usize,
    /// `log prod_{p <= x} (1 + sum_{nu < ell} (1 - nu/ell) p^(-nu sigma))`
    pub log_objective: f64,
}

fn log_gal_product(primes: &[u64], ell: u32, sigma: f64) -> f64 {
    let l = f64::from(ell);
    primes
        .iter()
        .map(|&p| {
            let q = (p as f64).powf(-sigma);
            let mut pw = 1.0;
            let mut inner = 0.0;
            for nu in 1..ell {
                pw *= q;
                inner += (1.0 - f64::from(nu) / l) * pw;
            }
            inner.ln_1p()
        })
        .sum()
}

/// The divisor set of `prod_{p <= x} p^(ell - 1)` with `ell^pi(x) <= sqrt T`:
/// `ell = round(1/(1 - sigma))` and `x` the largest prime admitted by the size
/// constraint, which maximizes the resonance ratio on that grid.
pub fn combined_params(table: &PrimeTable, sigma: f64, t: f64) -> Result<CombinedParams> {
    open_strip(sigma)?;
    let (l1, _, _) = logs(t)?;
    let ell = (1.0 / (1.0 - sigma)).round().max(2.0) as u32;
    let k = ((0.5 * l1) / f64::from(ell).ln() + 1e-12).floor() as usize;
    if k == 0 {
        return Err(Error::param(format!(
            "degenerate parameters: ell = {ell} already exceeds sqrt(T) = {:.3}",
            t.sqrt()
        )));
    }
    let primes = table.primes();
    if primes.len() < k {
        return Err(Error::InsufficientTable {
            limit: table.limit(),
            requested: k as f64,
        });
    }
    let x = primes[k - 1] as f64;
    Ok(CombinedParams {
        x,
        ell,
        prime_count: k,
        log_objective: log_gal_product(&primes[..k], ell, sigma),
    })
}

/// The combined-construction objective at an arbitrary `x`.
pub fn combined_log_objective(table: &PrimeTable, x: f64, ell: u32, sigma: f64) -> Result<f64> {
    Ok(log_gal_product(table.primes_up_to(x)?, ell, sigma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundProfile {
    pub sigma: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub nu_floor: f64,
    pub nu_asym: f64,
    pub predicted_log_max: f64,
    pub levinson: f64,
    /// Defined only for `sigma <= 3/4`.
    #[serde(rename = "W")]
    pub w: Option<f64>,
    pub fgh_prediction: f64,
    pub euler_gamma: f64,
}

pub fn bound_profile(sigma: f64, t: f64, consts: &BoundConstants) -> Result<BoundProfile> {
    let nu = nu_profile(sigma)?;
    let w = if sigma <= 0.75 {
        Some(w_target(sigma, t, consts.c_w)?)
    } else {
        None
    };
    Ok(BoundProfile {
        sigma,
        t,
        nu_floor: nu.floor,
        nu_asym: nu.asym,
        predicted_log_max: predicted_log_max(sigma, t, consts)?,
        levinson: levinson(t)?,
        w,
        fgh_prediction: fgh_prediction(t)?,
        euler_gamma: EULER_GAMMA,
    })
}

pub const CSV_HEADER: &str = "sigma,T,nuFloor,nuAsym,predictedLogMax,levinson,W,fgh";

pub fn profiles_to_csv(rows: &[BoundProfile]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let w = r.w.map(|w| w.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.sigma, r.t, r.nu_floor, r.nu_asym, r.predicted_log_max, r.levinson, w, r.fgh_prediction
        );
    }
    s
}
