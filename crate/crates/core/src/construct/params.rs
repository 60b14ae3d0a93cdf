use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::log2;

/// Every scalar the constructions consume.
///
/// `alpha`, `a` and `b` have no prescribed values beyond the constraints
/// `0 < alpha < 1`, `1 < a < 1/alpha`, `b > 1`; see [`ConstructionParams::near_half`]
/// for the defaults used here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstructionParams {
    #[serde(rename = "T")]
    pub t: f64,
    pub sigma: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub x: f64,
    pub ell: u32,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub beta: f64,
    /// Replace sigma below `1/2 + 1/log log T` by that edge instead of only
    /// warning.
    #[serde(default)]
    pub clamp_sigma: bool,
}

/// `alpha = min(0.95, 1 - (sigma - 1/2))`.
pub fn default_alpha(sigma: f64) -> f64 {
    0.95f64.min(1.0 - (sigma - 0.5))
}

/// Midpoint of the admissible range `(1, 1/alpha)`.
pub fn default_a(alpha: f64) -> f64 {
    0.5 * (1.0 + 1.0 / alpha)
}

pub const DEFAULT_B: f64 = 1.2;

impl ConstructionParams {
    /// Near-critical parameters for interval endpoint `t`, with `N = [sqrt T]`.
    pub fn near_half(t: f64, sigma: f64) -> Self {
        let n = t.sqrt().floor().max(1.0) as u64;
        Self::near_half_with_n(t, n, sigma)
    }

    /// Near-critical parameters with an explicit cap `n`.
    pub fn near_half_with_n(t: f64, n: u64, sigma: f64) -> Self {
        let alpha = default_alpha(sigma);
        let log2n = log2(n as f64);
        Self {
            t,
            sigma,
            n,
            x: 2.0,
            ell: 1,
            alpha,
            a: default_a(alpha),
            b: DEFAULT_B,
            delta: if log2n > 0.0 { 1.0 / log2n } else { 1.0 },
            beta: 0.5,
            clamp_sigma: false,
        }
    }

    /// Parameters recorded on a Gál divisor set built with cardinality cap `cap`.
    pub fn gal(x: f64, ell: u32, cap: u64, sigma: f64) -> Self {
        let mut p = Self::near_half_with_n((cap as f64).powi(2), cap, sigma.clamp(0.5, 1.0));
        p.sigma = sigma;
        p.x = x;
        p.ell = ell;
        p
    }

    /// Checks the constraints shared by every construction.
    pub fn validate(&self) -> Result<()> {
        if self.ell < 1 {
            return Err(Error::param("ell must be at least 1"));
        }
        if self.beta != 0.5 {
            return Err(Error::param(format!("beta is fixed at 1/2, got {}", self.beta)));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::param(format!("T must be positive, got {}", self.t)));
        }
        if self.n < 1 {
            return Err(Error::param("N must be at least 1"));
        }
        Ok(())
    }

    /// Additional constraints of the near-critical construction.
    pub fn validate_near_half(&self) -> Result<()> {
        self.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if !(self.a > 1.0) {
            return Err(Error::param(format!("a must exceed 1, got {}", self.a)));
        }
        if !(self.a * self.alpha < 1.0) {
            return Err(Error::param(format!(
                "the near-half construction requires a*alpha < 1, got a*alpha = {}",
                self.a * self.alpha
            )));
        }
        if !(self.b > 1.0) {
            return Err(Error::param(format!("b must exceed 1, got {}", self.b)));
        }
        if !(self.delta > 0.0) {
            return Err(Error::param(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.sigma >= 0.5 && self.sigma <= 0.75) {
            return Err(Error::domain(format!(
                "near-half construction needs 1/2 <= sigma <= 3/4, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Sigma actually used by the near-half construction. Below
    /// `1/2 + 1/log log T` a warning is logged; with `clamp_sigma` the value
    /// is raised to that edge (never above 3/4).
    pub fn effective_sigma(&self) -> f64 {
        if self.sigma == 0.5 {
            return 0.5;
        }
        let l2 = log2(self.t);
        if l2 <= 0.0 {
            return self.sigma;
        }
        let edge = 0.5 + 1.0 / l2;
        if self.sigma < edge {
            if self.clamp_sigma {
                let clamped = edge.min(0.75);
                log::warn!("sigma {} below 1/2 + 1/log log T = {edge:.4}; clamped to {clamped:.4}", self.sigma);
                return clamped;
            }
            log::warn!(
                "sigma {} below 1/2 + 1/log log T = {edge:.4}; proceeding unclamped",
                self.sigma
            );
        }
        self.sigma
    }
}
