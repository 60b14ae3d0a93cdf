//! Dirichlet polynomials `sum a_j exp(-i t lambda_j)`, pointwise and on
//! uniform grids.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::zeta::{correction, POLE_GUARD};
use crate::construct::ResonatorSet;
use crate::error::{Error, Result};

// Points per parallel work unit and steps between exact re-seeds of each
// phasor. The recurrence loses about one ulp per step.
const CHUNK: usize = 2048;
const RESEED: usize = 512;

/// `(lambda, a)` pairs: frequency and real coefficient.
#[derive(Debug, Clone, Default)]
pub struct DirichletPoly {
    terms: Vec<(f64, f64)>,
}

impl DirichletPoly {
    pub fn new(terms: Vec<(f64, f64)>) -> Self {
        Self { terms }
    }

    /// `sum_{n <= x} n^-sigma n^-it`.
    pub fn zeta_head(sigma: f64, x: f64) -> Self {
        Self::new(
            (1..=(x.floor() as u64))
                .map(|n| {
                    let l = (n as f64).ln();
                    (l, (-sigma * l).exp())
                })
                .collect(),
        )
    }

    /// `R(t) = sum r(m) m^-it`.
    pub fn resonator(set: &ResonatorSet) -> Self {
        Self::new(set.iter().map(|(m, r)| (m.log_value(), r)).collect())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest frequency present.
    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.0.abs()).fold(0.0, f64::max)
    }

    /// Sum of |coefficients|, the value at `t = 0` for positive coefficients.
    pub fn abs_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.1.abs()).sum()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for &(l, a) in &self.terms {
            let (s, c) = (t * l).sin_cos();
            re += a * c;
            im -= a * s;
        }
        Complex64::new(re, im)
    }

    /// Values at `t0 + j h`, `j = 0..count`.
    pub fn eval_grid(&self, t0: f64, h: f64, count: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); count];
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            let start = ci * CHUNK;
            self.fill_chunk(t0, h, start, chunk);
        });
        out
    }

    fn fill_chunk(&self, t0: f64, h: f64, start: usize, out: &mut [Complex64]) {
        for &(l, a) in &self.terms {
            let (hs, hc) = (h * l).sin_cos();
            let step = Complex64::new(hc, -hs);
            let mut j = 0;
            while j < out.len() {
                let t = t0 + (start + j) as f64 * h;
                let (s, c) = (t * l).sin_cos();
                let mut p = Complex64::new(a * c, -a * s);
                let end = (j + RESEED).min(out.len());
                for o in &mut out[j..end] {
                    *o += p;
                    p *= step;
                }
                j = end;
            }
        }
    }
}

/// `R(t) = sum r(m) exp(-i t log m)`.
pub fn resonator_eval(set: &ResonatorSet, t: f64) -> Complex64 {
    DirichletPoly::resonator(set).eval(t)
}

/// What a scan or moment integral multiplies `|R|^2` by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Target {
    /// `zeta(sigma + it)` through the approximate functional equation with `x` terms.
    Zeta { sigma: f64, x: f64 },
    /// `D_M(t)`.
    PartialSum { m: u64 },
}

impl Target {
    pub fn sigma(&self) -> f64 {
        match *self {
            Target::Zeta { sigma, .. } => sigma,
            Target::PartialSum { .. } => 0.5,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Target::Zeta { sigma, x } => format!("zeta(sigma={sigma}, x={x})"),
            Target::PartialSum { m } => format!("D_{m}"),
        }
    }
}

/// A target prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Evaluator {
    target: Target,
    head: DirichletPoly,
}

impl Evaluator {
    pub fn new(target: Target) -> Result<Self> {
        let head = match target {
            Target::Zeta { sigma, x } => {
                if !(sigma >= 0.1) || !(x >= 2.0) {
                    return Err(Error::domain(format!(
                        "zeta evaluator needs sigma >= 0.1 and x >= 2, got sigma = {sigma}, x = {x}"
                    )));
                }
                DirichletPoly::zeta_head(sigma, x)
            }
            Target::PartialSum { m } => {
                if m < 1 {
                    return Err(Error::param("partial sum length must be at least 1"));
                }
                DirichletPoly::zeta_head(0.5, m as f64)
            }
        };
        Ok(Self { target, head })
    }

    pub fn target(&self) -> Target {
        self.target
    }

    /// Highest frequency of the target.
    pub fn max_frequency(&self) -> f64 {
        self.head.max_frequency()
    }

    /// Checks that `[lo, hi]` is a valid evaluation range.
    pub fn check_range(&self, lo: f64, hi: f64) -> Result<()> {
        if !(lo <= hi) {
            return Err(Error::param(format!("empty interval [{lo}, {hi}]")));
        }
        if let Target::Zeta { sigma, x } = self.target {
            if lo.abs().max(hi.abs()) > x {
                return Err(Error::domain(format!(
                    "interval [{lo}, {hi}] exceeds |t| <= x = {x}"
                )));
            }
            // the pole can only be near when sigma is near 1
            if (1.0 - sigma).abs() < POLE_GUARD && lo <= POLE_GUARD && hi >= -POLE_GUARD {
                return Err(Error::NearPole {
                    distance: (1.0 - sigma).abs().max(lo.abs().min(hi.abs())),
                });
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let v = self.head.eval(t);
        match self.target {
            Target::Zeta { sigma, x } => v - correction(sigma, t, x),
            Target::PartialSum { .. } => v,
        }
    }

    pub fn eval_grid(&self, t0: f64, h: f64, count: usize) -> Vec<Complex64> {
        let mut v = self.head.eval_grid(t0, h, count);
        if let Target::Zeta { sigma, x } = self.target {
            for (j, z) in v.iter_mut().enumerate() {
                *z -= correction(sigma, t0 + j as f64 * h, x);
            }
        }
        v
    }
}
