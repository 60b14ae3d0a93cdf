//! Mollified moments of `|R|^2` against zeta (or `D_M`) by refined
//! composite trapezoid quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};

use super::dirichlet::{DirichletPoly, Evaluator, Target};
use super::mollifier::{bump_psi, phi, psi_hat0, Mollifier};
use crate::construct::ResonatorSet;
use crate::error::{Error, Result};
use crate::quadform::resonance_ratio;
use crate::sum::{KahanComplex, KahanSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct MomentOptions {
    /// Elements must satisfy `max <= T^(1 - epsilon)` for the bump moments.
    pub epsilon: f64,
    /// Largest `T` accepted.
    pub desk_cap: f64,
    /// Largest relative change under step halving that counts as converged.
    pub tolerance: f64,
    /// Number of step halvings attempted before giving up.
    pub max_levels: usize,
    /// Samples per period of the fastest phase on the initial grid.
    pub points_per_period: f64,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.2,
            desk_cap: 1e5,
            tolerance: 1e-3,
            max_levels: 10,
            points_per_period: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MomentReport {
    pub m1: f64,
    /// `[re, im]`
    pub m2: Complex64,
    pub certificate: f64,
    pub mollifier: Mollifier,
    pub quad_step: f64,
    pub quad_points: usize,
    pub refinement_delta: f64,
    pub levels: usize,
    pub sigma: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub target: Target,
    /// `T hat Psi(0) sum r^2` (bump only).
    pub m1_predicted: Option<f64>,
    /// `T hat Psi(0) sum_{mk = n} r(m) r(n) / k^sigma` (bump, zeta target only).
    pub m2_predicted: Option<f64>,
    /// Bound on the neglected `|t| > T` part of the first moment (Gaussian only).
    pub tail_bound: Option<f64>,
}

/// Result of a refined trapezoid rule for a real and a complex integrand.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Quadrature {
    pub i1: f64,
    pub i2: Complex64,
    pub step: f64,
    pub points: usize,
    pub delta: f64,
    pub levels: usize,
}

fn grid_sums<F>(eval: &F, t0: f64, h: f64, count: usize, end_half: bool) -> (f64, Complex64)
where
    F: Fn(f64, f64, usize) -> (Vec<f64>, Vec<Complex64>),
{
    let (a, b) = eval(t0, h, count);
    let mut s1 = KahanSum::new();
    let mut s2 = KahanComplex::new();
    for j in 0..count {
        let w = if end_half && (j == 0 || j + 1 == count) { 0.5 } else { 1.0 };
        s1.add(w * a[j]);
        s2.add(b[j] * w);
    }
    (s1.value(), s2.value())
}

/// Composite trapezoid on `[a, b]` starting from step `<= h0`, halving until
/// the relative change in both integrals drops below `tol`. `eval(t0, h, n)`
/// returns both integrands on the grid `t0 + j h`, `j < n`. `delta_of`
/// turns consecutive estimates into the convergence measure.
pub(crate) fn refine<F, D>(
    a: f64,
    b: f64,
    h0: f64,
    tol: f64,
    max_levels: usize,
    eval: F,
    delta_of: D,
) -> Result<Quadrature>
where
    F: Fn(f64, f64, usize) -> (Vec<f64>, Vec<Complex64>),
    D: Fn((f64, Complex64), (f64, Complex64)) -> f64,
{
    let n0 = ((b - a) / h0).ceil().max(2.0) as usize;
    let mut h = (b - a) / n0 as f64;
    let (mut s1, mut s2) = grid_sums(&eval, a, h, n0 + 1, true);
    let mut points = n0 + 1;
    let mut est = (h * s1, s2 * h);
    let mut delta = f64::INFINITY;
    for level in 1..=max_levels {
        let n = points - 1;
        let (m1, m2) = grid_sums(&eval, a + 0.5 * h, h, n, false);
        s1 += m1;
        s2 += m2;
        h *= 0.5;
        points += n;
        let next = (h * s1, s2 * h);
        delta = delta_of(est, next);
        est = next;
        log::debug!("quadrature level {level}: step {h:e}, {points} points, delta {delta:e}");
        if delta < tol {
            return Ok(Quadrature {
                i1: est.0,
                i2: est.1,
                step: h,
                points,
                delta,
                levels: level,
            });
        }
    }
    Err(Error::Convergence {
        delta,
        levels: max_levels,
        step: h,
        points,
    })
}

fn relative_delta(prev: (f64, Complex64), next: (f64, Complex64)) -> f64 {
    let d1 = (next.0 - prev.0).abs() / next.0.abs();
    let d2 = (next.1 - prev.1).norm() / next.1.norm();
    d1.max(d2)
}

fn check_common(set: &ResonatorSet, t: f64, opts: &MomentOptions) -> Result<()> {
    if set.is_empty() {
        return Err(Error::param("moments of an empty resonator"));
    }
    if !(t > 1.0) {
        return Err(Error::domain(format!("T must exceed 1, got {t}")));
    }
    if t > opts.desk_cap {
        return Err(Error::DeskCap {
            what: "T".into(),
            value: t,
            cap: opts.desk_cap,
        });
    }
    Ok(())
}

fn initial_step(r: &DirichletPoly, ev: &Evaluator, opts: &MomentOptions) -> f64 {
    let omega = (2.0 * r.max_frequency() + ev.max_frequency()).max(1.0);
    2.0 * PI / (opts.points_per_period * omega)
}

fn grid_integrands(
    r: &DirichletPoly,
    ev: &Evaluator,
    envelope: impl Fn(f64) -> f64,
    t0: f64,
    h: f64,
    n: usize,
) -> (Vec<f64>, Vec<Complex64>) {
    let rv = r.eval_grid(t0, h, n);
    let zv = ev.eval_grid(t0, h, n);
    let mut f1 = Vec::with_capacity(n);
    let mut f2 = Vec::with_capacity(n);
    for j in 0..n {
        let w = rv[j].norm_sqr() * envelope(t0 + j as f64 * h);
        f1.push(w);
        f2.push(zv[j] * w);
    }
    (f1, f2)
}

/// `M1 = int |R|^2 Psi(t/T)`, `M2 = int zeta(sigma+it) |R|^2 Psi(t/T)`
/// over `[T/2, T]`, with zeta through the approximate functional equation at `x = T`.
pub fn bump_moments(set: &ResonatorSet, sigma: f64, t: f64, opts: &MomentOptions) -> Result<MomentReport> {
    check_common(set, t, opts)?;
    let lim = (1.0 - opts.epsilon) * t.ln();
    if set.max_log_value() > lim + 1e-12 {
        return Err(Error::domain(format!(
            "largest element exp({:.4}) exceeds T^(1-eps) = exp({lim:.4})",
            set.max_log_value()
        )));
    }
    let target = Target::Zeta { sigma, x: t };
    let ev = Evaluator::new(target)?;
    ev.check_range(t / 2.0, t)?;
    let r = DirichletPoly::resonator(set);
    let h0 = initial_step(&r, &ev, opts);
    let q = refine(
        t / 2.0,
        t,
        h0,
        opts.tolerance,
        opts.max_levels,
        |t0, h, n| grid_integrands(&r, &ev, |u| bump_psi(u / t), t0, h, n),
        relative_delta,
    )?;
    let psi0 = psi_hat0();
    let m2_predicted = if sigma > 0.0 && sigma <= 1.0 {
        Some(t * psi0 * resonance_ratio(set, sigma, f64::INFINITY)?.numerator)
    } else {
        None
    };
    Ok(MomentReport {
        m1: q.i1,
        m2: q.i2,
        certificate: q.i2.norm() / q.i1,
        mollifier: Mollifier::Bump,
        quad_step: q.step,
        quad_points: q.points,
        refinement_delta: q.delta,
        levels: q.levels,
        sigma,
        t,
        target,
        m1_predicted: Some(t * psi0 * set.weight_sq_sum()),
        m2_predicted,
        tail_bound: None,
    })
}

/// `int_{|t| > T} Phi(t log T / T) dt`.
pub fn gaussian_tail_mass(t: f64) -> f64 {
    let c = t.ln() / t;
    2.0 * (PI / 2.0).sqrt() / c * erfc(c * t / 2f64.sqrt())
}

/// `int_{sqrt T <= |t| <= T} Phi(t log T / T) dt` in closed form.
pub fn gaussian_window_mass(t: f64) -> f64 {
    let c = t.ln() / t;
    let s = 2f64.sqrt();
    2.0 * (PI / 2.0).sqrt() / c * (erf(c * t / s) - erf(c * t.sqrt() / s))
}

/// The Gaussian-mollified moments over `sqrt T <= |t| <= T`.
///
/// With real weights the integrand at `-t` is the conjugate of that at `t`,
/// so `M1 = 2 int_{sqrt T}^T` and `M2 = 2 Re int_{sqrt T}^T`.
pub fn gaussian_moments(
    set: &ResonatorSet,
    sigma: f64,
    t: f64,
    target: Target,
    opts: &MomentOptions,
) -> Result<MomentReport> {
    check_common(set, t, opts)?;
    if set.len() as f64 > t.sqrt() {
        return Err(Error::param(format!(
            "resonator has {} elements, more than sqrt(T) = {:.3}",
            set.len(),
            t.sqrt()
        )));
    }
    if let Target::Zeta { sigma: s, .. } = target {
        if s != sigma {
            return Err(Error::param(format!("target sigma {s} differs from sigma {sigma}")));
        }
    }
    let ev = Evaluator::new(target)?;
    let (lo, hi) = (t.sqrt(), t);
    ev.check_range(lo, hi)?;
    let r = DirichletPoly::resonator(set);
    let c = t.ln() / t;
    let h0 = initial_step(&r, &ev, opts);
    let q = refine(
        lo,
        hi,
        h0,
        opts.tolerance,
        opts.max_levels,
        |t0, h, n| grid_integrands(&r, &ev, |u| phi(c * u), t0, h, n),
        |p, n| relative_delta((p.0, Complex64::new(p.1.re, 0.0)), (n.0, Complex64::new(n.1.re, 0.0))),
    )?;
    let m1 = 2.0 * q.i1;
    let m2 = Complex64::new(2.0 * q.i2.re, 0.0);
    let r0 = r.abs_sum();
    Ok(MomentReport {
        m1,
        m2,
        certificate: m2.norm() / m1,
        mollifier: Mollifier::Gaussian,
        quad_step: q.step,
        quad_points: q.points,
        refinement_delta: q.delta,
        levels: q.levels,
        sigma,
        t,
        target,
        m1_predicted: None,
        m2_predicted: None,
        tail_bound: Some(r0 * r0 * gaussian_tail_mass(t)),
    })
}

/// Moments with the mollifier chosen explicitly; the Gaussian uses the zeta
/// target at `x = T`.
pub fn moments(
    set: &ResonatorSet,
    sigma: f64,
    t: f64,
    mollifier: Mollifier,
    opts: &MomentOptions,
) -> Result<MomentReport> {
    match mollifier {
        Mollifier::Bump => bump_moments(set, sigma, t, opts),
        Mollifier::Gaussian => gaussian_moments(set, sigma, t, Target::Zeta { sigma, x: t }, opts),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TailSample {
    pub lambda: f64,
    pub value: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TailCheckReport {
    pub m: u64,
    pub sigma: f64,
    #[serde(rename = "T")]
    pub t: f64,
    /// `max(sqrt T, M^(1-sigma) log M)`
    pub scale: f64,
    pub samples: Vec<TailSample>,
    /// Largest ratio, i.e. the fitted constant.
    pub max_ratio: f64,
    /// Largest change of any ratio under the final step halving.
    pub refinement_delta: f64,
    /// Largest ratio one level before the final one.
    pub max_ratio_coarse: f64,
}

/// `k` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..k)
        .map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp())
        .collect()
}

/// Evaluates `|sum_{n <= M} n^-sigma int_{-sqrt T}^{sqrt T} (lambda/n)^(it) Phi(t log T / T) dt|`
/// for each `lambda` and compares it with `max(sqrt T, M^(1-sigma) log M)`.
pub fn tail_integral_check(m: u64, sigma: f64, t: f64, lambdas: &[f64], tol: f64) -> Result<TailCheckReport> {
    if m < 1 {
        return Err(Error::param("M must be at least 1"));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::domain(format!("sigma must lie in (0,1), got {sigma}")));
    }
    if !(t > 1.0) {
        return Err(Error::domain(format!("T must exceed 1, got {t}")));
    }
    let mf = m as f64;
    let scale = t.sqrt().max(mf.powf(1.0 - sigma) * mf.ln());
    let c = t.ln() / t;
    let a = t.sqrt();
    let mut samples = Vec::with_capacity(lambdas.len());
    let mut coarse_max = 0.0f64;
    let mut worst_delta = 0.0f64;
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(Error::param(format!("lambda must be positive, got {lambda}")));
        }
        let ll = lambda.ln();
        let poly = DirichletPoly::new(
            (1..=m)
                .map(|n| {
                    let ln = (n as f64).ln();
                    (ln - ll, (-sigma * ln).exp())
                })
                .collect(),
        );
        let omega = poly.max_frequency().max(1.0);
        let coarse = std::cell::Cell::new(0.0);
        // the integrand is conjugate-symmetric, so the integral is 2 Re int_0^A
        let q = refine(
            0.0,
            a,
            2.0 * PI / (8.0 * omega),
            tol,
            20,
            |t0, h, n| {
                let v = poly.eval_grid(t0, h, n);
                let f2 = v
                    .iter()
                    .enumerate()
                    .map(|(j, z)| Complex64::new(z.re * phi(c * (t0 + j as f64 * h)), 0.0))
                    .collect();
                (vec![0.0; n], f2)
            },
            |p, n| {
                coarse.set(2.0 * p.1.re.abs() / scale);
                2.0 * (n.1.re - p.1.re).abs() / scale
            },
        )?;
        let value = 2.0 * q.i2.re.abs();
        worst_delta = worst_delta.max(q.delta);
        coarse_max = coarse_max.max(coarse.get());
        samples.push(TailSample {
            lambda,
            value,
            ratio: value / scale,
        });
    }
    let max_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    log::info!("tail check: M = {m}, sigma = {sigma}, T = {t}: fitted constant {max_ratio:.6}");
    Ok(TailCheckReport {
        m,
        sigma,
        t,
        scale,
        samples,
        max_ratio,
        refinement_delta: worst_delta,
        max_ratio_coarse: coarse_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{ConstructionParams, Element, FactoredInt, SetKind};

    fn singleton(w: f64) -> ResonatorSet {
        ResonatorSet::new(
            vec![Element {
                factors: FactoredInt::one(),
                weight: w,
            }],
            SetKind::GalDivisors,
            ConstructionParams::gal(2.0, 1, 10, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn refine_integrates_polynomials_and_reports_failure() {
        let q = refine(
            0.0,
            2.0,
            0.1,
            1e-10,
            30,
            |t0, h, n| {
                let xs: Vec<f64> = (0..n).map(|j| t0 + j as f64 * h).collect();
                (
                    xs.iter().map(|x| x * x).collect(),
                    xs.iter().map(|x| Complex64::new(x.sin(), x.cos())).collect(),
                )
            },
            relative_delta,
        )
        .unwrap();
        assert!((q.i1 - 8.0 / 3.0).abs() < 1e-8);
        assert!((q.i2 - Complex64::new(1.0 - 2f64.cos(), 2f64.sin())).norm() < 1e-8);
        let err = refine(0.0, 1.0, 0.5, 0.0, 2, |_, _, n| (vec![1.0; n], vec![Complex64::new(1.0, 0.0); n]), |_, _| 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::Convergence { levels: 2, .. }));
    }

    #[test]
    fn bump_singleton_m1_is_exact() {
        let s = singleton(0.8);
        let r = bump_moments(&s, 1.0, 2000.0, &MomentOptions::default()).unwrap();
        let want = 2000.0 * psi_hat0() * 0.64;
        assert!((r.m1 / want - 1.0).abs() < 1e-8, "{} vs {want}", r.m1);
        assert!(r.refinement_delta < 1e-3);
        assert!(r.certificate > 0.0);
    }

    #[test]
    fn gaussian_singleton_m1_matches_closed_form() {
        let s = singleton(1.3);
        let t = 3000.0;
        let r = gaussian_moments(&s, 0.6, t, Target::Zeta { sigma: 0.6, x: t }, &MomentOptions::default()).unwrap();
        let want = 1.69 * gaussian_window_mass(t);
        assert!((r.m1 / want - 1.0).abs() < 1e-8, "{} vs {want}", r.m1);
        assert!(r.tail_bound.unwrap() < 1e-10 * r.m1);
    }

    #[test]
    fn gaussian_partial_sum_length_one() {
        let s = ResonatorSet::new(
            [1u64, 2, 3]
                .iter()
                .map(|&n| Element {
                    factors: FactoredInt::from_u64(n).unwrap(),
                    weight: 1.0 / n as f64,
                })
                .collect(),
            SetKind::GalDivisors,
            ConstructionParams::gal(3.0, 2, 10, 1.0),
        )
        .unwrap();
        let r = gaussian_moments(&s, 0.5, 1000.0, Target::PartialSum { m: 1 }, &MomentOptions::default()).unwrap();
        assert!((r.m2.re / r.m1 - 1.0).abs() < 1e-12);
        assert!((r.certificate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        let s = singleton(1.0);
        let opts = MomentOptions::default();
        assert!(matches!(bump_moments(&s, 1.0, 2e5, &opts), Err(Error::DeskCap { .. })));
        let big = ResonatorSet::new(
            vec![Element {
                factors: FactoredInt::from_u64(1000).unwrap(),
                weight: 1.0,
            }],
            SetKind::GalDivisors,
            ConstructionParams::gal(2.0, 1, 10, 1.0),
        )
        .unwrap();
        // 1000 > 2000^0.8 = 437
        assert!(bump_moments(&big, 1.0, 2000.0, &opts).is_err());
        let many = ResonatorSet::new(
            (1..=20u64)
                .map(|n| Element {
                    factors: FactoredInt::from_u64(n).unwrap(),
                    weight: 1.0,
                })
                .collect(),
            SetKind::GalDivisors,
            ConstructionParams::gal(2.0, 1, 10, 1.0),
        )
        .unwrap();
        assert!(gaussian_moments(&many, 0.6, 100.0, Target::Zeta { sigma: 0.6, x: 100.0 }, &opts).is_err());
    }

    #[test]
    fn tail_check_trivial_case() {
        let r = tail_integral_check(1, 0.6, 1e4, &[1.0], 1e-8).unwrap();
        // integral of Phi over [-100, 100] at dilation log T / T is at most 200
        assert!(r.samples[0].value <= 200.0);
        assert!(r.max_ratio <= 2.0);
        let direct: f64 = 2.0 * (PI / 2.0).sqrt() / (1e4f64.ln() / 1e4) * erf(1e4f64.ln() / 1e4 * 100.0 / 2f64.sqrt());
        assert!((r.samples[0].value - direct).abs() < 1e-6);
    }

    #[test]
    fn log_spacing() {
        let v = log_spaced(1.0, 1000.0, 4);
        assert_eq!(v.len(), 4);
        assert!((v[1] - 10.0).abs() < 1e-9 && (v[3] - 1000.0).abs() < 1e-9);
    }
}
