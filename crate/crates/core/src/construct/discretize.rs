//! Additive control: collapse a multiplicative set into one representative
//! per geometric window `[(1+1/T)^j, (1+1/T)^(j+1))`, weighted by the local
//! l2 average over the ratio neighbourhood `[1 - w, 1 + w]`, `w = (log T)^2 / T`.

use super::{Element, ResonatorSet, SetKind};
use crate::error::{Error, Result};
use crate::sum::KahanSum;

// Absolute slack on log-ratio comparisons, so that exact boundary ratios
// land inside the closed interval.
const LOG_SLACK: f64 = 1e-12;

/// `(log T)^2 / T`, erroring when the neighbourhood would reach 0.
pub fn window_halfwidth(t: f64) -> Result<f64> {
    if !(t >= 2.0) {
        return Err(Error::param(format!("discretization needs T >= 2, got {t}")));
    }
    let w = t.ln().powi(2) / t;
    if w >= 1.0 {
        return Err(Error::DegenerateWindow { width: w });
    }
    Ok(w)
}

/// The window-collapse on raw points `(log n, f(n))`.
///
/// Returns `(index of representative, r)` pairs in increasing order of
/// `log n`. Input need not be sorted.
pub fn discretize_points(points: &[(f64, f64)], t: f64) -> Result<Vec<(usize, f64)>> {
    let w = window_halfwidth(t)?;
    if let Some(&(_, f)) = points.iter().find(|(_, f)| !(*f > 0.0 && f.is_finite())) {
        return Err(Error::param(format!("input weights must be positive, got {f}")));
    }
    let step = (1.0 / t).ln_1p();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].0.total_cmp(&points[j].0));

    // window minima
    let mut reps = Vec::new();
    let mut last_window = None;
    for &i in &order {
        let j = (points[i].0 / step).floor() as i64;
        if last_window != Some(j) {
            reps.push(i);
            last_window = Some(j);
        }
    }

    let lo_off = (-w).ln_1p() - LOG_SLACK;
    let hi_off = w.ln_1p() + LOG_SLACK;
    let logs: Vec<f64> = order.iter().map(|&i| points[i].0).collect();
    let mut out = Vec::with_capacity(reps.len());
    let mut start = 0usize;
    for &m in &reps {
        let lm = points[m].0;
        while start < logs.len() && logs[start] - lm < lo_off {
            start += 1;
        }
        let mut acc = KahanSum::new();
        let mut k = start;
        while k < logs.len() && logs[k] - lm <= hi_off {
            acc.add(points[order[k]].1.powi(2));
            k += 1;
        }
        out.push((m, acc.value().sqrt()));
    }
    Ok(out)
}

/// Collapse `set` at height `T`.
pub fn additive_discretize(set: &ResonatorSet, t: f64) -> Result<ResonatorSet> {
    let points: Vec<(f64, f64)> = set.iter().map(|(n, f)| (n.log_value(), f)).collect();
    let reps = discretize_points(&points, t)?;
    let elements = reps
        .into_iter()
        .map(|(i, r)| Element {
            factors: set.elements()[i].factors.clone(),
            weight: r,
        })
        .collect();
    let mut params = set.params().clone();
    params.t = t;
    ResonatorSet::new(elements, SetKind::Discretized, params)
}

/// `2 (log T)^2 + 2`.
pub fn sandwich_factor(t: f64) -> f64 {
    2.0 * t.ln().powi(2) + 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{ConstructionParams, FactoredInt};
    use proptest::prelude::*;

    fn sq(xs: &[f64]) -> f64 {
        xs.iter().map(|x| x * x).sum()
    }

    #[test]
    fn degenerate_window() {
        // (log 10)^2 / 10 = 0.53 < 1, (log 5)^2/5 = 0.52; (log 2)^2/2 < 1 as well
        assert!(window_halfwidth(10.0).is_ok());
        assert!(window_halfwidth(1.5).is_err());
        // (log T)^2 >= T somewhere between e and 10? max of (log T)^2/T is 4/e^2 < 1
        assert!(window_halfwidth(std::f64::consts::E.powi(2)).unwrap() < 1.0);
    }

    #[test]
    fn separated_points_are_unchanged() {
        let t = 100.0;
        let w = window_halfwidth(t).unwrap();
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| (f64::from(i) * 2.0 * (1.0 + w).ln() + 1.0, 0.5 + 0.01 * f64::from(i)))
            .collect();
        let out = discretize_points(&pts, t).unwrap();
        assert_eq!(out.len(), pts.len());
        for (k, (i, r)) in out.iter().enumerate() {
            assert_eq!(*i, k);
            assert!((r - pts[k].1).abs() < 1e-15);
        }
    }

    #[test]
    fn two_points_in_one_window() {
        let t: f64 = 100.0;
        let a = 10f64.ln();
        let b = (10.0 * (1.0 + 1.0 / t).powf(0.5)).ln();
        let out = discretize_points(&[(b, 0.3), (a, 0.4)], t).unwrap();
        // 10 sits at (1+1/T)^231.4, 10*(1+1/T)^0.5 stays in window 231
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, 1);
        assert!((out[0].1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn boundary_ratio_is_included() {
        let t = 1e4;
        let w = window_halfwidth(t).unwrap();
        let a = 3.0;
        let b = a + w.ln_1p();
        let out = discretize_points(&[(a, 1.0), (b, 1.0)], t).unwrap();
        assert_eq!(out.len(), 2);
        assert!((out[0].1 - 2f64.sqrt()).abs() < 1e-15);
        assert!((out[1].1 - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(discretize_points(&[(1.0, 0.0)], 100.0).is_err());
        assert!(discretize_points(&[(1.0, f64::NAN)], 100.0).is_err());
    }

    #[test]
    fn set_level_discretization() {
        let elements: Vec<Element> = [1u64, 2, 3, 4, 6, 12]
            .iter()
            .map(|&n| Element {
                factors: FactoredInt::from_u64(n).unwrap(),
                weight: 1.0 / n as f64,
            })
            .collect();
        let set = ResonatorSet::new(elements, SetKind::GalDivisors, ConstructionParams::gal(3.0, 2, 100, 1.0))
            .unwrap();
        let d = additive_discretize(&set, 1e4).unwrap();
        assert_eq!(d.kind(), SetKind::Discretized);
        assert_eq!(d.len(), 6);
        assert!((d.weight_sq_sum() - set.weight_sq_sum()).abs() < 1e-15);
        assert_eq!(d.params().t, 1e4);
    }

    proptest! {
        #[test]
        fn sandwich(
            logs in prop::collection::vec(0.0f64..6.0, 1..200),
            seed_w in prop::collection::vec(0.01f64..2.0, 200),
            big in any::<bool>(),
        ) {
            let t = if big { 1e4 } else { 1e2 };
            let pts: Vec<(f64, f64)> = logs.iter().zip(&seed_w).map(|(&l, &f)| (l, f)).collect();
            let out = discretize_points(&pts, t).unwrap();
            let f2 = sq(&pts.iter().map(|p| p.1).collect::<Vec<_>>());
            let r2 = sq(&out.iter().map(|p| p.1).collect::<Vec<_>>());
            prop_assert!(out.len() <= pts.len());
            prop_assert!(r2 >= f2 * (1.0 - 1e-12));
            prop_assert!(r2 <= sandwich_factor(t) * f2 * (1.0 + 1e-12));
            // one representative per window
            let step = (1.0 / t).ln_1p();
            let mut ws: Vec<i64> = out.iter().map(|(i, _)| (pts[*i].0 / step).floor() as i64).collect();
            let n = ws.len();
            ws.dedup();
            prop_assert_eq!(ws.len(), n);
        }
    }
}
