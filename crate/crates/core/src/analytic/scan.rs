//! Large-value search and certification.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dirichlet::{DirichletPoly, Evaluator, Target};
use super::moments::{moments, MomentOptions, MomentReport};
use super::mollifier::Mollifier;
use crate::construct::ResonatorSet;
use crate::error::{Error, Result};
use crate::rng;

/// Golden-section iterations per refined candidate, at most.
const MAX_REFINE_STEPS: usize = 48;
/// Candidates refined after the grid phase.
const REFINE_CANDIDATES: usize = 5;
/// Relative slack allowed between a certificate and its witness.
pub const WITNESS_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Uniform,
    Guided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanResult {
    pub t_star: f64,
    pub value: f64,
    pub sigma: f64,
    pub interval: (f64, f64),
    /// Evaluations of the target actually spent.
    pub budget: usize,
    pub strategy: Strategy,
    pub target: Target,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    t: f64,
    value: f64,
}

struct Tracker<'a> {
    ev: &'a Evaluator,
    used: usize,
    best: Candidate,
}

impl Tracker<'_> {
    fn eval(&mut self, t: f64) -> f64 {
        let v = self.ev.eval(t).norm();
        self.used += 1;
        self.see(t, v);
        v
    }

    fn see(&mut self, t: f64, v: f64) {
        if v > self.best.value {
            self.best = Candidate { t, value: v };
        }
    }
}

/// Local maxima of `|R|` on a grid fine enough to resolve its fastest phase,
/// strongest first.
fn resonator_peaks(guide: &ResonatorSet, lo: f64, hi: f64) -> Vec<Candidate> {
    let r = DirichletPoly::resonator(guide);
    let step = 2.0 * std::f64::consts::PI / (8.0 * r.max_frequency().max(1.0));
    let n = ((hi - lo) / step).ceil() as usize + 1;
    let h = (hi - lo) / (n - 1).max(1) as f64;
    let v: Vec<f64> = r.eval_grid(lo, h, n).iter().map(|z| z.norm()).collect();
    let mut peaks: Vec<Candidate> = (1..n.saturating_sub(1))
        .filter(|&j| v[j] > v[j - 1] && v[j] >= v[j + 1])
        .map(|j| Candidate {
            t: lo + j as f64 * h,
            value: v[j],
        })
        .collect();
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.t.total_cmp(&b.t)));
    peaks
}

/// Golden-section search for a maximum of `|f|` on `[a, b]` with `steps` evaluations.
fn golden(tr: &mut Tracker<'_>, mut a: f64, mut b: f64, steps: usize) {
    if steps < 2 {
        return;
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = tr.eval(c);
    let mut fd = tr.eval(d);
    for _ in 2..steps {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = tr.eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = tr.eval(d);
        }
    }
}

/// Maximises `|target|` over `[lo, hi]` with about `budget` evaluations.
///
/// Half the budget goes to a uniform grid with a seeded random offset. With a
/// guide, a quarter goes to the strongest local maxima of the guide's `|R|`.
/// The rest refines the five best points by golden-section search.
pub fn scan_max(
    ev: &Evaluator,
    interval: (f64, f64),
    budget: usize,
    guide: Option<&ResonatorSet>,
    seed: u64,
) -> Result<ScanResult> {
    let (lo, hi) = interval;
    if budget < 3 {
        return Err(Error::param(format!("scan budget must be at least 3, got {budget}")));
    }
    ev.check_range(lo, hi)?;
    let mut tr = Tracker {
        ev,
        used: 0,
        best: Candidate {
            t: lo,
            value: f64::NEG_INFINITY,
        },
    };
    let n_grid = (budget / 2).max(1);
    let spacing = (hi - lo) / n_grid as f64;
    let offset: f64 = rng::stream(seed, "scan-offset").gen();
    let t0 = lo + offset * spacing;
    let mut cands: Vec<Candidate> = ev
        .eval_grid(t0, spacing, n_grid)
        .iter()
        .enumerate()
        .map(|(j, z)| Candidate {
            t: t0 + j as f64 * spacing,
            value: z.norm(),
        })
        .collect();
    tr.used += n_grid;
    for c in &cands {
        tr.see(c.t, c.value);
    }
    let mut strategy = Strategy::Uniform;
    if let Some(g) = guide {
        strategy = Strategy::Guided;
        for p in resonator_peaks(g, lo, hi).into_iter().take(budget / 4) {
            let v = tr.eval(p.t);
            cands.push(Candidate { t: p.t, value: v });
        }
    }
    cands.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.t.total_cmp(&b.t)));
    let remaining = budget.saturating_sub(tr.used);
    let per = (remaining / REFINE_CANDIDATES).min(MAX_REFINE_STEPS);
    let top: Vec<Candidate> = cands.iter().take(REFINE_CANDIDATES).copied().collect();
    for c in top {
        let a = (c.t - spacing).max(lo);
        let b = (c.t + spacing).min(hi);
        golden(&mut tr, a, b, per);
    }
    let t_star = tr.best.t;
    Ok(ScanResult {
        t_star,
        value: ev.eval(t_star).norm(),
        sigma: ev.target().sigma(),
        interval,
        budget: tr.used,
        strategy,
        target: ev.target(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub certificate: f64,
    pub moments: MomentReport,
    pub witness: ScanResult,
}

/// The interval on which a certificate bounds the maximum.
pub fn certificate_interval(t: f64, mollifier: Mollifier) -> (f64, f64) {
    match mollifier {
        Mollifier::Bump => (t / 2.0, t),
        Mollifier::Gaussian => (t.sqrt(), t),
    }
}

/// `|M2| / M1` plus a scanned witness `t*` with `|zeta(sigma + it*)|` at least
/// the certificate. A missing witness is an implementation fault.
pub fn certify_lower_bound(
    set: &ResonatorSet,
    sigma: f64,
    t: f64,
    mollifier: Mollifier,
    opts: &MomentOptions,
    scan_budget: usize,
    seed: u64,
) -> Result<Certificate> {
    let report = moments(set, sigma, t, mollifier, opts)?;
    let cert = report.certificate;
    let ev = Evaluator::new(Target::Zeta { sigma, x: t })?;
    let witness = scan_max(&ev, certificate_interval(t, mollifier), scan_budget, Some(set), seed)?;
    if !(witness.value >= cert * (1.0 - WITNESS_SLACK)) {
        return Err(Error::WitnessNotFound {
            certificate: cert,
            best: witness.value,
            t_best: witness.t_star,
        });
    }
    Ok(Certificate {
        certificate: cert,
        moments: report,
        witness,
    })
}

/// Appends one JSON record as a line.
pub fn append_run_log<T: Serialize>(path: &Path, record: &T) -> Result<()> {
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = serde_json::to_string(record)?;
    line.push('\n');
    f.write_all(line.as_bytes())?;
    Ok(())
}
