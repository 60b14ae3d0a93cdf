//! The near-critical construction: a prime band `P`, a multiplicative weight
//! `f` supported on square-free integers over `P`, and the pruned support
//! obtained by removing integers with too many prime factors in any block.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::Serialize;

use super::{ConstructionParams, Element, FactoredInt, ResonatorSet, SetKind};
use crate::error::{Error, Result};
use crate::math::{ln_binomial, log_sum_exp};
use crate::primes::PrimeTable;

/// Scalars describing the band for a given `(N, sigma, alpha)`.
///
/// For `sigma = 1/2` the factor `|log(2 sigma - 1)|` is replaced by
/// `log log log N` and the band exponent `(2 sigma - 1)^-alpha` by
/// `(log log N)^alpha`; for `sigma = 1/2 + 1/log log T` the two agree to
/// leading order.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BandGeometry {
    pub n: u64,
    pub sigma: f64,
    pub alpha: f64,
    pub log_n: f64,
    pub log2_n: f64,
    pub log3_n: f64,
    /// `|log(2 sigma - 1)|`, or `log3 N` at `sigma = 1/2`.
    pub log_factor: f64,
    /// `(2 sigma - 1)^-alpha`, or `(log2 N)^alpha` at `sigma = 1/2`.
    pub exponent: f64,
    /// `log N log2 N`.
    pub scale: f64,
    /// `e log N log2 N` (excluded).
    pub lower: f64,
    /// `log N exp(exponent) log2 N` (included).
    pub upper: f64,
}

impl BandGeometry {
    pub fn new(n: u64, sigma: f64, alpha: f64) -> Result<Self> {
        if !(sigma == 0.5 || (sigma > 0.5 && sigma <= 0.75)) {
            return Err(Error::domain(format!(
                "near-half band needs 1/2 < sigma <= 3/4 (or sigma = 1/2), got {sigma}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param(format!("alpha must lie in (0,1), got {alpha}")));
        }
        let log_n = (n as f64).ln();
        let log2_n = log_n.ln();
        let log3_n = log2_n.ln();
        if !(log3_n > 0.0) {
            return Err(Error::domain(format!(
                "near-half band needs log log log N > 0 (N > e^e), got N = {n}"
            )));
        }
        let (log_factor, exponent) = if sigma == 0.5 {
            (log3_n, log2_n.powf(alpha))
        } else {
            let l = (2.0 * sigma - 1.0).ln().abs();
            (l, (2.0 * sigma - 1.0).powf(-alpha))
        };
        let scale = log_n * log2_n;
        Ok(Self {
            n,
            sigma,
            alpha,
            log_n,
            log2_n,
            log3_n,
            log_factor,
            exponent,
            scale,
            lower: std::f64::consts::E * scale,
            upper: exponent.exp() * scale,
        })
    }

    /// Number of blocks `[exponent]`.
    pub fn block_count(&self) -> u32 {
        self.exponent.floor().max(0.0) as u32
    }

    /// Half-open edges `(e^k L, e^(k+1) L]` of block `k`, cut at the band's upper edge.
    pub fn block_edges(&self, k: u32) -> (f64, f64) {
        let lo = (f64::from(k)).exp() * self.scale;
        let hi = (f64::from(k) + 1.0).exp() * self.scale;
        (lo, hi.min(self.upper))
    }

    /// Block index of a band prime.
    pub fn block_of(&self, p: u64) -> u32 {
        let k = ((p as f64) / self.scale).ln().ceil() as i64 - 1;
        (k.max(1) as u32).min(self.block_count().max(1))
    }

    /// `f(p)` for a real argument, without the band check.
    pub fn weight_formula(&self, p: f64) -> f64 {
        let s = self.sigma;
        self.scale.powf(1.0 - s)
            / (self.log_factor.sqrt() * p.powf(1.0 - s) * (p.ln() - self.log2_n - self.log3_n))
    }

    /// `f(p)`; `p` must lie strictly above the lower band edge.
    pub fn weight(&self, p: u64) -> Result<f64> {
        if !((p as f64) > self.lower) {
            return Err(Error::domain(format!(
                "f(p) needs p > e log N log2 N = {:.6}, got p = {p}",
                self.lower
            )));
        }
        Ok(self.weight_formula(p as f64))
    }

    /// `tau_k = a log N / (k^2 |log(2 sigma - 1)|)`.
    pub fn threshold(&self, k: u32, a: f64) -> f64 {
        a * self.log_n / (f64::from(k).powi(2) * self.log_factor)
    }
}

/// Primes with `e log N log2 N < p <= log N exp((2 sigma - 1)^-alpha) log2 N`.
pub fn near_half_band(table: &PrimeTable, n: u64, sigma: f64, alpha: f64) -> Result<Vec<u64>> {
    let g = BandGeometry::new(n, sigma, alpha)?;
    Ok(table.primes_in_band(g.lower, g.upper)?.to_vec())
}

/// The multiplicative weight at a band prime.
pub fn near_half_weight(p: u64, n: u64, sigma: f64) -> Result<f64> {
    // alpha does not enter f(p) or the lower edge
    BandGeometry::new(n, sigma, 0.5)?.weight(p)
}

/// The blocks `P_k`, `k = 1..[(2 sigma - 1)^-alpha]`, restricted to the band.
pub fn prime_blocks(
    table: &PrimeTable,
    n: u64,
    sigma: f64,
    alpha: f64,
) -> Result<Vec<(u32, Vec<u64>)>> {
    let g = BandGeometry::new(n, sigma, alpha)?;
    let band = table.primes_in_band(g.lower, g.upper)?;
    Ok((1..=g.block_count())
        .map(|k| {
            let (lo, hi) = g.block_edges(k);
            let ps = band
                .iter()
                .copied()
                .filter(|&p| (p as f64) > lo && (p as f64) <= hi)
                .collect();
            (k, ps)
        })
        .collect())
}

/// `a log N / (k^2 |log(2 sigma - 1)|)`. An element is pruned once its count
/// of prime factors in `P_k` reaches the ceiling of this value.
pub fn block_threshold(n: u64, sigma: f64, k: u32, a: f64) -> f64 {
    let log_factor = (2.0 * sigma - 1.0).ln().abs();
    a * (n as f64).ln() / (f64::from(k).powi(2) * log_factor)
}

/// Count at which an element is pruned: `ceil(tau)`, at least 1.
pub fn prune_count(tau: f64) -> u32 {
    if tau >= f64::from(u32::MAX) {
        u32::MAX
    } else {
        (tau.ceil() as u32).max(1)
    }
}

/// A band prime with its weight and block slot (0-based).
#[derive(Debug, Clone, Copy)]
pub struct BandPrime {
    pub p: u64,
    pub weight: f64,
    pub block: usize,
}

#[derive(Debug)]
struct Node {
    log_w: f64,
    // positions into the weight-sorted prime list, increasing
    picks: Vec<u32>,
    counts: Vec<u32>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.log_w
            .total_cmp(&other.log_w)
            .then_with(|| other.picks.cmp(&self.picks))
    }
}

/// Best-first enumeration of square-free products over `band` such that no
/// block `b` holds `prune_at[b]` or more factors. Returns at most `budget`
/// products (as increasing prime lists with their weights), heaviest first.
///
/// Successors of a node are "append the next admissible prime" and "move the
/// last prime to the next admissible one", each of which can only lower the
/// weight when all weights are below 1; the heap therefore releases products
/// in nonincreasing weight order and every admissible product is reached
/// exactly once.
pub fn support_from_band(band: &[BandPrime], prune_at: &[u32], budget: usize) -> Vec<(Vec<u64>, f64)> {
    let mut order: Vec<usize> = (0..band.len()).collect();
    order.sort_by(|&i, &j| {
        band[j]
            .weight
            .total_cmp(&band[i].weight)
            .then(band[i].p.cmp(&band[j].p))
    });
    let sorted: Vec<BandPrime> = order.iter().map(|&i| band[i]).collect();
    let logw: Vec<f64> = sorted.iter().map(|b| b.weight.ln()).collect();
    // end of the run of equal blocks starting at each position
    let mut run_end = vec![sorted.len(); sorted.len()];
    for i in (0..sorted.len()).rev() {
        if i + 1 < sorted.len() && sorted[i + 1].block == sorted[i].block {
            run_end[i] = run_end[i + 1];
        } else {
            run_end[i] = i + 1;
        }
    }
    let nblocks = prune_at.len();
    let admissible_from = |start: usize, counts: &[u32]| -> Option<usize> {
        let mut i = start;
        while i < sorted.len() {
            let b = sorted[i].block;
            if counts[b] + 1 < prune_at[b] {
                return Some(i);
            }
            i = run_end[i];
        }
        None
    };

    let mut out = Vec::with_capacity(budget.min(1 << 16));
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        log_w: 0.0,
        picks: Vec::new(),
        counts: vec![0; nblocks],
    });
    while let Some(node) = heap.pop() {
        // append
        let start = node.picks.last().map_or(0, |&j| j as usize + 1);
        if let Some(i) = admissible_from(start, &node.counts) {
            let mut picks = node.picks.clone();
            picks.push(i as u32);
            let mut counts = node.counts.clone();
            counts[sorted[i].block] += 1;
            heap.push(Node {
                log_w: node.log_w + logw[i],
                picks,
                counts,
            });
        }
        // shift the last pick
        if let Some(&j) = node.picks.last() {
            let j = j as usize;
            let mut prefix_counts = node.counts.clone();
            prefix_counts[sorted[j].block] -= 1;
            if let Some(i) = admissible_from(j + 1, &prefix_counts) {
                let mut picks = node.picks.clone();
                *picks.last_mut().unwrap() = i as u32;
                prefix_counts[sorted[i].block] += 1;
                heap.push(Node {
                    log_w: node.log_w - logw[j] + logw[i],
                    picks,
                    counts: prefix_counts,
                });
            }
        }
        let mut primes: Vec<u64> = node.picks.iter().map(|&i| sorted[i as usize].p).collect();
        primes.sort_unstable();
        let mut ws: Vec<f64> = node.picks.iter().map(|&i| sorted[i as usize].weight).collect();
        ws.sort_by(|a, b| a.total_cmp(b));
        out.push((primes, ws.iter().product()));
        if out.len() >= budget {
            break;
        }
    }
    out
}

/// The pruned support `supp(f) \ U M_k`, truncated to the `min(budget, N)`
/// heaviest elements.
pub fn enumerate_support(
    table: &PrimeTable,
    params: &ConstructionParams,
    budget: usize,
) -> Result<ResonatorSet> {
    if budget < 1 {
        return Err(Error::param("support budget must be at least 1"));
    }
    params.validate_near_half()?;
    let sigma = params.effective_sigma();
    let g = BandGeometry::new(params.n, sigma, params.alpha)?;
    let band = table.primes_in_band(g.lower, g.upper)?;
    let nblocks = g.block_count().max(1) as usize;
    let prune_at: Vec<u32> = (1..=nblocks as u32)
        .map(|k| prune_count(g.threshold(k, params.a)))
        .collect();
    let band: Vec<BandPrime> = band
        .iter()
        .map(|&p| {
            Ok(BandPrime {
                p,
                weight: g.weight(p)?,
                block: g.block_of(p) as usize - 1,
            })
        })
        .collect::<Result<_>>()?;
    let cap = budget.min(usize::try_from(params.n).unwrap_or(usize::MAX));
    let raw = support_from_band(&band, &prune_at, cap);

    // Heap order only guarantees closure when every weight is below 1.
    let mut kept: HashSet<FactoredInt> = HashSet::with_capacity(raw.len());
    let mut by_size: Vec<(FactoredInt, f64)> = raw
        .into_iter()
        .map(|(ps, w)| (FactoredInt::from_primes(&ps), w))
        .collect();
    by_size.sort_by_key(|(n, _)| n.omega());
    let mut elements = Vec::with_capacity(by_size.len());
    for (n, w) in by_size {
        if n.maximal_proper_divisors().iter().all(|d| kept.contains(d)) {
            kept.insert(n.clone());
            elements.push(Element { factors: n, weight: w });
        } else {
            log::warn!("dropping {n}: a divisor fell outside the truncated support");
        }
    }
    let mut recorded = params.clone();
    recorded.sigma = sigma;
    ResonatorSet::new(elements, SetKind::NearHalf, recorded)
}

/// Checks every element of a near-half set against the band and the block
/// thresholds by direct recount.
pub fn check_support(set: &ResonatorSet, geometry: &BandGeometry, a: f64) -> Result<()> {
    for (n, _) in set.iter() {
        if !n.is_square_free() {
            return Err(Error::param(format!("{n} is not square-free")));
        }
        let mut counts = vec![0u32; geometry.block_count().max(1) as usize];
        for p in n.primes() {
            let pf = p as f64;
            if !(pf > geometry.lower && pf <= geometry.upper) {
                return Err(Error::param(format!("{n}: prime {p} outside the band")));
            }
            counts[geometry.block_of(p) as usize - 1] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            let limit = prune_count(geometry.threshold(k as u32 + 1, a));
            if c >= limit {
                return Err(Error::param(format!(
                    "{n}: {c} factors in block {} (pruned at {limit})",
                    k + 1
                )));
            }
        }
    }
    Ok(())
}

/// `C(m, n) <= exp(n (log m - log n) + n + log m)`.
pub fn bin1(m: u64, n: u64) -> bool {
    if n == 0 || n > m {
        return n <= m;
    }
    let (mf, nf) = (m as f64, n as f64);
    ln_binomial(m, n) <= nf * (mf.ln() - nf.ln()) + nf + mf.ln()
}

/// `C(m, n) / C(m, n - 1) = (m - n + 1) / n`.
pub fn bin2_ratio(m: u64, n: u64) -> f64 {
    (m as f64 - n as f64 + 1.0) / n as f64
}

/// Whether the ratio `C(m,n)/C(m,n-1)` is at least 2, which holds whenever
/// `m >= 3n - 1`.
pub fn bin2(m: u64, n: u64) -> bool {
    n >= 1 && bin2_ratio(m, n) >= 2.0
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BlockCount {
    pub k: u32,
    /// `[e^(k+1) log N]`
    pub m: u64,
    /// `[tau_k]`
    pub n: u64,
}

/// The product-of-binomials bound on the pruned support size, in logs.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CardinalityBound {
    /// `sum_k log sum_{j <= [tau_k]} C([e^(k+1) log N], j)`
    pub log_sum: f64,
    /// `sum_k log (2 C(m_k, n_k))`
    pub log_two_binomial: f64,
    /// The closed-form exponent obtained from the two binomial inequalities.
    pub log_closed_form: f64,
    /// Whether `m_k >= 3 n_k - 1` for every block, so the second step applies.
    pub ratio_step_applies: bool,
    pub log_n: f64,
    pub blocks: Vec<BlockCount>,
}

impl CardinalityBound {
    pub fn value(&self) -> f64 {
        self.log_sum.exp()
    }

    pub fn within_n(&self) -> bool {
        self.log_sum <= self.log_n
    }
}

pub fn cardinality_bound(params: &ConstructionParams) -> Result<CardinalityBound> {
    params.validate_near_half()?;
    let g = BandGeometry::new(params.n, params.sigma, params.alpha)?;
    let a = params.a;
    let mut log_sum = 0.0;
    let mut log_two = 0.0;
    let mut log_closed = 0.0;
    let mut ratio_ok = true;
    let mut blocks = Vec::new();
    for k in 1..=g.block_count() {
        let kf = f64::from(k);
        let m = ((kf + 1.0).exp() * g.log_n).floor() as u64;
        let tau = g.threshold(k, a);
        let n = tau.floor() as u64;
        let terms: Vec<f64> = (0..=n.min(m)).map(|j| ln_binomial(m, j)).collect();
        log_sum += log_sum_exp(&terms);
        log_two += 2f64.ln() + ln_binomial(m, n.min(m));
        ratio_ok &= n == 0 || m + 1 >= 3 * n;
        log_closed += 1.0
            + a * g.log_n * (kf + 2.0 + g.log_factor.ln() + 2.0 * kf.ln()) / (kf * kf * g.log_factor)
            + kf
            + 1.0
            + g.log2_n;
        blocks.push(BlockCount { k, m, n });
    }
    Ok(CardinalityBound {
        log_sum,
        log_two_binomial: log_two,
        log_closed_form: log_closed,
        ratio_step_applies: ratio_ok,
        log_n: g.log_n,
        blocks,
    })
}
