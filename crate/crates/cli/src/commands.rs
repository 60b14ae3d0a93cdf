use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use resonance_core::analytic::{
    append_run_log, certify_lower_bound, scan_max, Evaluator, Mollifier,
    MomentOptions, Target,
};
use resonance_core::bounds::{bound_profile, profiles_to_csv, BoundConstants};
use resonance_core::construct::{
    additive_discretize, cardinality_bound, check_support, default_a, enumerate_support,
    gal_divisor_set, BandGeometry,
};
use resonance_core::oracle::resonance_ratio_pairwise;
use resonance_core::quadform::{gal_ratio_product, resonance_ratio, QuadFormReport};
use resonance_core::verify::run_verify;
use resonance_core::{
    sieve_primes, ConstructionParams, Error, ErrorClass, PrimeTable, ResonatorSet, SetKind,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{pick, DeskCaps, FileConfig, Format, RunConfig};
use crate::GlobalArgs;

/// Largest set the pairwise oracle is run on.
const ORACLE_MAX_SET: usize = 5000;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.class() {
            ErrorClass::Parameter => 2,
            ErrorClass::Convergence => 3,
            ErrorClass::ImplementationFault => 4,
            ErrorClass::Io => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

fn fault(message: String) -> Failure {
    Failure { code: 4, message }
}

fn param(message: impl Into<String>) -> Failure {
    Error::Parameter(message.into()).into()
}

type Outcome = Result<(), Failure>;

pub struct Context {
    file: FileConfig,
    seed: u64,
    format: Option<Format>,
    out: Option<PathBuf>,
    run_log: Option<PathBuf>,
    caps: DeskCaps,
}

impl Context {
    pub fn new(g: &GlobalArgs) -> Result<Self, Failure> {
        let file = match &g.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        Ok(Self {
            seed: pick(g.seed, file.seed, 42),
            format: g.format.or(file.format),
            out: g.out.clone().or_else(|| file.output_path.clone()),
            run_log: g.run_log.clone().or_else(|| file.run_log.clone()),
            caps: file.desk_caps.unwrap_or_default(),
            file,
        })
    }

    fn table(&self, limit: f64) -> Result<PrimeTable, Failure> {
        self.caps.check_sieve(limit)?;
        Ok(sieve_primes(limit.max(2.0).ceil() as u64)?)
    }

    /// Writes the JSON (or CSV) payload and the run-log record.
    fn emit(
        &self,
        command: &str,
        params: Option<ConstructionParams>,
        json: String,
        csv: Option<String>,
        default_format: Format,
    ) -> Outcome {
        let format = self.format.unwrap_or(default_format);
        let body = match (format, csv) {
            (Format::Json, _) => json.clone(),
            (Format::Csv, Some(c)) => c,
            (Format::Csv, None) => return Err(param(format!("{command} has no CSV output"))),
        };
        match &self.out {
            Some(p) => std::fs::write(p, ensure_newline(body))?,
            None => std::io::stdout().write_all(ensure_newline(body).as_bytes())?,
        }
        if let Some(log) = &self.run_log {
            let config = RunConfig {
                command: command.to_string(),
                params,
                seed: self.seed,
                output_path: self.out.clone(),
                format,
                desk_caps: self.caps,
            };
            let result: serde_json::Value = serde_json::from_str(&json)?;
            append_run_log(log, &json!({ "config": config, "result": result }))?;
        }
        Ok(())
    }

    /// Summaries go to stdout when the payload went to a file.
    fn summary<T: Serialize>(&self, s: &T) -> Outcome {
        let line = serde_json::to_string(s)?;
        if self.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
        Ok(())
    }
}

fn ensure_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn load_set(caps: &DeskCaps, path: &PathBuf) -> Result<ResonatorSet, Failure> {
    let set = ResonatorSet::load(path)?;
    caps.check_set_size(set.len() as u64)?;
    Ok(set)
}

fn with_sigma(set: ResonatorSet, sigma: f64) -> Result<ResonatorSet, Failure> {
    let mut params = set.params().clone();
    params.sigma = sigma;
    Ok(ResonatorSet::new(set.elements().to_vec(), set.kind(), params)?)
}

#[derive(Args, Debug, Default)]
pub struct BuildArgs {
    /// gal or near-half
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    ell: Option<u32>,
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long = "T")]
    t: Option<f64>,
    /// Size budget for the near-half support.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ConstructSummary {
    kind: SetKind,
    size: usize,
    weight_sq_sum: f64,
    max_log_value: f64,
    cardinality: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold_compliant: Option<bool>,
}

struct Built {
    set: ResonatorSet,
    summary: ConstructSummary,
}

fn build(ctx: &Context, a: &BuildArgs, default_sigma: f64, default_budget: usize, discretize: bool) -> Result<Built, Failure> {
    let f = &ctx.file;
    let kind = pick(a.kind.clone(), f.kind.clone(), "gal".to_string());
    match kind.as_str() {
        "gal" => {
            let x = pick(a.x, f.x, 5.0);
            let ell = pick(a.ell, f.ell, 2);
            let sigma = pick(a.sigma, f.sigma, 1.0);
            let table = ctx.table(x)?;
            let mut set = with_sigma(gal_divisor_set(&table, x, ell, ctx.caps.max_set_size)?, sigma)?;
            if discretize {
                let t = a.t.or(f.t).ok_or_else(|| param("discretizing needs --T"))?;
                set = additive_discretize(&set, t)?;
            }
            let predicted = f64::from(ell).powi(table.pi(x)? as i32);
            let summary = ConstructSummary {
                kind: set.kind(),
                size: set.len(),
                weight_sq_sum: set.weight_sq_sum(),
                max_log_value: set.max_log_value(),
                cardinality: json!({
                    "predicted": predicted,
                    "cap": ctx.caps.max_set_size,
                    "withinCap": predicted <= ctx.caps.max_set_size as f64,
                }),
                threshold_compliant: None,
            };
            Ok(Built { set, summary })
        }
        "near-half" => {
            let n = pick(a.n, f.n, 10_000);
            let sigma = pick(a.sigma, f.sigma, default_sigma);
            let t = pick(a.t, f.t, (n as f64).powi(2));
            let budget = pick(a.budget, f.budget, default_budget);
            ctx.caps.check_set_size(budget as u64)?;
            let mut p = ConstructionParams::near_half_with_n(t, n, sigma);
            if let Some(alpha) = a.alpha.or(f.alpha) {
                p.alpha = alpha;
                p.a = default_a(alpha);
            }
            if let Some(aa) = a.a.or(f.a) {
                p.a = aa;
            }
            p.validate_near_half()?;
            let g = BandGeometry::new(n, p.sigma, p.alpha)?;
            let table = ctx.table(g.upper)?;
            let support = enumerate_support(&table, &p, budget)?;
            let compliant = check_support(&support, &g, p.a).is_ok();
            let bound = cardinality_bound(&p)?;
            let set = if discretize {
                additive_discretize(&support, t)?
            } else {
                support
            };
            let summary = ConstructSummary {
                kind: set.kind(),
                size: set.len(),
                weight_sq_sum: set.weight_sq_sum(),
                max_log_value: set.max_log_value(),
                cardinality: json!({
                    "logBound": bound.log_sum,
                    "logN": bound.log_n,
                    "withinN": bound.within_n(),
                    "logClosedForm": bound.log_closed_form,
                }),
                threshold_compliant: Some(compliant),
            };
            Ok(Built { set, summary })
        }
        other => Err(param(format!("unknown construction kind '{other}' (expected gal or near-half)"))),
    }
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[command(flatten)]
    build: BuildArgs,
    /// Apply the additive discretization at T.
    #[arg(long)]
    discretize: bool,
}

pub fn construct(ctx: &Context, a: ConstructArgs) -> Outcome {
    let built = build(ctx, &a.build, 0.6, 2000, a.discretize)?;
    let set = &built.set;
    ctx.caps.check_set_size(set.len() as u64)?;
    let mut csv = String::from("n,logValue,weight\n");
    for (n, w) in set.iter() {
        csv.push_str(&format!("{n},{},{w}\n", n.log_value()));
    }
    ctx.emit("construct", Some(set.params().clone()), set.to_json()?, Some(csv), Format::Json)?;
    ctx.summary(&built.summary)
}

#[derive(Args, Debug)]
pub struct RatioArgs {
    /// Use the Gál divisor set for --x and --ell.
    #[arg(long, conflicts_with = "set")]
    gal: bool,
    /// A set file written by `construct`.
    #[arg(long)]
    set: Option<PathBuf>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    ell: Option<u32>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Only divisors k <= klimit enter the numerator.
    #[arg(long)]
    klimit: Option<f64>,
    /// Recompute by brute force and compare.
    #[arg(long)]
    oracle: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RatioOutput {
    method: &'static str,
    sigma: f64,
    ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<QuadFormReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_ratio: Option<f64>,
    #[serde(rename = "oracle-match", skip_serializing_if = "Option::is_none")]
    oracle_match: Option<bool>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

fn pairwise(set: &ResonatorSet, sigma: f64, k: f64) -> Result<f64, Failure> {
    if set.len() > ORACLE_MAX_SET {
        return Err(param(format!(
            "the pairwise oracle is limited to {ORACLE_MAX_SET} elements, set has {}",
            set.len()
        )));
    }
    Ok(resonance_ratio_pairwise(set, sigma, k))
}

pub fn ratio(ctx: &Context, a: RatioArgs) -> Outcome {
    let f = &ctx.file;
    let k = pick(a.klimit, f.k_limit, f64::INFINITY);
    let out = if let Some(path) = &a.set {
        let set = load_set(&ctx.caps, path)?;
        let sigma = pick(a.sigma, f.sigma, set.params().sigma);
        let report = resonance_ratio(&set, sigma, k)?;
        let oracle_ratio = if a.oracle { Some(pairwise(&set, sigma, k)?) } else { None };
        RatioOutput {
            method: "direct",
            sigma,
            ratio: report.ratio,
            oracle_match: oracle_ratio.map(|o| close(report.ratio, o)),
            oracle_ratio,
            report: Some(report),
        }
    } else if a.gal || f.kind.as_deref() == Some("gal") {
        let x = pick(a.x, f.x, 5.0);
        let ell = pick(a.ell, f.ell, 2);
        let sigma = pick(a.sigma, f.sigma, 1.0);
        let table = ctx.table(x)?;
        if k.is_infinite() {
            let product = gal_ratio_product(&table, x, ell, sigma)?;
            let report = if a.oracle {
                let set = gal_divisor_set(&table, x, ell, ctx.caps.max_set_size)?;
                Some(resonance_ratio(&set, sigma, k)?)
            } else {
                None
            };
            RatioOutput {
                method: "product",
                sigma,
                ratio: product,
                oracle_ratio: report.as_ref().map(|r| r.ratio),
                oracle_match: report.as_ref().map(|r| close(product, r.ratio)),
                report,
            }
        } else {
            let set = gal_divisor_set(&table, x, ell, ctx.caps.max_set_size)?;
            let report = resonance_ratio(&set, sigma, k)?;
            let oracle_ratio = if a.oracle { Some(pairwise(&set, sigma, k)?) } else { None };
            RatioOutput {
                method: "direct",
                sigma,
                ratio: report.ratio,
                oracle_match: oracle_ratio.map(|o| close(report.ratio, o)),
                oracle_ratio,
                report: Some(report),
            }
        }
    } else {
        return Err(param("ratio needs --gal or --set <file>"));
    };
    ctx.emit("ratio", None, serde_json::to_string_pretty(&out)?, None, Format::Json)?;
    if out.oracle_match == Some(false) {
        return Err(fault(format!(
            "oracle mismatch: {} against {}",
            out.ratio,
            out.oracle_ratio.unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    build: BuildArgs,
    /// A set file written by `construct`; overrides the construction flags.
    #[arg(long)]
    set: Option<PathBuf>,
    /// bump or gaussian
    #[arg(long)]
    mollifier: Option<Mollifier>,
    #[arg(long)]
    scan_budget: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_levels: Option<usize>,
}

pub fn certify(ctx: &Context, a: CertifyArgs) -> Outcome {
    let f = &ctx.file;
    let t = pick(a.build.t, f.t, 5000.0);
    ctx.caps.check_t(t)?;
    let set = match &a.set {
        Some(p) => load_set(&ctx.caps, p)?,
        None => {
            let mut b = BuildArgs { t: Some(t), ..a.build };
            if b.n.is_none() && f.n.is_none() {
                b.n = Some(t.sqrt().floor() as u64);
            }
            build(ctx, &b, 0.55, 100, pick(b.kind.clone(), f.kind.clone(), "gal".into()) == "near-half")?.set
        }
    };
    let sigma = pick(a.build.sigma, f.sigma, set.params().sigma);
    let default_mollifier = if set.kind() == SetKind::GalDivisors {
        Mollifier::Bump
    } else {
        Mollifier::Gaussian
    };
    let file_mollifier = f.mollifier.as_deref().map(str::parse).transpose().map_err(param)?;
    let mollifier = pick(a.mollifier, file_mollifier, default_mollifier);
    let defaults = MomentOptions::default();
    let opts = MomentOptions {
        desk_cap: ctx.caps.max_t,
        tolerance: pick(a.tolerance, f.tolerance, defaults.tolerance),
        max_levels: pick(a.max_levels, f.max_levels, defaults.max_levels),
        ..defaults
    };
    let budget = pick(a.scan_budget, f.scan_budget, 10_000);
    let cert = certify_lower_bound(&set, sigma, t, mollifier, &opts, budget, ctx.seed)?;
    let mut params = set.params().clone();
    params.sigma = sigma;
    params.t = t;
    ctx.emit("certify", Some(params), serde_json::to_string_pretty(&cert)?, None, Format::Json)
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long = "T")]
    t: Option<f64>,
    /// Terms of the zeta head (default T).
    #[arg(long)]
    x: Option<f64>,
    /// Scan |D_M| instead of zeta.
    #[arg(long)]
    partial_sum: Option<u64>,
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
    /// Resonator set whose peaks seed the search.
    #[arg(long)]
    guide: Option<PathBuf>,
}

pub fn scan(ctx: &Context, a: ScanArgs) -> Outcome {
    let f = &ctx.file;
    let t = pick(a.t, f.t, 1e4);
    let lo = a.lo.unwrap_or(t / 2.0);
    let hi = a.hi.unwrap_or(t);
    ctx.caps.check_t(hi.abs().max(lo.abs()))?;
    let target = match a.partial_sum {
        Some(m) => {
            ctx.caps.check_sieve(m as f64)?;
            Target::PartialSum { m }
        }
        None => Target::Zeta {
            sigma: pick(a.sigma, f.sigma, 0.5),
            x: pick(a.x, f.x, t),
        },
    };
    let guide = a.guide.as_ref().map(|p| load_set(&ctx.caps, p)).transpose()?;
    let ev = Evaluator::new(target)?;
    let budget = pick(a.budget, f.scan_budget, 2000);
    let r = scan_max(&ev, (lo, hi), budget, guide.as_ref(), ctx.seed)?;
    ctx.emit("scan", None, serde_json::to_string_pretty(&r)?, None, Format::Json)
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<f64>,
    #[arg(long = "T", value_delimiter = ',')]
    t: Vec<f64>,
}

pub fn bounds(ctx: &Context, a: BoundsArgs) -> Outcome {
    let sigmas = if a.sigma.is_empty() {
        (1..10).map(|i| 0.5 + 0.05 * f64::from(i)).collect()
    } else {
        a.sigma
    };
    let ts = if a.t.is_empty() {
        vec![1e4, 1e6, 1e8, 1e12, 1e20, 1e30]
    } else {
        a.t
    };
    let consts = BoundConstants::default();
    let mut rows = Vec::new();
    for &s in &sigmas {
        for &t in &ts {
            rows.push(bound_profile(s, t, &consts)?);
        }
    }
    ctx.emit(
        "bounds",
        None,
        serde_json::to_string_pretty(&rows)?,
        Some(profiles_to_csv(&rows)),
        Format::Csv,
    )
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Comma-separated gate groups to run.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
}

pub fn verify(ctx: &Context, a: VerifyArgs) -> Outcome {
    let report = run_verify(ctx.seed, &a.only)?;
    let mut csv = String::from("group,name,passed\n");
    for g in &report.gates {
        csv.push_str(&format!("{},{},{}\n", g.group, g.name, g.passed));
    }
    ctx.emit("verify", None, serde_json::to_string_pretty(&report)?, Some(csv), Format::Json)?;
    if !report.all_passed() {
        let failed: Vec<String> = report
            .gates
            .iter()
            .filter(|g| !g.passed)
            .map(|g| format!("{}/{}", g.group, g.name))
            .collect();
        return Err(fault(format!("{} gate(s) failed: {}", failed.len(), failed.join(", "))));
    }
    Ok(())
}
