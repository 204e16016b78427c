//! Monte Carlo harness for the limit theorems: each experiment draws seeded
//! replicas, compares against the theoretical limit law, and packs the
//! outcome into a serializable [`ExperimentReport`].
//!
//! Replicas are addressed by RngStream(seed, block << 32 | replica), so the
//! aggregate is a pure function of (params, seed, n) and is byte-identical
//! for any worker count.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::numeric::{gamma, norm_cdf, trapezoid};
use crate::processes::{
    self, fhpp_stability_constant, sample_fnpp_marginal_with_compensator, sample_stable,
    JumpDistribution, ProcessError, StableLawParams,
};
use crate::rates::{RateError, RateFunction};
use crate::rng::RngStream;
use crate::specfun::{SpecFunError, StabilityIndex};
use crate::subordinator::{
    build_limit_density_grid, InverseSubordinatorLaw, SubordinatorError,
};

pub const DEFAULT_CLT_THRESHOLD: f64 = 0.03;
pub const DEFAULT_SCALING_THRESHOLD: f64 = 0.05;
pub const DEFAULT_ALPHA_TO_ONE_THRESHOLD: f64 = 0.05;
pub const DEFAULT_STABILITY_THRESHOLD: f64 = 0.1;
pub const DEFAULT_ANSCOMBE_GAUSSIAN_THRESHOLD: f64 = 0.05;
pub const DEFAULT_ANSCOMBE_PARETO_THRESHOLD: f64 = 0.07;
pub const DEFAULT_BROWNIAN_THRESHOLD: f64 = 0.05;

/// Replicas whose statistic becomes degenerate at N = 0 more often than this
/// flag the configuration as needing a larger t.
const INSUFFICIENT_T_ZERO_FRACTION: f64 = 0.25;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Subordinator(#[from] SubordinatorError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("i/o error writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("report parse error: {0}")]
    Parse(String),
}

/// One-sample or two-sample Kolmogorov-Smirnov statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub n: usize,
}

/// D_n = max over the sorted sample of max(i/n − F(x_i), F(x_i) − (i−1)/n).
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], ref_cdf: F) -> KsResult {
    assert!(!samples.is_empty(), "ks_one_sample needs a nonempty sample");
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = ref_cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    KsResult {
        statistic: d,
        n: sorted.len(),
    }
}

/// Two-sample KS distance between empirical CDFs (ties handled jointly).
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> KsResult {
    assert!(!xs.is_empty() && !ys.is_empty());
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).unwrap());
    b.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    KsResult {
        statistic: d,
        n: a.len().min(b.len()),
    }
}

/// Per-time-point statistics of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStat {
    pub t: f64,
    pub ks: f64,
    pub mean: f64,
    pub variance: f64,
    pub extra: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub thresholds: BTreeMap<String, f64>,
}

/// Full record of one experiment run; serializes with stable key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub n_samples: u64,
    pub per_time: Vec<TimeStat>,
    pub histogram: Vec<HistogramBin>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ExperimentReport {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(s).map_err(|e| ExperimentError::Parse(e.to_string()))
    }

    /// Sectioned CSV: one `# per_time` header line and one `# histogram`
    /// header line, each followed by its rows.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("# per_time t,ks,mean,variance\n");
        for row in &self.per_time {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.t, row.ks, row.mean, row.variance
            ));
        }
        out.push_str("# histogram lo,hi,count\n");
        for bin in &self.histogram {
            out.push_str(&format!("{},{},{}\n", bin.lo, bin.hi, bin.count));
        }
        out
    }

    /// All floating-point payloads, for NaN/Inf screening before writes.
    pub fn float_values(&self) -> Vec<f64> {
        let mut vs = Vec::new();
        for row in &self.per_time {
            vs.extend([row.t, row.ks, row.mean, row.variance]);
            vs.extend(row.extra.values().copied());
        }
        for bin in &self.histogram {
            vs.extend([bin.lo, bin.hi]);
        }
        vs.extend(self.verdict.thresholds.values().copied());
        vs
    }
}

/// Serializes a report to `path` in the requested format.
pub fn emit_report(
    report: &ExperimentReport,
    path: &Path,
    format: ReportFormat,
) -> Result<(), ExperimentError> {
    let payload = match format {
        ReportFormat::Json => report.to_json_string(),
        ReportFormat::Csv => report.to_csv_string(),
    };
    let io_err = |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    file.write_all(payload.as_bytes()).map_err(io_err)?;
    Ok(())
}

/// Draws `n` replicas with per-replica streams (seed, block << 32 | i); the
/// collected order is by replica index regardless of worker count.
fn replica_samples<T, F>(n: usize, seed: u64, block: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream) -> T + Sync + Send,
{
    let stream = |i: usize| {
        let mut rng = RngStream::new(seed, (block << 32) | i as u64);
        f(&mut rng)
    };
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(stream).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(stream).collect()
    }
}

/// 60 equal-width bins over the central [0.1%, 99.9%] quantile range;
/// outliers are clamped into the edge bins so the counts sum to n.
fn histogram(samples: &[f64]) -> Vec<HistogramBin> {
    if samples.is_empty() {
        return Vec::new();
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p).floor() as usize];
    let (mut lo, mut hi) = (q(0.001), q(0.999));
    if hi <= lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let n_bins = 60usize;
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for &x in samples {
        let idx = (((x - lo) / width).floor() as i64).clamp(0, n_bins as i64 - 1) as usize;
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: lo + width * i as f64,
            hi: lo + width * (i + 1) as f64,
            count,
        })
        .collect()
}

fn mean_and_variance(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

fn require_increasing(values: &[f64], what: &str) -> Result<(), ExperimentError> {
    if values.is_empty() {
        return Err(ExperimentError::Domain(format!("{what} must be nonempty")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExperimentError::Domain(format!(
            "{what} must be strictly increasing"
        )));
    }
    Ok(())
}

fn base_params(alpha: f64, rf: Option<&RateFunction>, n: usize) -> BTreeMap<String, serde_json::Value> {
    let mut params = BTreeMap::new();
    params.insert("alpha".into(), serde_json::json!(alpha));
    if let Some(rf) = rf {
        params.insert("rate".into(), serde_json::json!(rf.to_string()));
    }
    params.insert("n".into(), serde_json::json!(n));
    params
}

/// Martingale CLT check: (N_α(t) − Λ(Y_α(t))) / sqrt(Λ(Y_α(t))) against the
/// standard normal, across a time grid. Replicas with Λ(Y) = 0 (numerical
/// underflow; the event has probability zero for t > 0) are redrawn and the
/// redraw fraction reported.
pub fn clt_experiment(
    alpha: StabilityIndex,
    rf: &RateFunction,
    times: &[f64],
    n: usize,
    seed: u64,
    threshold: f64,
) -> Result<ExperimentReport, ExperimentError> {
    require_increasing(times, "times")?;
    if times[0] <= 0.0 {
        return Err(ExperimentError::Domain("times must be positive".into()));
    }
    let mut per_time = Vec::new();
    let mut final_samples = Vec::new();
    for (block, &t) in times.iter().enumerate() {
        let draws: Vec<Result<(f64, u64), ProcessError>> =
            replica_samples(n, seed, block as u64, |rng| {
                let mut redraws = 0u64;
                loop {
                    let (count, a) =
                        sample_fnpp_marginal_with_compensator(alpha, rf, t, rng)?;
                    if a > 0.0 {
                        return Ok(((count as f64 - a) / a.sqrt(), redraws));
                    }
                    redraws += 1;
                    if redraws > 1000 {
                        return Err(ProcessError::BudgetExceeded);
                    }
                }
            });
        let mut stats = Vec::with_capacity(n);
        let mut redraws = 0u64;
        for d in draws {
            let (s, r) = d?;
            stats.push(s);
            redraws += r;
        }
        let ks = ks_one_sample(&stats, norm_cdf).statistic;
        let (mean, variance) = mean_and_variance(&stats);
        let mut extra = BTreeMap::new();
        extra.insert("redraw_fraction".into(), redraws as f64 / n as f64);
        per_time.push(TimeStat {
            t,
            ks,
            mean,
            variance,
            extra,
        });
        if block == times.len() - 1 {
            final_samples = stats;
        }
    }
    let pass = per_time.last().unwrap().ks < threshold;
    let mut params = base_params(alpha.value(), Some(rf), n);
    params.insert("times".into(), serde_json::json!(times));
    Ok(ExperimentReport {
        name: "clt".into(),
        params,
        seed,
        n_samples: n as u64,
        per_time,
        histogram: histogram(&final_samples),
        verdict: Verdict {
            pass,
            thresholds: BTreeMap::from([("final_ks".into(), threshold)]),
        },
    })
}

/// Scaling limit N_α(t)/Λ(t^α) against the CDF of (Y_α(1))^β obtained by
/// trapezoid integration of the transformed limit density.
pub fn scaling_experiment(
    alpha: StabilityIndex,
    rf: &RateFunction,
    times: &[f64],
    n: usize,
    seed: u64,
    threshold: f64,
) -> Result<ExperimentReport, ExperimentError> {
    require_increasing(times, "times")?;
    let beta = rf.declared_rv_index().ok_or_else(|| {
        ExperimentError::Domain(
            "scaling experiment needs a regularly varying rate (linear or weibull)".into(),
        )
    })?;
    let limit_cdf = build_limit_density_grid(alpha, beta, 1.0, 1024)?.cdf();
    let ref_cdf = |x: f64| limit_cdf.eval(x);
    let mut per_time = Vec::new();
    let mut final_samples = Vec::new();
    for (block, &t) in times.iter().enumerate() {
        let norm = rf.cumulative(t.powf(alpha.value()))?;
        let draws: Vec<Result<f64, ProcessError>> =
            replica_samples(n, seed, block as u64, |rng| {
                let (count, _) = sample_fnpp_marginal_with_compensator(alpha, rf, t, rng)?;
                Ok(count as f64 / norm)
            });
        let stats = draws.into_iter().collect::<Result<Vec<_>, _>>()?;
        let ks = ks_one_sample(&stats, ref_cdf).statistic;
        let (mean, variance) = mean_and_variance(&stats);
        per_time.push(TimeStat {
            t,
            ks,
            mean,
            variance,
            extra: BTreeMap::new(),
        });
        if block == times.len() - 1 {
            final_samples = stats;
        }
    }
    let pass = per_time.last().unwrap().ks < threshold;
    let mut params = base_params(alpha.value(), Some(rf), n);
    params.insert("times".into(), serde_json::json!(times));
    params.insert("beta".into(), serde_json::json!(beta));
    Ok(ExperimentReport {
        name: "scaling".into(),
        params,
        seed,
        n_samples: n as u64,
        per_time,
        histogram: histogram(&final_samples),
        verdict: Verdict {
            pass,
            thresholds: BTreeMap::from([("final_ks".into(), threshold)]),
        },
    })
}

/// Total-variation distance between the FNPP marginal and Poisson(Λ(t)) as
/// α → 1 (marginal form of the J₁ convergence). Quadrature only, no RNG;
/// the seed is recorded for schema uniformity.
pub fn alpha_to_one_experiment(
    alphas: &[f64],
    rf: &RateFunction,
    t: f64,
    k_max: u64,
    seed: u64,
    threshold: f64,
) -> Result<ExperimentReport, ExperimentError> {
    require_increasing(alphas, "alphas")?;
    if alphas.iter().any(|&a| !(0.0 < a && a < 1.0)) {
        return Err(ExperimentError::Domain("alphas must lie in (0, 1)".into()));
    }
    let lam_t = rf.cumulative(t)?;
    let mut per_time = Vec::new();
    for &a in alphas {
        let alpha = StabilityIndex::new(a)?;
        let pmf = processes::MarginalPmf::new(alpha, rf, t)?;
        let mut tv = 0.0;
        let mut mean = 0.0;
        let mut second = 0.0;
        for k in 0..=k_max {
            let p = pmf.pmf(k)?;
            let q = poisson_pmf_pub(k, lam_t);
            tv += (p - q).abs();
            mean += k as f64 * p;
            second += (k as f64).powi(2) * p;
        }
        tv *= 0.5;
        per_time.push(TimeStat {
            t: a,
            ks: tv,
            mean,
            variance: second - mean * mean,
            extra: BTreeMap::new(),
        });
    }
    let decreasing = per_time.windows(2).all(|w| w[1].ks < w[0].ks);
    let pass = decreasing && per_time.last().unwrap().ks < threshold;
    let mut params = base_params(f64::NAN, Some(rf), 0);
    params.remove("alpha");
    params.remove("n");
    params.insert("alphas".into(), serde_json::json!(alphas));
    params.insert("t".into(), serde_json::json!(t));
    params.insert("k_max".into(), serde_json::json!(k_max));
    Ok(ExperimentReport {
        name: "alpha_to_one".into(),
        params,
        seed,
        n_samples: 0,
        per_time,
        histogram: Vec::new(),
        verdict: Verdict {
            pass,
            thresholds: BTreeMap::from([("final_tv".into(), threshold)]),
        },
    })
}

fn poisson_pmf_pub(k: u64, lambda: f64) -> f64 {
    crate::processes::poisson_pmf(k, lambda)
}

/// Relative-stability check for the FHPP: exceedance probabilities
/// P(|N_α(t)/(C t^α) − 1| > ε) with C = λ/Γ(1+α), per (t, ε).
pub fn stability_experiment(
    alpha: StabilityIndex,
    lambda: f64,
    times: &[f64],
    epsilons: &[f64],
    n: usize,
    seed: u64,
    threshold: f64,
) -> Result<ExperimentReport, ExperimentError> {
    require_increasing(times, "times")?;
    if epsilons.is_empty() || epsilons.iter().any(|&e| e <= 0.0) {
        return Err(ExperimentError::Domain("epsilons must be positive".into()));
    }
    let rf = RateFunction::linear(lambda)?;
    let c = fhpp_stability_constant(alpha, lambda);
    let mut per_time = Vec::new();
    let mut final_samples = Vec::new();
    for (block, &t) in times.iter().enumerate() {
        let norm = c * t.powf(alpha.value());
        let draws: Vec<Result<f64, ProcessError>> =
            replica_samples(n, seed, block as u64, |rng| {
                let (count, _) = sample_fnpp_marginal_with_compensator(alpha, &rf, t, rng)?;
                Ok(count as f64 / norm)
            });
        let ratios = draws.into_iter().collect::<Result<Vec<_>, _>>()?;
        let mut extra = BTreeMap::new();
        let mut worst: f64 = 0.0;
        for &eps in epsilons {
            let frac = ratios.iter().filter(|&&r| (r - 1.0).abs() > eps).count() as f64
                / n as f64;
            extra.insert(format!("exceedance_eps_{eps}"), frac);
            worst = worst.max(frac);
        }
        let (mean, variance) = mean_and_variance(&ratios);
        per_time.push(TimeStat {
            t,
            ks: worst,
            mean,
            variance,
            extra,
        });
        if block == times.len() - 1 {
            final_samples = ratios;
        }
    }
    // Pass if, for each epsilon, the exceedance profile is nonincreasing in
    // t and ends below the threshold.
    let mut pass = true;
    for &eps in epsilons {
        let key = format!("exceedance_eps_{eps}");
        let seq: Vec<f64> = per_time.iter().map(|row| row.extra[&key]).collect();
        if seq.windows(2).any(|w| w[1] > w[0]) || *seq.last().unwrap() >= threshold {
            pass = false;
        }
    }
    let mut params = base_params(alpha.value(), Some(&rf), n);
    params.insert("times".into(), serde_json::json!(times));
    params.insert("epsilons".into(), serde_json::json!(epsilons));
    params.insert("stability_constant".into(), serde_json::json!(c));
    Ok(ExperimentReport {
        name: "stability".into(),
        params,
        seed,
        n_samples: n as u64,
        per_time,
        histogram: histogram(&final_samples),
        verdict: Verdict {
            pass,
            thresholds: BTreeMap::from([("max_final_exceedance".into(), threshold)]),
        },
    })
}

/// Scale σ* of the stable limit for centered Pareto partial sums:
/// n^{−1/a}(S_n − nμ) → S_a(σ*, 1, 0) with
/// σ*^a = scale^a Γ(2−a) |cos(πa/2)| / (a−1), 1 < a < 2.
pub fn pareto_stable_sigma(tail_index: f64, scale: f64) -> f64 {
    let a = tail_index;
    (scale.powf(a) * gamma(2.0 - a) * (std::f64::consts::FRAC_PI_2 * a).cos().abs()
        / (a - 1.0))
        .powf(1.0 / a)
}

/// Anscombe-type compound limit: a_m Z_α(t) at m = ⌊C t^α⌋ against direct
/// draws of the limit stable law, by two-sample KS.
pub fn anscombe_experiment(
    alpha: StabilityIndex,
    lambda: f64,
    jump: &JumpDistribution,
    t: f64,
    n: usize,
    seed: u64,
    threshold: f64,
) -> Result<ExperimentReport, ExperimentError> {
    if !(t > 0.0) {
        return Err(ExperimentError::Domain(format!("t must be positive, got {t}")));
    }
    let rf = RateFunction::linear(lambda)?;
    let c = fhpp_stability_constant(alpha, lambda);
    let m = (c * t.powf(alpha.value())).floor();
    if m < 1.0 {
        return Err(ExperimentError::Domain(format!(
            "effective sample index m = floor(C t^alpha) = {m} is too small"
        )));
    }
    let (a_m, limit): (f64, StableLawParams) = match *jump {
        JumpDistribution::Gaussian { mean, sd } => {
            if mean != 0.0 {
                return Err(ExperimentError::Domain(
                    "anscombe experiment needs centered jumps".into(),
                ));
            }
            (
                m.powf(-0.5),
                StableLawParams::new(2.0, sd * std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.0)?,
            )
        }
        JumpDistribution::Pareto {
            tail_index,
            scale,
            centered,
        } => {
            if !centered || !(1.0 < tail_index && tail_index < 2.0) {
                return Err(ExperimentError::Domain(
                    "anscombe experiment needs centered pareto jumps with tail index in (1, 2)"
                        .into(),
                ));
            }
            (
                m.powf(-1.0 / tail_index),
                StableLawParams::new(tail_index, pareto_stable_sigma(tail_index, scale), 1.0, 0.0)?,
            )
        }
    };

    let draws: Vec<Result<(f64, bool), ProcessError>> = replica_samples(n, seed, 0, |rng| {
        let (count, _) = sample_fnpp_marginal_with_compensator(alpha, &rf, t, rng)?;
        let mut z = 0.0;
        for _ in 0..count {
            z += jump.sample(rng);
        }
        Ok((a_m * z, count == 0))
    });
    let mut stats = Vec::with_capacity(n);
    let mut zeros = 0usize;
    for d in draws {
        let (s, was_zero) = d?;
        stats.push(s);
        zeros += usize::from(was_zero);
    }
    let reference = replica_samples(n, seed, 1, |rng| sample_stable(&limit, rng));
    let ks = ks_two_sample(&stats, &reference).statistic;
    let zero_fraction = zeros as f64 / n as f64;
    let insufficient_t = zero_fraction > INSUFFICIENT_T_ZERO_FRACTION;
    let (mean, variance) = mean_and_variance(&stats);
    let mut extra = BTreeMap::new();
    extra.insert("zero_fraction".into(), zero_fraction);
    extra.insert("insufficient_t".into(), f64::from(u8::from(insufficient_t)));
    extra.insert("m".into(), m);
    extra.insert("limit_sigma".into(), limit.sigma);
    let per_time = vec![TimeStat {
        t,
        ks,
        mean,
        variance,
        extra,
    }];
    let pass = ks < threshold && !insufficient_t;
    let mut params = base_params(alpha.value(), Some(&rf), n);
    params.insert("t".into(), serde_json::json!(t));
    params.insert(
        "jump".into(),
        serde_json::json!(match *jump {
            JumpDistribution::Gaussian { mean, sd } => format!("gaussian:mean={mean},sd={sd}"),
            JumpDistribution::Pareto {
                tail_index,
                scale,
                centered,
            } => format!("pareto:a={tail_index},scale={scale},centered={centered}"),
        }),
    );
    Ok(ExperimentReport {
        name: "anscombe".into(),
        params,
        seed,
        n_samples: n as u64,
        per_time,
        histogram: histogram(&stats),
        verdict: Verdict {
            pass,
            thresholds: BTreeMap::from([("final_ks".into(), threshold)]),
        },
    })
}

/// Brownian-mixture limit of the FHPP fluctuation field:
/// (N_1(λ Y_α(t)) − λ Y_α(t)) / √λ against F(x) = ∫ Φ(x/√u) h_α(t, u) du,
/// across increasing λ.
pub fn brownian_mixture_experiment(
    alpha: StabilityIndex,
    lambdas: &[f64],
    t: f64,
    n: usize,
    seed: u64,
    threshold: f64,
) -> Result<ExperimentReport, ExperimentError> {
    require_increasing(lambdas, "lambdas")?;
    if lambdas[0] <= 0.0 {
        return Err(ExperimentError::Domain("lambdas must be positive".into()));
    }
    let law = InverseSubordinatorLaw::new(alpha, t)?;
    let grid = law.build_grid(1024)?;
    let mass = grid.mass();
    let ref_cdf = |x: f64| {
        let weighted: Vec<(f64, f64)> = grid
            .points()
            .iter()
            .map(|&(u, h)| {
                let phi = if u == 0.0 {
                    // Φ(x/√u) degenerates to a step at u = 0.
                    if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        0.0
                    } else {
                        0.5
                    }
                } else {
                    norm_cdf(x / u.sqrt())
                };
                (u, phi * h)
            })
            .collect();
        (trapezoid(&weighted) / mass).clamp(0.0, 1.0)
    };
    let mut per_time = Vec::new();
    let mut final_samples = Vec::new();
    for (block, &lambda) in lambdas.iter().enumerate() {
        let draws: Vec<Result<f64, ProcessError>> =
            replica_samples(n, seed, block as u64, |rng| {
                let l = crate::subordinator::sample_stable_subordinator(alpha, rng);
                let y = (t / l).powf(alpha.value());
                let count = crate::processes::poisson_draw(lambda * y, rng);
                Ok((count as f64 - lambda * y) / lambda.sqrt())
            });
        let stats = draws.into_iter().collect::<Result<Vec<_>, _>>()?;
        let ks = ks_one_sample(&stats, ref_cdf).statistic;
        let (mean, variance) = mean_and_variance(&stats);
        per_time.push(TimeStat {
            t: lambda,
            ks,
            mean,
            variance,
            extra: BTreeMap::new(),
        });
        if block == lambdas.len() - 1 {
            final_samples = stats;
        }
    }
    let decreasing = per_time.windows(2).all(|w| w[1].ks < w[0].ks);
    let pass = decreasing && per_time.last().unwrap().ks < threshold;
    let mut params = base_params(alpha.value(), None, n);
    params.insert("lambdas".into(), serde_json::json!(lambdas));
    params.insert("t".into(), serde_json::json!(t));
    Ok(ExperimentReport {
        name: "brownian_mixture".into(),
        params,
        seed,
        n_samples: n as u64,
        per_time,
        histogram: histogram(&final_samples),
        verdict: Verdict {
            pass,
            thresholds: BTreeMap::from([("final_ks".into(), threshold)]),
        },
    })
}
