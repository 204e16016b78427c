//! Browser bindings for the interactive demo page.
//!
//! Three operations back the page: the inverse-subordinator density curve
//! h_α(t, ·), the Mittag-Leffler waiting-time survival curve, and seeded
//! replicas of the compensated-count CLT statistic for histogramming.
//! Curves come back as flat `[x0, y0, x1, y1, ...]` arrays; inputs are
//! clamped into valid ranges so the slider surface cannot hit a domain
//! error.

use wasm_bindgen::prelude::wasm_bindgen;

use fracpois::processes::sample_fnpp_marginal_with_compensator;
use fracpois::rates::RateFunction;
use fracpois::specfun::{ml_survival, EvalAccuracy};
use fracpois::subordinator::InverseSubordinatorLaw;
use fracpois::{RngStream, StabilityIndex};

fn clamp_alpha(alpha: f64) -> StabilityIndex {
    StabilityIndex::new(alpha.clamp(0.02, 0.98)).expect("clamped into (0, 1)")
}

/// Tabulates h_α(t, x) out to the 1 − 1e−6 quantile of Y_α(t);
/// returns interleaved (x, h) pairs.
#[wasm_bindgen]
pub fn subordinator_density_curve(alpha: f64, t: f64, n_points: usize) -> Vec<f64> {
    let alpha = clamp_alpha(alpha);
    let t = t.clamp(0.05, 100.0);
    let n = n_points.clamp(64, 4096);
    let law = InverseSubordinatorLaw::new(alpha, t).expect("t clamped positive");
    let grid = law.build_grid(n).expect("grid over clamped parameters");
    grid.points().iter().flat_map(|&(x, h)| [x, h]).collect()
}

/// Waiting-time survival P(J > t) = E_α(−(λt)^α) on [0, t_max];
/// returns interleaved (t, S) pairs.
#[wasm_bindgen]
pub fn ml_survival_curve(alpha: f64, lambda: f64, t_max: f64, n_points: usize) -> Vec<f64> {
    let alpha = alpha.clamp(0.02, 1.0);
    let lambda = lambda.clamp(0.01, 100.0);
    let t_max = t_max.clamp(0.1, 1000.0);
    let n = n_points.clamp(16, 4096);
    let acc = EvalAccuracy::default();
    (0..n)
        .flat_map(|i| {
            let t = t_max * i as f64 / (n - 1) as f64;
            let s = ml_survival(alpha, lambda, t, &acc).expect("clamped domain");
            [t, s]
        })
        .collect()
}

/// Seeded replicas of (N_α(t) − Λ(Y_α(t))) / sqrt(Λ(Y_α(t))) for the FHPP
/// with unit rate; the page bins them against the standard normal curve.
#[wasm_bindgen]
pub fn clt_samples(alpha: f64, t: f64, n: usize, seed: u64) -> Vec<f64> {
    let alpha = clamp_alpha(alpha);
    let t = t.clamp(0.1, 1e12);
    let n = n.clamp(100, 50_000);
    let rf = RateFunction::linear(1.0).expect("unit rate");
    let mut out = Vec::with_capacity(n);
    let mut rng = RngStream::new(seed, 0);
    while out.len() < n {
        let (count, a) =
            sample_fnpp_marginal_with_compensator(alpha, &rf, t, &mut rng).expect("clamped");
        if a > 0.0 {
            out.push((count as f64 - a) / a.sqrt());
        }
    }
    out
}
