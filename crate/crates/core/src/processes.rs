//! Samplers for the point processes under study: the homogeneous and
//! non-homogeneous Poisson processes, the fractional homogeneous process as
//! a Mittag-Leffler renewal process, the fractional non-homogeneous process
//! N_α(t) = N_1(Λ(Y_α(t))) by time change and by the Gergely record
//! construction, compound versions, and general stable variates for limit
//! comparisons.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Pareto, Poisson};
use thiserror::Error;

use crate::numeric::{adaptive_simpson, gamma, ln_gamma};
use crate::rates::{RateError, RateFunction};
use crate::rng::RngStream;
use crate::specfun::{SpecFunError, StabilityIndex};
use crate::subordinator::{
    sample_stable_subordinator, stable_left_tail_quantile, InverseSubordinatorLaw,
    SubordinatorError,
};

/// ξ-draw budget for one Gergely count.
const GERGELY_DRAW_BUDGET: u64 = 1_000_000;
/// L_α step budget for one discretized FNPP path.
const PATH_STEP_BUDGET: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error(transparent)]
    Subordinator(#[from] SubordinatorError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid too coarse: horizon/grid_step = {cells} cells, need at least 10")]
    GridTooCoarse { cells: f64 },
    #[error("record construction exceeded the {GERGELY_DRAW_BUDGET} xi-draw budget")]
    BudgetExceeded,
    #[error("configuration rejected: {0}")]
    ConfigRejected(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
}

/// Event times of one simulated path: strictly increasing, all within the
/// horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    events: Vec<f64>,
    horizon: f64,
}

impl SamplePath {
    pub fn new(events: Vec<f64>, horizon: f64) -> Result<Self, ProcessError> {
        if !(horizon > 0.0) {
            return Err(ProcessError::Domain(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        for w in events.windows(2) {
            if !(w[1] > w[0]) {
                return Err(ProcessError::Domain(format!(
                    "event times must be strictly increasing ({} after {})",
                    w[1], w[0]
                )));
            }
        }
        if events.first().is_some_and(|&e| e <= 0.0)
            || events.last().is_some_and(|&e| e > horizon)
        {
            return Err(ProcessError::Domain(
                "events must lie in (0, horizon]".into(),
            ));
        }
        Ok(Self { events, horizon })
    }

    pub fn events(&self) -> &[f64] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Right-continuous counting function #{events <= t}.
    pub fn count(&self, t: f64) -> usize {
        self.events.partition_point(|&e| e <= t)
    }

    /// CSV with header `event_time`, one event per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "event_time")?;
        for e in &self.events {
            writeln!(w, "{e}")?;
        }
        Ok(())
    }
}

/// Parameters of a general stable law S_α(σ, β, μ) in the
/// characteristic-function parameterization
/// E e^{iθS} = exp(−σ^α|θ|^α [1 − iβ sign(θ) tan(πα/2)] + iμθ) for α ≠ 1,
/// with the log-corrected branch at α = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableLawParams {
    pub alpha_s: f64,
    pub sigma: f64,
    pub beta_s: f64,
    pub mu: f64,
}

impl StableLawParams {
    pub fn new(alpha_s: f64, sigma: f64, beta_s: f64, mu: f64) -> Result<Self, ProcessError> {
        if !(alpha_s > 0.0 && alpha_s <= 2.0) {
            return Err(ProcessError::Domain(format!(
                "stable index must lie in (0, 2], got {alpha_s}"
            )));
        }
        if !(sigma >= 0.0) {
            return Err(ProcessError::Domain(format!(
                "stable scale must be nonnegative, got {sigma}"
            )));
        }
        if !(-1.0..=1.0).contains(&beta_s) {
            return Err(ProcessError::Domain(format!(
                "stable skewness must lie in [-1, 1], got {beta_s}"
            )));
        }
        if !mu.is_finite() {
            return Err(ProcessError::Domain(format!("stable shift must be finite, got {mu}")));
        }
        Ok(Self {
            alpha_s,
            sigma,
            beta_s,
            mu,
        })
    }
}

/// Jump law of the compound process. Pareto jumps sit in the domain of
/// attraction of an α-stable law with α = tail_index; Gaussian jumps in the
/// Gaussian domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpDistribution {
    Gaussian { mean: f64, sd: f64 },
    Pareto { tail_index: f64, scale: f64, centered: bool },
}

impl JumpDistribution {
    pub fn gaussian(mean: f64, sd: f64) -> Result<Self, ProcessError> {
        if sd > 0.0 && mean.is_finite() && sd.is_finite() {
            Ok(Self::Gaussian { mean, sd })
        } else {
            Err(ProcessError::Domain(format!(
                "gaussian jumps need finite mean and sd > 0, got mean={mean}, sd={sd}"
            )))
        }
    }

    /// Pareto jumps with P(X > x) = (scale/x)^tail_index for x >= scale.
    /// Centering subtracts the mean, which only exists for tail_index > 1;
    /// below that the b_n = 0 norming regime applies and centering is
    /// rejected.
    pub fn pareto(tail_index: f64, scale: f64, centered: bool) -> Result<Self, ProcessError> {
        if !(tail_index > 0.0 && tail_index < 2.0) || !(scale > 0.0) {
            return Err(ProcessError::Domain(format!(
                "pareto jumps need tail_index in (0, 2) and scale > 0, got {tail_index}, {scale}"
            )));
        }
        if centered && tail_index <= 1.0 {
            return Err(ProcessError::Domain(
                "pareto jumps with tail_index <= 1 have no mean to center by".into(),
            ));
        }
        Ok(Self::Pareto {
            tail_index,
            scale,
            centered,
        })
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            Self::Gaussian { mean, sd } => Normal::new(mean, sd).unwrap().sample(rng),
            Self::Pareto {
                tail_index,
                scale,
                centered,
            } => {
                let x = Pareto::new(scale, tail_index).unwrap().sample(rng);
                if centered {
                    x - tail_index * scale / (tail_index - 1.0)
                } else {
                    x
                }
            }
        }
    }
}

/// Poisson count with the given mean.
pub(crate) fn poisson_draw(mean: f64, rng: &mut RngStream) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

fn exp1(rng: &mut RngStream) -> f64 {
    Exp::new(1.0).unwrap().sample(rng)
}

/// Homogeneous Poisson path: exponential inter-arrivals at `rate`.
pub fn sample_poisson_path(
    rate: f64,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<SamplePath, ProcessError> {
    if !(rate > 0.0) {
        return Err(ProcessError::Domain(format!("rate must be positive, got {rate}")));
    }
    if !(horizon > 0.0) {
        return Err(ProcessError::Domain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let exp = Exp::new(rate).unwrap();
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp.sample(rng);
        if t > horizon {
            break;
        }
        events.push(t);
    }
    SamplePath::new(events, horizon)
}

/// Non-homogeneous Poisson path as the time transformation N_1(Λ(t)):
/// standard arrivals on [0, Λ(horizon)] mapped through Λ⁻¹.
pub fn sample_nhpp(
    rf: &RateFunction,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<SamplePath, ProcessError> {
    if !(horizon > 0.0) {
        return Err(ProcessError::Domain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let total = rf.cumulative(horizon)?;
    let mut events = Vec::new();
    let mut s = 0.0;
    loop {
        s += exp1(rng);
        if s > total {
            break;
        }
        events.push(rf.inverse(s)?.min(horizon));
    }
    SamplePath::new(events, horizon)
}

/// One Mittag-Leffler ML(α, λ) waiting time by the Kozubowski-Rachev
/// transformation J = −(1/λ) log(U) [sin(απ)/tan(απV) − cos(απ)]^{1/α}.
pub fn ml_waiting_time(alpha: StabilityIndex, lambda: f64, rng: &mut RngStream) -> f64 {
    let a = alpha.value();
    let u = open_unit(rng);
    let v = open_unit(rng);
    let bracket = (a * std::f64::consts::PI).sin() / (a * std::f64::consts::PI * v).tan()
        - (a * std::f64::consts::PI).cos();
    -u.ln() / lambda * bracket.powf(1.0 / a)
}

fn open_unit(rng: &mut RngStream) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// FHPP path as a renewal process with i.i.d. ML(α, λ) waiting times.
pub fn sample_fhpp_renewal(
    alpha: StabilityIndex,
    lambda: f64,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<SamplePath, ProcessError> {
    if !(lambda > 0.0) {
        return Err(ProcessError::Domain(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(horizon > 0.0) {
        return Err(ProcessError::Domain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        t += ml_waiting_time(alpha, lambda, rng);
        if t > horizon {
            break;
        }
        events.push(t);
    }
    SamplePath::new(events, horizon)
}

/// Fixed-t FNPP marginal: exact draw of (N_α(t), Λ(Y_α(t))).
///
/// Draws Y = Y_α(t) through the stable identity, then a Poisson(Λ(Y)) count;
/// the compensator value Λ(Y) is returned alongside so experiments can form
/// the martingale normalization per replica.
pub fn sample_fnpp_marginal_with_compensator(
    alpha: StabilityIndex,
    rf: &RateFunction,
    t: f64,
    rng: &mut RngStream,
) -> Result<(u64, f64), ProcessError> {
    if !(t > 0.0) {
        return Err(ProcessError::Domain(format!("t must be positive, got {t}")));
    }
    let l = sample_stable_subordinator(alpha, rng);
    let y = (t / l).powf(alpha.value());
    let a = rf.cumulative(y)?;
    Ok((poisson_draw(a, rng), a))
}

/// Fixed-t FNPP marginal count N_α(t).
pub fn sample_fnpp_marginal(
    alpha: StabilityIndex,
    rf: &RateFunction,
    t: f64,
    rng: &mut RngStream,
) -> Result<u64, ProcessError> {
    sample_fnpp_marginal_with_compensator(alpha, rf, t, rng).map(|(n, _)| n)
}

/// Discretized FNPP path.
///
/// L_α is simulated on a grid of `grid_step`-increments (each increment
/// distributed as grid_step^{1/α} L_α(1)), Y_α is read off as the
/// right-continuous inverse on that grid, and each cell (t_{j−1}, t_j]
/// receives a Poisson(Λ(Y_j) − Λ(Y_{j−1})) batch of events placed uniformly
/// inside the cell. Counts at grid times are exact conditionally on the
/// discretized inverse; Y itself is biased upward by at most one grid cell.
pub fn sample_fnpp_path(
    alpha: StabilityIndex,
    rf: &RateFunction,
    horizon: f64,
    grid_step: f64,
    rng: &mut RngStream,
) -> Result<SamplePath, ProcessError> {
    if !(horizon > 0.0) || !(grid_step > 0.0) {
        return Err(ProcessError::Domain(format!(
            "horizon and grid_step must be positive, got {horizon}, {grid_step}"
        )));
    }
    let cells = horizon / grid_step;
    if cells < 10.0 {
        return Err(ProcessError::GridTooCoarse { cells });
    }
    let n_cells = cells.ceil() as usize;
    let a = alpha.value();
    let step_scale = grid_step.powf(1.0 / a);

    // Passage times L(u_i), u_i = i·grid_step, until L exceeds the horizon.
    let mut passage = vec![0.0f64];
    let mut l = 0.0;
    while l <= horizon {
        if passage.len() > PATH_STEP_BUDGET {
            return Err(ProcessError::BudgetExceeded);
        }
        l += step_scale * sample_stable_subordinator(alpha, rng);
        passage.push(l);
    }

    let mut events = Vec::new();
    let mut idx = 0usize;
    let mut prev_lambda = 0.0;
    let mut prev_t = 0.0;
    for j in 1..=n_cells {
        let t_j = (j as f64 * grid_step).min(horizon);
        while passage[idx] <= t_j {
            idx += 1;
        }
        // Right-continuous inverse on the grid: Y(t_j) ≈ u_idx.
        let y_j = idx as f64 * grid_step;
        let lambda_j = rf.cumulative(y_j)?;
        let k = poisson_draw(lambda_j - prev_lambda, rng);
        for _ in 0..k {
            let u: f64 = rng.random();
            events.push(prev_t + (t_j - prev_t) * u.max(f64::EPSILON));
        }
        prev_lambda = lambda_j;
        prev_t = t_j;
    }
    events.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for i in 1..events.len() {
        if events[i] <= events[i - 1] {
            events[i] = events[i - 1].next_up();
        }
    }
    SamplePath::new(events, horizon)
}

/// Gergely record-value sampler for the FNPP marginal.
///
/// Generates ξ_i = Λ⁻¹(Exp(1)) (so P(ξ ≤ s) = 1 − e^{−Λ(s)}) and counts the
/// strict records that stay at or below a drawn Y_α(t); that count equals
/// the FNPP marginal in distribution. The construction needs geometrically
/// many draws (success probability e^{−Λ(Y)}), so configurations whose
/// expected budget e^{Λ(t^α q_{0.999})} exceeds the draw budget are rejected
/// up front.
#[derive(Debug, Clone)]
pub struct GergelySampler {
    rf: RateFunction,
    law: InverseSubordinatorLaw,
}

impl GergelySampler {
    pub fn new(
        alpha: StabilityIndex,
        rf: RateFunction,
        t: f64,
    ) -> Result<Self, ProcessError> {
        let law = InverseSubordinatorLaw::new(alpha, t)?;
        let c = stable_left_tail_quantile(alpha, 1e-3)?;
        let y_hi = (t / c).powf(alpha.value());
        let expected_budget = rf.cumulative(y_hi)?;
        if expected_budget > (GERGELY_DRAW_BUDGET as f64).ln() {
            return Err(ProcessError::ConfigRejected(format!(
                "expected draw budget exp({expected_budget:.2}) exceeds {GERGELY_DRAW_BUDGET}"
            )));
        }
        Ok(Self { rf, law })
    }

    pub fn draw(&self, rng: &mut RngStream) -> Result<u64, ProcessError> {
        let y = self
            .law
            .sample(rng, crate::subordinator::InverseSamplingMethod::StableIdentity)?;
        gergely_count_below(&self.rf, y, rng)
    }
}

/// Number of strict records of the ξ-sequence that are <= y.
pub fn gergely_count_below(
    rf: &RateFunction,
    y: f64,
    rng: &mut RngStream,
) -> Result<u64, ProcessError> {
    let mut record = 0.0f64;
    let mut count = 0u64;
    let mut draws = 0u64;
    loop {
        draws += 1;
        if draws > GERGELY_DRAW_BUDGET {
            return Err(ProcessError::BudgetExceeded);
        }
        let xi = rf.inverse(exp1(rng))?;
        if xi > record {
            record = xi;
            if xi <= y {
                count += 1;
            } else {
                return Ok(count);
            }
        }
    }
}

/// One FNPP marginal count via the Gergely construction.
pub fn sample_fnpp_gergely_count(
    alpha: StabilityIndex,
    rf: &RateFunction,
    t: f64,
    rng: &mut RngStream,
) -> Result<u64, ProcessError> {
    GergelySampler::new(alpha, *rf, t)?.draw(rng)
}

/// Marginal pmf evaluator for one (α, Λ, t) configuration; builds the
/// subordinator law and its support once, then integrates
/// ∫₀^∞ e^{−Λ(u)} Λ(u)^k / k! · h_α(t, u) du per k by adaptive quadrature
/// over the density-grid support. Density values are memoized across k,
/// where the quadrature nodes largely coincide.
pub struct MarginalPmf {
    law: InverseSubordinatorLaw,
    rf: RateFunction,
    x_hi: f64,
    h_at_zero: f64,
    h_cache: std::cell::RefCell<std::collections::HashMap<u64, f64>>,
}

impl MarginalPmf {
    pub fn new(
        alpha: StabilityIndex,
        rf: &RateFunction,
        t: f64,
    ) -> Result<Self, ProcessError> {
        let law = InverseSubordinatorLaw::new(alpha, t)?;
        let grid = law.build_grid(512)?;
        Ok(Self {
            law,
            rf: *rf,
            x_hi: grid.x_hi(),
            h_at_zero: law.density_at_zero(),
            h_cache: std::cell::RefCell::new(std::collections::HashMap::new()),
        })
    }

    fn density_cached(&self, u: f64) -> Result<f64, ProcessError> {
        if let Some(&h) = self.h_cache.borrow().get(&u.to_bits()) {
            return Ok(h);
        }
        let h = self.law.density(u)?;
        self.h_cache.borrow_mut().insert(u.to_bits(), h);
        Ok(h)
    }

    pub fn pmf(&self, k: u64) -> Result<f64, ProcessError> {
        let error: std::cell::Cell<bool> = std::cell::Cell::new(false);
        let f = |u: f64| {
            if u < 0.0 {
                return 0.0;
            }
            let h = if u == 0.0 {
                self.h_at_zero
            } else {
                match self.density_cached(u) {
                    Ok(v) => v,
                    Err(_) => {
                        error.set(true);
                        0.0
                    }
                }
            };
            let lam = match self.rf.cumulative(u) {
                Ok(v) => v,
                Err(_) => {
                    error.set(true);
                    return 0.0;
                }
            };
            h * poisson_pmf(k, lam)
        };
        let (v, converged) = adaptive_simpson(&f, 0.0, self.x_hi, 1e-9, 28);
        if error.get() {
            return Err(ProcessError::Quadrature(
                "integrand evaluation failed inside the support".into(),
            ));
        }
        if !converged {
            return Err(ProcessError::Quadrature(format!(
                "pmf quadrature did not converge for k = {k}"
            )));
        }
        Ok(v.clamp(0.0, 1.0))
    }
}

/// P(N_α(t) = k) for a single k; repeated k values over one configuration
/// are cheaper through [`MarginalPmf`].
pub fn fnpp_pmf(
    alpha: StabilityIndex,
    rf: &RateFunction,
    t: f64,
    k: u64,
) -> Result<f64, ProcessError> {
    MarginalPmf::new(alpha, rf, t)?.pmf(k)
}

pub(crate) fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (kf * lambda.ln() - lambda - ln_gamma(kf + 1.0)).exp()
}

/// One draw of S ~ S_α(σ, β, μ) by the Chambers-Mallows-Stuck method.
pub fn sample_stable(p: &StableLawParams, rng: &mut RngStream) -> f64 {
    let a = p.alpha_s;
    let u = std::f64::consts::PI * (open_unit(rng) - 0.5);
    let w = -open_unit(rng).ln();
    if (a - 1.0).abs() < 1e-12 {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let x = (1.0 / half_pi)
            * ((half_pi + p.beta_s * u) * u.tan()
                - p.beta_s * ((half_pi * w * u.cos()) / (half_pi + p.beta_s * u)).ln());
        return p.sigma * x
            + (2.0 / std::f64::consts::PI) * p.beta_s * p.sigma * p.sigma.ln()
            + p.mu;
    }
    let tan_half = (std::f64::consts::FRAC_PI_2 * a).tan();
    let b = (p.beta_s * tan_half).atan() / a;
    let s = (1.0 + p.beta_s * p.beta_s * tan_half * tan_half).powf(0.5 / a);
    let x = s * (a * (u + b)).sin() / u.cos().powf(1.0 / a)
        * ((u - a * (u + b)).cos() / w).powf((1.0 - a) / a);
    p.sigma * x + p.mu
}

/// Compound FNPP marginal Z_α(t) = Σ_{k=1}^{N_α(t)} X_k (empty sum = 0).
pub fn sample_compound_marginal(
    alpha: StabilityIndex,
    rf: &RateFunction,
    jump: &JumpDistribution,
    t: f64,
    rng: &mut RngStream,
) -> Result<f64, ProcessError> {
    let n = sample_fnpp_marginal(alpha, rf, t, rng)?;
    let mut z = 0.0;
    for _ in 0..n {
        z += jump.sample(rng);
    }
    Ok(z)
}

/// λ / Γ(1+α), the relative-stability normalizer of the FHPP.
pub fn fhpp_stability_constant(alpha: StabilityIndex, lambda: f64) -> f64 {
    lambda / gamma(1.0 + alpha.value())
}
