//! The inverse α-stable subordinator Y_α(t) = inf{u : L_α(u) > t}: densities
//! by two independent numerical routes, tabulated grids, and samplers.
//!
//! The density of Y_α(t) is
//!
//! h_α(t, x) = t / (α x^{1+1/α}) · g_α(t / x^{1/α}),
//!
//! evaluated through the g_α series in log space (route one), or by
//! Post-Widder/Gaver inversion of the transform s^{α−1} exp(−x s^α) in the
//! t variable (route two). Sampling uses the first-passage identity
//! Y_α(t) =d (t / L_α(1))^α as the fast exact route, with discrete inversion
//! of a tabulated CDF kept as the cross-check route.

use std::io::Write;

use rand::Rng;
use thiserror::Error;

use crate::laplace::{self, InversionConfig, LaplaceTransform};
use crate::numeric::{adaptive_simpson, gamma, trapezoid};
use crate::rng::RngStream;
use crate::specfun::{self, EvalAccuracy, SpecFunError, StabilityIndex};

/// Tail probability kept beyond the upper grid cutoff.
const GRID_TAIL_PROB: f64 = 1e-6;
/// Bisection budget for locating tail quantiles.
const TAIL_MAX_ITER: usize = 200;

#[derive(Debug, Error)]
pub enum SubordinatorError {
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Laplace(#[from] laplace::LaplaceError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("tail location failed to bracket the {0:e} quantile within {TAIL_MAX_ITER} iterations")]
    TailLocationFailure(f64),
    #[error("density grid mass {mass} violates |mass - 1| <= 0.01")]
    MassInvariant { mass: f64 },
    #[error("grid construction: {0}")]
    Grid(String),
}

/// The law of Y_α(t) for a fixed process time t > 0.
#[derive(Debug, Clone, Copy)]
pub struct InverseSubordinatorLaw {
    alpha: StabilityIndex,
    t: f64,
}

/// How [`InverseSubordinatorLaw::sample`] draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseSamplingMethod {
    /// Y_α(t) =d (t / L_α(1))^α; exact and O(1).
    StableIdentity,
    /// Inverts the cumulative trapezoid CDF of a 512-point density grid by
    /// binary search, interpolating linearly within cells.
    DiscreteInversion,
}

impl InverseSubordinatorLaw {
    pub fn new(alpha: StabilityIndex, t: f64) -> Result<Self, SubordinatorError> {
        if t > 0.0 && t.is_finite() {
            Ok(Self { alpha, t })
        } else {
            Err(SubordinatorError::Domain(format!(
                "process time must be positive and finite, got {t}"
            )))
        }
    }

    pub fn alpha(&self) -> StabilityIndex {
        self.alpha
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// h_α(t, x) through the series route.
    pub fn density(&self, x: f64) -> Result<f64, SubordinatorError> {
        density_impl(self.alpha.value(), 1.0, self.t, x)
    }

    /// The finite limit h_α(t, 0+) = t^{−α} / Γ(1−α).
    pub fn density_at_zero(&self) -> f64 {
        let a = self.alpha.value();
        self.t.powf(-a) / gamma(1.0 - a)
    }

    /// h_α(t, x) by inverting s ↦ s^{α−1} exp(−x s^α) in the t variable.
    ///
    /// Accuracy of this real-node inversion depends only on u = x t^{−α}
    /// (both h and the Gaver scheme are exactly self-similar) and degrades
    /// as α → 1, where the density steepens beyond what the Post-Widder
    /// kernel resolves: expect ~1e−7 relative at α = 0.3, ~1e−3 in the bulk
    /// at α = 0.6, but only a few percent near the mode at α = 0.9.
    pub fn density_via_laplace(
        &self,
        x: f64,
        cfg: &InversionConfig,
    ) -> Result<f64, SubordinatorError> {
        if !(x > 0.0) {
            return Err(SubordinatorError::Domain(format!(
                "density needs x > 0, got {x}"
            )));
        }
        let a = self.alpha.value();
        let f_bar =
            LaplaceTransform::new(move |s: f64| s.powf(a - 1.0) * (-x * s.powf(a)).exp(), 0.0);
        Ok(laplace::invert(&f_bar, self.t, cfg)?)
    }

    /// E[Y_α(t)] = t^α / Γ(1+α).
    pub fn mean(&self) -> f64 {
        let a = self.alpha.value();
        self.t.powf(a) / gamma(1.0 + a)
    }

    /// Tabulates h_α(t, ·) from 0 out to the (1 − 1e−6) quantile: geometric
    /// spacing near zero, linear through the bulk.
    pub fn build_grid(&self, n_points: usize) -> Result<DensityGrid, SubordinatorError> {
        if n_points < 64 {
            return Err(SubordinatorError::Grid(format!(
                "n_points must be at least 64, got {n_points}"
            )));
        }
        let a = self.alpha.value();
        let c_star = stable_left_tail_quantile(self.alpha, GRID_TAIL_PROB)?;
        let x_hi = (self.t / c_star).powf(a);
        if !x_hi.is_finite() || x_hi <= 0.0 {
            return Err(SubordinatorError::TailLocationFailure(GRID_TAIL_PROB));
        }
        let n_geo = n_points / 2 - 1;
        let n_lin = n_points - n_geo - 1;
        let mut xs = Vec::with_capacity(n_points);
        xs.push(0.0);
        let geo_lo = x_hi * 1e-5;
        let geo_hi = x_hi * 0.1;
        let ratio = (geo_hi / geo_lo).powf(1.0 / (n_geo as f64 - 1.0));
        let mut g = geo_lo;
        for _ in 0..n_geo {
            xs.push(g);
            g *= ratio;
        }
        let lin_step = (x_hi - geo_hi) / n_lin as f64;
        for i in 1..=n_lin {
            xs.push(geo_hi + lin_step * i as f64);
        }
        let mut points = Vec::with_capacity(n_points);
        points.push((0.0, self.density_at_zero()));
        for &x in &xs[1..] {
            points.push((x, self.density(x)?));
        }
        DensityGrid::new(points, 1.0 - GRID_TAIL_PROB)
    }

    /// Both sides of the transform identity
    /// ∫₀^∞ e^{−xy} h_α(t, x) dx = E_α(−y t^α):
    /// the left by trapezoid quadrature over a 2048-point grid, the right by
    /// the Mittag-Leffler evaluator. The pair agrees within 1e−4.
    pub fn ml_identity_check(&self, y: f64) -> Result<(f64, f64), SubordinatorError> {
        if !(y >= 0.0) {
            return Err(SubordinatorError::Domain(format!(
                "ml_identity_check needs y >= 0, got {y}"
            )));
        }
        let grid = self.build_grid(2048)?;
        let weighted: Vec<(f64, f64)> = grid
            .points()
            .iter()
            .map(|&(x, h)| (x, (-x * y).exp() * h))
            .collect();
        let quad = trapezoid(&weighted);
        let a = self.alpha.value();
        let ml = specfun::mittag_leffler(a, -y * self.t.powf(a), &EvalAccuracy::default())?;
        Ok((quad, ml))
    }

    /// One draw of Y_α(t).
    pub fn sample(
        &self,
        rng: &mut RngStream,
        method: InverseSamplingMethod,
    ) -> Result<f64, SubordinatorError> {
        match method {
            InverseSamplingMethod::StableIdentity => {
                let l = sample_stable_subordinator(self.alpha, rng);
                Ok((self.t / l).powf(self.alpha.value()))
            }
            InverseSamplingMethod::DiscreteInversion => {
                Ok(self.build_grid(512)?.sampler().draw(rng))
            }
        }
    }
}

/// Tabulated density with normalization metadata.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    points: Vec<(f64, f64)>,
    mass: f64,
    quantile_hi: f64,
}

impl DensityGrid {
    /// Validates the invariants: x strictly increasing, h >= 0, trapezoid
    /// mass within 1% of unity, upper cutoff at least the 1 − 1e−6 quantile.
    pub fn new(points: Vec<(f64, f64)>, quantile_hi: f64) -> Result<Self, SubordinatorError> {
        if points.len() < 2 {
            return Err(SubordinatorError::Grid("need at least two points".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(SubordinatorError::Grid(format!(
                    "x must be strictly increasing, got {} after {}",
                    w[1].0, w[0].0
                )));
            }
        }
        if points.iter().any(|&(_, h)| !(h >= 0.0) || !h.is_finite()) {
            return Err(SubordinatorError::Grid("density values must be finite and nonnegative".into()));
        }
        if quantile_hi < 1.0 - 1e-6 {
            return Err(SubordinatorError::Grid(format!(
                "quantile_hi must be at least 1 - 1e-6, got {quantile_hi}"
            )));
        }
        let mass = trapezoid(&points);
        if (mass - 1.0).abs() > 0.01 {
            return Err(SubordinatorError::MassInvariant { mass });
        }
        Ok(Self {
            points,
            mass,
            quantile_hi,
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn quantile_hi(&self) -> f64 {
        self.quantile_hi
    }

    pub fn x_hi(&self) -> f64 {
        self.points.last().unwrap().0
    }

    /// Trapezoid mean ∫ x h(x) dx.
    pub fn mean(&self) -> f64 {
        let weighted: Vec<(f64, f64)> = self.points.iter().map(|&(x, h)| (x, x * h)).collect();
        trapezoid(&weighted)
    }

    /// CDF at x by linear interpolation of the cumulative trapezoid,
    /// normalized by the grid mass. For repeated evaluation use [`Self::cdf`].
    pub fn cdf_at(&self, x: f64) -> f64 {
        self.cdf().eval(x)
    }

    /// Reusable normalized CDF evaluator.
    pub fn cdf(&self) -> GridCdf {
        GridCdf {
            xs: self.points.iter().map(|p| p.0).collect(),
            cdf: self.cumulative().iter().map(|c| c / self.mass).collect(),
        }
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut cum = Vec::with_capacity(self.points.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in self.points.windows(2) {
            acc += 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1);
            cum.push(acc);
        }
        cum
    }

    /// Inversion sampler over the tabulated CDF.
    pub fn sampler(&self) -> GridSampler {
        let cum = self.cumulative();
        GridSampler {
            xs: self.points.iter().map(|p| p.0).collect(),
            cdf: cum.iter().map(|c| c / self.mass).collect(),
        }
    }

    /// CSV with header `x,h`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,h")?;
        for &(x, h) in &self.points {
            writeln!(w, "{x:.16e},{h:.16e}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// Tabulated normalized CDF with linear interpolation between nodes.
#[derive(Debug, Clone)]
pub struct GridCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl GridCdf {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= *self.xs.last().unwrap() {
            return 1.0;
        }
        let idx = self.xs.partition_point(|&px| px <= x);
        let (x0, x1) = (self.xs[idx - 1], self.xs[idx]);
        let (f0, f1) = (self.cdf[idx - 1], self.cdf[idx]);
        (f0 + (f1 - f0) * (x - x0) / (x1 - x0)).clamp(0.0, 1.0)
    }
}

/// Continuous inversion sampler built from a [`DensityGrid`].
#[derive(Debug, Clone)]
pub struct GridSampler {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl GridSampler {
    pub fn draw(&self, rng: &mut RngStream) -> f64 {
        let u: f64 = rng.random();
        if u >= *self.cdf.last().unwrap() {
            return *self.xs.last().unwrap();
        }
        let idx = self.cdf.partition_point(|&c| c <= u).max(1);
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let (x0, x1) = (self.xs[idx - 1], self.xs[idx]);
        if c1 > c0 {
            x0 + (x1 - x0) * (u - c0) / (c1 - c0)
        } else {
            x0
        }
    }
}

/// One draw of L_α(1) by Kanter's rejection-free transformation, normalized
/// so that E[exp(−u L_α(1))] = exp(−u^α).
pub fn sample_stable_subordinator(alpha: StabilityIndex, rng: &mut RngStream) -> f64 {
    let a = alpha.value();
    let u = std::f64::consts::PI * open_unit(rng);
    let w = -open_unit(rng).ln();
    let s1 = (a * u).sin() / u.sin().powf(1.0 / a);
    let s2 = (((1.0 - a) * u).sin() / w).powf((1.0 - a) / a);
    s1 * s2
}

/// Uniform draw from the open interval (0, 1); endpoint hits are redrawn.
fn open_unit(rng: &mut RngStream) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// h_α^β(t, x) = t / (αβ x^{1+1/(αβ)}) · g_α(t / x^{1/(αβ)}), the density of
/// ([Y_α(t)]^β); for β = 1 this is h_α itself, and it is not the density of
/// Y_{αβ}(t).
pub fn limit_density_h_beta(
    alpha: StabilityIndex,
    beta: f64,
    t: f64,
    x: f64,
) -> Result<f64, SubordinatorError> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(SubordinatorError::Domain(format!(
            "limit density needs beta > 0, got {beta}"
        )));
    }
    if !(t > 0.0) {
        return Err(SubordinatorError::Domain(format!(
            "limit density needs t > 0, got {t}"
        )));
    }
    density_impl(alpha.value(), beta, t, x)
}

/// Grid for ([Y_α(t)]^β) over the β-transformed nodes of the Y_α(t) grid.
pub fn build_limit_density_grid(
    alpha: StabilityIndex,
    beta: f64,
    t: f64,
    n_points: usize,
) -> Result<DensityGrid, SubordinatorError> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(SubordinatorError::Domain(format!(
            "limit grid needs beta > 0, got {beta}"
        )));
    }
    let base = InverseSubordinatorLaw::new(alpha, t)?.build_grid(n_points)?;
    if beta == 1.0 {
        return Ok(base);
    }
    let mut points = Vec::with_capacity(n_points);
    for &(x, _) in base.points() {
        let y = x.powf(beta);
        let h = if y == 0.0 {
            // The transformed density at 0 diverges for β > 1 and vanishes
            // for β < 1; the grid pins it to 0 and lets the first finite
            // node carry the edge.
            0.0
        } else {
            limit_density_h_beta(alpha, beta, t, y)?
        };
        points.push((y, h));
    }
    DensityGrid::new(points, base.quantile_hi())
}

/// Shared series/Laplace implementation of
/// t / (αβ x^{1+1/(αβ)}) · g_α(t / x^{1/(αβ)}) in log space.
fn density_impl(a: f64, beta: f64, t: f64, x: f64) -> Result<f64, SubordinatorError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SubordinatorError::Domain(format!(
            "density needs x > 0, got {x}"
        )));
    }
    let ab = a * beta;
    let ln_t = t.ln();
    let ln_x = x.ln();
    let ln_pref = ln_t - ab.ln() - (1.0 + 1.0 / ab) * ln_x;
    let ln_z = ln_t - ln_x / ab;
    let acc = EvalAccuracy::default();
    Ok(specfun::branch_series_or_flank(a, ln_z, ln_pref, &acc))
}

/// The point below which g_α carries less than e^{−45} of stretched
/// exponential mass: (1−α)(α/z)^{α/(1−α)} = 45.
pub(crate) fn stable_left_cutoff(alpha: StabilityIndex) -> f64 {
    let a = alpha.value();
    a * ((1.0 - a) / 45.0).powf((1.0 - a) / a)
}

/// CDF of L_α(1) at c > 0 by quadrature of g_α.
///
/// Integrates in log space so the density bump, which sits at wildly
/// different scales across α, stays resolvable by bisection.
pub fn stable_subordinator_cdf(alpha: StabilityIndex, c: f64) -> Result<f64, SubordinatorError> {
    if !(c > 0.0) {
        return Err(SubordinatorError::Domain(format!(
            "stable CDF needs c > 0, got {c}"
        )));
    }
    let z_lo = stable_left_cutoff(alpha);
    if c <= z_lo {
        return Ok(0.0);
    }
    let acc = EvalAccuracy::default();
    let f = |u: f64| {
        let z = u.exp();
        // Deep-tail evaluation failures integrate as zero mass.
        z * specfun::stable_density_g(alpha, z, &acc).unwrap_or(0.0)
    };
    let (v, _) = adaptive_simpson(&f, z_lo.ln(), c.ln(), 1e-3 * GRID_TAIL_PROB, 26);
    Ok(v.clamp(0.0, 1.0))
}

/// The quantile c with P(L_α(1) <= c) = p, bisected to 0.5% relative width;
/// the returned bracket end keeps P(L <= c) <= p.
pub fn stable_left_tail_quantile(
    alpha: StabilityIndex,
    p: f64,
) -> Result<f64, SubordinatorError> {
    let mut iterations = 0usize;
    let mut hi = 1.0f64;
    while stable_subordinator_cdf(alpha, hi)? < p {
        hi *= 2.0;
        iterations += 1;
        if iterations > TAIL_MAX_ITER {
            return Err(SubordinatorError::TailLocationFailure(p));
        }
    }
    let mut lo = 0.0f64;
    while hi - lo > 0.005 * hi {
        iterations += 1;
        if iterations > TAIL_MAX_ITER {
            return Err(SubordinatorError::TailLocationFailure(p));
        }
        let mid = if lo == 0.0 { 0.5 * hi } else { 0.5 * (lo + hi) };
        if stable_subordinator_cdf(alpha, mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if lo > 0.0 { lo } else { hi })
}
