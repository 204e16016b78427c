//! Shared numerical building blocks: compensated summation, adaptive
//! quadrature and thin wrappers around the libm special functions.

/// Neumaier-compensated accumulator for sums whose intermediate terms can be
/// many orders of magnitude larger than the result.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Γ(x) for real x (poles handled by libm's tgamma).
#[inline]
pub(crate) fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// ln Γ(x) for x > 0.
#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// Standard normal CDF Φ(x).
#[inline]
pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
///
/// Subdivides until the local Richardson error estimate meets the tolerance
/// budget; `max_depth` bounds the recursion so endpoint singularities in
/// higher derivatives terminate. Returns the estimate together with a flag
/// that is false when some panel hit the depth limit before converging.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
) -> (f64, bool) {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut converged = true;
    let v = simpson_step(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        abs_tol,
        max_depth,
        &mut converged,
    );
    (v, converged)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    converged: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol || (b - a).abs() < f64::EPSILON * (a.abs() + b.abs()) {
        return left + right + err / 15.0;
    }
    if depth == 0 {
        *converged = false;
        return left + right + err / 15.0;
    }
    // Halving the budget below the rounding floor of the panel value would
    // demand sub-epsilon agreement that can never be met.
    let child_tol = (0.5 * tol).max(f64::EPSILON * whole.abs());
    simpson_step(f, a, m, fa, flm, fm, left, child_tol, depth - 1, converged)
        + simpson_step(f, m, b, fm, frm, fb, right, child_tol, depth - 1, converged)
}

/// Trapezoid rule over tabulated `(x, y)` pairs.
pub(crate) fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}
