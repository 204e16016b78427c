//! Cumulative rate functions Λ of the non-homogeneous Poisson process:
//! evaluation, inversion and the regular-variation index used by the
//! scaling-limit experiments.
//!
//! Three families are supported. Linear Λ(t) = λt (index 1), Weibull
//! Λ(t) = (t/b)^c (index c) and Makeham Λ(t) = (c/b)e^{bt} − c/b + μt,
//! which is not regularly varying: Λ(xt)/Λ(t) splits to 0/1/∞ for
//! x below/at/above 1.

use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RateError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow evaluating rate function: {0}")]
    Overflow(String),
    #[error("inverse did not converge after {0} iterations")]
    NonConvergence(usize),
}

/// Parse failure for the textual rate grammar, with byte position.
#[derive(Debug, Error)]
#[error("invalid rate spec at byte {pos}: {msg}")]
pub struct RateParseError {
    pub pos: usize,
    pub msg: String,
}

/// exp argument beyond which the Makeham cumulative overflows f64.
const MAKEHAM_EXP_LIMIT: f64 = 700.0;

/// A validated cumulative rate function Λ with Λ(0) = 0, Λ strictly
/// increasing and Λ(t) → ∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateFunction {
    Linear { lambda: f64 },
    Weibull { b: f64, c: f64 },
    Makeham { c: f64, b: f64, mu: f64 },
}

impl RateFunction {
    pub fn linear(lambda: f64) -> Result<Self, RateError> {
        if lambda > 0.0 && lambda.is_finite() {
            Ok(Self::Linear { lambda })
        } else {
            Err(RateError::Domain(format!("linear rate needs lambda > 0, got {lambda}")))
        }
    }

    /// Weibull rate (t/b)^c. The paper admits c >= 0 but c = 0 would make
    /// Λ ≡ 1, breaking Λ(0) = 0 and Λ → ∞, so it is rejected here.
    pub fn weibull(b: f64, c: f64) -> Result<Self, RateError> {
        if b > 0.0 && c > 0.0 && b.is_finite() && c.is_finite() {
            Ok(Self::Weibull { b, c })
        } else {
            Err(RateError::Domain(format!(
                "weibull rate needs b > 0 and c > 0, got b={b}, c={c}"
            )))
        }
    }

    pub fn makeham(c: f64, b: f64, mu: f64) -> Result<Self, RateError> {
        if c > 0.0 && b > 0.0 && mu >= 0.0 && [c, b, mu].iter().all(|v| v.is_finite()) {
            Ok(Self::Makeham { c, b, mu })
        } else {
            Err(RateError::Domain(format!(
                "makeham rate needs c > 0, b > 0, mu >= 0, got c={c}, b={b}, mu={mu}"
            )))
        }
    }

    /// Declared regular-variation index: 1 for linear, c for Weibull,
    /// absent for Makeham.
    pub fn declared_rv_index(&self) -> Option<f64> {
        match *self {
            Self::Linear { .. } => Some(1.0),
            Self::Weibull { c, .. } => Some(c),
            Self::Makeham { .. } => None,
        }
    }

    /// Λ(t).
    pub fn cumulative(&self, t: f64) -> Result<f64, RateError> {
        if !(t >= 0.0) {
            return Err(RateError::Domain(format!("cumulative needs t >= 0, got {t}")));
        }
        match *self {
            Self::Linear { lambda } => Ok(lambda * t),
            Self::Weibull { b, c } => Ok((t / b).powf(c)),
            Self::Makeham { c, b, mu } => {
                if b * t > MAKEHAM_EXP_LIMIT {
                    return Err(RateError::Overflow(format!("makeham with b*t = {}", b * t)));
                }
                Ok(c / b * ((b * t).exp() - 1.0) + mu * t)
            }
        }
    }

    /// Intensity λ(t) = Λ'(t). Weibull with c < 1 diverges at t = 0.
    pub fn intensity(&self, t: f64) -> Result<f64, RateError> {
        if !(t >= 0.0) {
            return Err(RateError::Domain(format!("intensity needs t >= 0, got {t}")));
        }
        match *self {
            Self::Linear { lambda } => Ok(lambda),
            Self::Weibull { b, c } => {
                if t == 0.0 && c < 1.0 {
                    return Err(RateError::Domain(
                        "weibull intensity with c < 1 diverges at t = 0".into(),
                    ));
                }
                Ok(c / b * (t / b).powf(c - 1.0))
            }
            Self::Makeham { c, b, mu } => {
                if b * t > MAKEHAM_EXP_LIMIT {
                    return Err(RateError::Overflow(format!("makeham with b*t = {}", b * t)));
                }
                Ok(c * (b * t).exp() + mu)
            }
        }
    }

    /// Λ⁻¹(u): the t with |Λ(t) − u| ≤ 1e−10·max(1, u). Closed form for
    /// linear and Weibull; safeguarded Newton within a bracketing interval
    /// for Makeham.
    pub fn inverse(&self, u: f64) -> Result<f64, RateError> {
        if !(u >= 0.0) {
            return Err(RateError::Domain(format!("inverse needs u >= 0, got {u}")));
        }
        match *self {
            Self::Linear { lambda } => Ok(u / lambda),
            Self::Weibull { b, c } => Ok(b * u.powf(1.0 / c)),
            Self::Makeham { c, b, mu } => {
                if u == 0.0 {
                    return Ok(0.0);
                }
                let tol = 1e-10 * u.max(1.0);
                // Λ(T) >= (c/b)(e^{bT} − 1) alone already reaches u at the
                // first bracket term; the second covers the linear part.
                let mut hi = (1.0 + b * u / c).ln() / b + u / mu.max(c);
                let mut lo = 0.0f64;
                let mut t = hi.min(u / (c + mu));
                for _ in 0..200 {
                    let f = self.cumulative(t)? - u;
                    if f.abs() <= tol {
                        return Ok(t);
                    }
                    if f > 0.0 {
                        hi = t;
                    } else {
                        lo = t;
                    }
                    let df = self.intensity(t)?;
                    let newton = t - f / df;
                    t = if newton > lo && newton < hi {
                        newton
                    } else {
                        0.5 * (lo + hi)
                    };
                }
                Err(RateError::NonConvergence(200))
            }
        }
    }

    /// The regular-variation quotient log(Λ(xt)/Λ(t)) / log(x) along `t_grid`.
    pub fn estimate_rv_index(&self, x: f64, t_grid: &[f64]) -> Result<Vec<f64>, RateError> {
        if !(x > 0.0) || x == 1.0 {
            return Err(RateError::Domain(format!(
                "rv index estimation needs x > 0 and x != 1, got {x}"
            )));
        }
        t_grid
            .iter()
            .map(|&t| {
                if !(t > 0.0) {
                    return Err(RateError::Domain(format!("t_grid values must be positive, got {t}")));
                }
                let num = self.cumulative(x * t)?;
                let den = self.cumulative(t)?;
                Ok((num / den).ln() / x.ln())
            })
            .collect()
    }
}

impl std::fmt::Display for RateFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Self::Linear { lambda } => write!(f, "linear:lambda={lambda}"),
            Self::Weibull { b, c } => write!(f, "weibull:b={b},c={c}"),
            Self::Makeham { c, b, mu } => write!(f, "makeham:c={c},b={b},mu={mu}"),
        }
    }
}

/// Grammar: `linear:lambda=<v>`, `weibull:b=<v>,c=<v>`, `makeham:c=<v>,b=<v>,mu=<v>`.
impl FromStr for RateFunction {
    type Err = RateParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').ok_or(RateParseError {
            pos: s.len(),
            msg: "expected ':' after the rate kind".into(),
        })?;
        let body_off = kind.len() + 1;
        let mut fields = std::collections::BTreeMap::new();
        let mut off = body_off;
        for part in rest.split(',') {
            let (key, value) = part.split_once('=').ok_or(RateParseError {
                pos: off,
                msg: format!("expected key=value, got `{part}`"),
            })?;
            let v: f64 = value.parse().map_err(|_| RateParseError {
                pos: off + key.len() + 1,
                msg: format!("`{value}` is not a number"),
            })?;
            fields.insert(key.to_string(), v);
            off += part.len() + 1;
        }
        let get = |k: &str| {
            fields.get(k).copied().ok_or(RateParseError {
                pos: body_off,
                msg: format!("missing field `{k}`"),
            })
        };
        let constructed = match kind {
            "linear" => RateFunction::linear(get("lambda")?),
            "weibull" => RateFunction::weibull(get("b")?, get("c")?),
            "makeham" => RateFunction::makeham(get("c")?, get("b")?, get("mu")?),
            other => {
                return Err(RateParseError {
                    pos: 0,
                    msg: format!("unknown rate kind `{other}`"),
                })
            }
        };
        constructed.map_err(|e| RateParseError {
            pos: body_off,
            msg: e.to_string(),
        })
    }
}
