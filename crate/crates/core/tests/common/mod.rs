//! Shared oracles for the statistical validation tests. Everything here is
//! deliberately independent of the crate's own special-function paths:
//! error functions and gammas come from statrs, closed forms are coded
//! directly.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Scaled complementary error function e^{x²} erfc(x); equals E_{1/2}(−x²).
pub fn erfcx(x: f64) -> f64 {
    if x < 25.0 {
        (x * x).exp() * statrs::function::erf::erfc(x)
    } else {
        let inv2 = 1.0 / (2.0 * x * x);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..10 {
            term *= -(2.0 * k as f64 - 1.0) * inv2;
            sum += term;
        }
        sum / (x * PI.sqrt())
    }
}

/// CDF of the ML(1/2, lambda) waiting time: 1 − E_{1/2}(−√(λt)).
pub fn ml_half_cdf(lambda: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        1.0 - erfcx((lambda * t).sqrt())
    }
}

/// Closed-form density of Y_{1/2}(t): e^{−x²/(4t)} / √(πt).
pub fn h_half(t: f64, x: f64) -> f64 {
    (-x * x / (4.0 * t)).exp() / (PI * t).sqrt()
}

/// CDF of L_{1/2}(1): erfc(1/(2√x)).
pub fn levy_half_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        statrs::function::erf::erfc(0.5 / x.sqrt())
    }
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Two-sample chi-square homogeneity test over integer counts, adjacent
/// bins pooled until each holds an expected 5 per sample; returns the
/// p-value from the chi-square tail.
pub fn chi_square_two_sample_p(a: &[u64], b: &[u64]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let max = *a.iter().chain(b.iter()).max().unwrap() as usize;
    let mut ca = vec![0f64; max + 1];
    let mut cb = vec![0f64; max + 1];
    for &v in a {
        ca[v as usize] += 1.0;
    }
    for &v in b {
        cb[v as usize] += 1.0;
    }
    // Pool adjacent values until both samples expect at least 5.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut acc_a, mut acc_b) = (0.0, 0.0);
    for i in 0..=max {
        acc_a += ca[i];
        acc_b += cb[i];
        if acc_a >= 5.0 && acc_b >= 5.0 {
            bins.push((acc_a, acc_b));
            acc_a = 0.0;
            acc_b = 0.0;
        }
    }
    if acc_a > 0.0 || acc_b > 0.0 {
        if let Some(last) = bins.last_mut() {
            last.0 += acc_a;
            last.1 += acc_b;
        } else {
            bins.push((acc_a, acc_b));
        }
    }
    assert!(bins.len() >= 2, "chi-square needs at least two pooled bins");
    let stat: f64 = bins
        .iter()
        .map(|&(x, y)| {
            let d = x - y;
            d * d / (x + y)
        })
        .sum();
    let dof = bins.len() as f64 - 1.0;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}
