//! Normal-distribution helpers with tail-safe evaluation.

use statrs::function::erf::erfc;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const MILLS_SWITCH: f64 = -6.0;

/// Standard normal density.
pub fn norm_pdf(t: f64) -> f64 {
    (-0.5 * t * t - LN_SQRT_2PI).exp()
}

/// Standard normal distribution function.
pub fn norm_cdf(t: f64) -> f64 {
    0.5 * erfc(-t / SQRT_2)
}

/// `exp(x²) erfc(x)` for `x ≥ 4`, by the Laplace continued fraction.
fn erfcx_large(x: f64) -> f64 {
    let mut acc = x;
    for k in (1..=80).rev() {
        acc = x + (k as f64 / 2.0) / acc;
    }
    1.0 / (acc * std::f64::consts::PI.sqrt())
}

/// Inverse Mills ratio `r(t) = f(t) / Φ(t)`.
pub fn inv_mills(t: f64) -> f64 {
    if t < MILLS_SWITCH {
        (2.0 / std::f64::consts::PI).sqrt() / erfcx_large(-t / SQRT_2)
    } else {
        norm_pdf(t) / norm_cdf(t)
    }
}

/// `log Φ(t)`.
pub fn log_norm_cdf(t: f64) -> f64 {
    if t < MILLS_SWITCH {
        -0.5 * t * t - LN_SQRT_2PI - inv_mills(t).ln()
    } else if t > 0.0 {
        (-0.5 * erfc(t / SQRT_2)).ln_1p()
    } else {
        norm_cdf(t).ln()
    }
}

/// `-r'(t) = r(t)² + t r(t)`, which lies in `(0, 1)`; clamped against rounding.
pub fn mills_curvature(t: f64) -> f64 {
    let r = inv_mills(t);
    (r * (r + t)).clamp(0.0, 1.0)
}
