//! Likelihood families: canonical-link exponential families and the
//! log-normal accelerated-failure-time model.
//!
//! For the exponential families the log-likelihood is
//! `[yᵀZβ − Σ b(z_iᵀβ)]/φ + Σ c(y_i, φ)`. Gradients and hessians are returned
//! for the *negative* log-likelihood. With unknown dispersion the parameter
//! vector is `(β, φ)` and φ is the last coordinate.

pub mod aft;
pub mod special;

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub use aft::{aft_concavity_check, aft_loglik_grad_hess, aft_tau0, AftParams, SurvivalData};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Likelihood family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Logistic,
    Poisson,
    GaussianKnownPhi(f64),
    GaussianUnknownPhi,
    AftLogNormal,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Logistic => "logistic",
            Family::Poisson => "poisson",
            Family::GaussianKnownPhi(_) => "gaussian-known-phi",
            Family::GaussianUnknownPhi => "gaussian-unknown-phi",
            Family::AftLogNormal => "aft-lognormal",
        }
    }

    /// Whether the family is a canonical-link exponential family.
    pub fn is_exponential(&self) -> bool {
        !matches!(self, Family::AftLogNormal)
    }

    /// Fixed dispersion, or `None` when φ is a parameter.
    pub fn known_phi(&self) -> Option<f64> {
        match self {
            Family::Logistic | Family::Poisson => Some(1.0),
            Family::GaussianKnownPhi(phi) => Some(*phi),
            Family::GaussianUnknownPhi | Family::AftLogNormal => None,
        }
    }

    /// Curvature adjustment is on by default for logistic and Poisson.
    pub fn default_curvature(&self) -> bool {
        matches!(self, Family::Logistic | Family::Poisson)
    }

    pub fn b(&self, u: f64) -> f64 {
        match self {
            Family::Logistic => {
                if u > 0.0 {
                    u + (-u).exp().ln_1p()
                } else {
                    u.exp().ln_1p()
                }
            }
            Family::Poisson => u.exp(),
            _ => 0.5 * u * u,
        }
    }

    pub fn b1(&self, u: f64) -> f64 {
        match self {
            Family::Logistic => {
                if u >= 0.0 {
                    1.0 / (1.0 + (-u).exp())
                } else {
                    let e = u.exp();
                    e / (1.0 + e)
                }
            }
            Family::Poisson => u.exp(),
            _ => u,
        }
    }

    pub fn b2(&self, u: f64) -> f64 {
        match self {
            Family::Logistic => {
                let e = (-u.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            Family::Poisson => u.exp(),
            _ => 1.0,
        }
    }

    /// Canonical link `h(μ)`, the inverse of `b'`.
    pub fn link(&self, mu: f64) -> f64 {
        match self {
            Family::Logistic => (mu / (1.0 - mu)).ln(),
            Family::Poisson => mu.ln(),
            _ => mu,
        }
    }

    pub fn c(&self, y: f64, phi: f64) -> f64 {
        match self {
            Family::Logistic => 0.0,
            Family::Poisson => -ln_gamma(y + 1.0),
            _ => -y * y / (2.0 * phi) - 0.5 * (LN_2PI + phi.ln()),
        }
    }

    /// `∂c/∂φ`.
    pub fn dc(&self, y: f64, phi: f64) -> f64 {
        match self {
            Family::Logistic | Family::Poisson => 0.0,
            _ => y * y / (2.0 * phi * phi) - 1.0 / (2.0 * phi),
        }
    }

    /// `∂²c/∂φ²`.
    pub fn d2c(&self, y: f64, phi: f64) -> f64 {
        match self {
            Family::Logistic | Family::Poisson => 0.0,
            _ => -y * y / (phi * phi * phi) + 1.0 / (2.0 * phi * phi),
        }
    }

    /// Rejects responses outside the family's support.
    pub fn validate_response(&self, y: &[f64]) -> Result<()> {
        for (i, v) in y.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteResponse { index: i });
            }
            let ok = match self {
                Family::Logistic => *v == 0.0 || *v == 1.0,
                Family::Poisson => *v >= 0.0 && v.fract() == 0.0,
                _ => true,
            };
            if !ok {
                return Err(Error::Domain(format!(
                    "response {v} at row {} outside the {} support",
                    i + 1,
                    self.name()
                )));
            }
        }
        Ok(())
    }
}

/// Log-likelihood value with an overflow marker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogLik {
    pub value: f64,
    pub overflow: bool,
}

/// Exponential-family log-likelihood at linear predictor `eta`.
pub fn loglik(family: &Family, eta: &DVector<f64>, y: &DVector<f64>, phi: f64) -> LogLik {
    debug_assert!(family.is_exponential());
    let mut lin = 0.0;
    let mut csum = 0.0;
    for i in 0..y.len() {
        let bi = family.b(eta[i]);
        if !bi.is_finite() {
            return LogLik { value: f64::NEG_INFINITY, overflow: true };
        }
        lin += y[i] * eta[i] - bi;
        csum += family.c(y[i], phi);
    }
    LogLik { value: lin / phi + csum, overflow: false }
}

/// Sum of `c(y_i, φ)`.
pub fn sum_c(family: &Family, y: &DVector<f64>, phi: f64) -> f64 {
    y.iter().map(|&v| family.c(v, phi)).sum()
}

/// Gradient and hessian of the negative log-likelihood at `(β, φ)`.
///
/// For known-dispersion families the result is `p_γ`-dimensional and `phi` is
/// the fixed dispersion; otherwise φ is appended as the last coordinate.
pub fn grad_hess(
    family: &Family,
    beta: &DVector<f64>,
    phi: f64,
    z: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if !(phi > 0.0) {
        return Err(Error::Domain(format!("dispersion {phi} must be positive")));
    }
    let p = z.ncols();
    let n = z.nrows();
    let eta = if p == 0 { DVector::zeros(n) } else { z * beta };
    let mut resid = DVector::zeros(n);
    let mut w = DVector::zeros(n);
    let mut a = 0.0;
    for i in 0..n {
        let (b0, b1, b2) = (family.b(eta[i]), family.b1(eta[i]), family.b2(eta[i]));
        if !(b0.is_finite() && b1.is_finite() && b2.is_finite()) {
            return Err(Error::Domain("linear predictor overflows the cumulant".into()));
        }
        resid[i] = y[i] - b1;
        w[i] = b2;
        a += y[i] * eta[i] - b0;
    }
    let score = z.tr_mul(&resid);
    let mut zw = z.clone();
    for (i, mut row) in zw.row_iter_mut().enumerate() {
        row *= w[i];
    }
    let info = z.tr_mul(&zw);
    if family.known_phi().is_some() {
        return Ok((-score / phi, info / phi));
    }
    let sdc: f64 = y.iter().map(|&v| family.dc(v, phi)).sum();
    let sd2c: f64 = y.iter().map(|&v| family.d2c(v, phi)).sum();
    let mut g = DVector::zeros(p + 1);
    let mut h = DMatrix::zeros(p + 1, p + 1);
    g.rows_mut(0, p).copy_from(&(-&score / phi));
    g[p] = a / (phi * phi) - sdc;
    h.view_mut((0, 0), (p, p)).copy_from(&(info / phi));
    let cross = &score / (phi * phi);
    h.view_mut((0, p), (p, 1)).copy_from(&cross);
    h.view_mut((p, 0), (1, p)).copy_from(&cross.transpose());
    h[(p, p)] = -2.0 * a / phi.powi(3) - sd2c;
    Ok((g, h))
}

/// Conditional MLE of φ at `β = 0` (closed form for the Gaussian family).
pub fn phi0_mle(family: &Family, y: &DVector<f64>) -> Result<f64> {
    match family {
        Family::GaussianUnknownPhi => {
            let phi = y.dot(y) / y.len() as f64;
            if phi > 0.0 {
                Ok(phi)
            } else {
                Err(Error::DegenerateResponse("all responses are zero, so φ₀ = 0".into()))
            }
        }
        _ => phi0_numeric(family, y),
    }
}

/// Safeguarded Newton with bisection on `[1e-10, 1e10]` for the φ score at `β = 0`.
pub fn phi0_numeric(family: &Family, y: &DVector<f64>) -> Result<f64> {
    let n = y.len() as f64;
    let a0 = -n * family.b(0.0);
    let score = |phi: f64| -a0 / (phi * phi) + y.iter().map(|&v| family.dc(v, phi)).sum::<f64>();
    let dscore =
        |phi: f64| 2.0 * a0 / phi.powi(3) + y.iter().map(|&v| family.d2c(v, phi)).sum::<f64>();
    let (mut lo, mut hi) = (1e-10_f64, 1e10_f64);
    if score(lo) <= 0.0 || score(hi) >= 0.0 {
        return Err(Error::DegenerateResponse("no interior maximizer for φ₀".into()));
    }
    // work on log φ for scale robustness
    let mut x = (lo * hi).sqrt();
    for _ in 0..500 {
        let s = score(x);
        if s > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = s / dscore(x);
        let mut next = x - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = (lo * hi).sqrt();
        }
        if (next - x).abs() <= 1e-14 * x {
            return Ok(next);
        }
        x = next;
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    Ok(x)
}
