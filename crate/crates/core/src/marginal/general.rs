//! Generic quadratic-expansion integrals: the ALA at an arbitrary expansion
//! point and the classical Laplace approximation at the posterior mode.

use nalgebra::{DMatrix, DVector};

use super::score::{Diagnostics, ExpansionVariant, MarginalScore, Method};
use crate::error::{Error, Result};
use crate::linalg::SpdFactor;

pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Log-likelihood value with gradient and hessian of the *negative* log-likelihood.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub point: DVector<f64>,
    pub loglik: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

/// Twice-differentiable log-likelihood over a parameter vector `η`.
pub trait Likelihood: Sync {
    fn dim(&self) -> usize;
    fn in_domain(&self, eta: &DVector<f64>) -> bool;
    fn loglik(&self, eta: &DVector<f64>) -> Result<f64>;
    fn expand(&self, eta: &DVector<f64>) -> Result<Expansion>;
}

/// Log prior density over `η`.
pub trait LogPrior: Sync {
    fn log_density(&self, eta: &DVector<f64>) -> f64;

    /// Gradient and hessian of the negative log density, when available.
    fn neg_grad_hess(&self, eta: &DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)>;

    /// Rejects points where the prior is undefined (non-positive scale parameters).
    fn check_domain(&self, _eta: &DVector<f64>) -> Result<()> {
        Ok(())
    }
}

/// Result of a quadratic-expansion integral, with the Gaussian approximation it implies.
#[derive(Clone, Debug)]
pub struct GaussianFit {
    pub log_ml: f64,
    /// `η̃` (ALA) or `η̂` (LA).
    pub mode: DVector<f64>,
    /// Inverse of the hessian used in the integral.
    pub cov: DMatrix<f64>,
    pub iterations: usize,
}

/// ALA at the expansion point carried by `e`.
///
/// `Likelihood` expands the log-likelihood only and evaluates the prior at
/// `η̃ = η₀ − H₀⁻¹g₀`; `LogJoint` expands log-likelihood plus log prior at `η₀`.
pub fn ala_general(e: &Expansion, prior: &dyn LogPrior, variant: ExpansionVariant) -> Result<GaussianFit> {
    let d = e.point.len();
    let (g, h, prior_at) = match variant {
        ExpansionVariant::Likelihood => (e.grad.clone(), e.hess.clone(), None),
        ExpansionVariant::LogJoint => {
            let (pg, ph) = prior
                .neg_grad_hess(&e.point)
                .ok_or_else(|| Error::Unsupported("log-joint expansion needs a differentiable prior".into()))?;
            (&e.grad + pg, &e.hess + ph, Some(prior.log_density(&e.point)))
        }
    };
    let f = SpdFactor::new(&h).ok_or(Error::NotConcaveAtExpansion)?;
    let step = f.solve(&g);
    let mode = &e.point - &step;
    let log_prior = match prior_at {
        Some(v) => v,
        None => {
            prior.check_domain(&mode)?;
            prior.log_density(&mode)
        }
    };
    let quad = if d == 0 { 0.0 } else { g.dot(&step) };
    let log_ml = e.loglik + log_prior + 0.5 * d as f64 * LN_2PI - 0.5 * f.log_det() + 0.5 * quad;
    Ok(GaussianFit { log_ml, mode, cov: f.inverse(), iterations: 0 })
}

/// Newton–Raphson settings for [`la_fit`].
#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { grad_tol: 1e-8, max_iter: 100, max_halvings: 60 }
    }
}

/// Posterior mode of `loglik + log prior` by damped Newton, followed by the Laplace integral.
pub fn la_fit(lik: &dyn Likelihood, prior: &dyn LogPrior, init: &DVector<f64>, opts: NewtonOptions) -> Result<GaussianFit> {
    if !lik.in_domain(init) {
        return Err(Error::Domain("initial point outside the parameter domain".into()));
    }
    let objective = |eta: &DVector<f64>| -> Result<f64> { Ok(lik.loglik(eta)? + prior.log_density(eta)) };
    let mut eta = init.clone();
    let mut trace = Vec::new();
    let mut current = objective(&eta)?;
    for it in 0..=opts.max_iter {
        let e = lik.expand(&eta)?;
        let (pg, ph) = prior
            .neg_grad_hess(&eta)
            .ok_or_else(|| Error::Unsupported("Laplace approximation needs a differentiable prior".into()))?;
        let g = &e.grad + pg;
        let h = &e.hess + ph;
        let gnorm = g.norm();
        trace.push(gnorm);
        let f = SpdFactor::new(&h).ok_or(Error::NotConcave)?;
        let step = f.solve(&g);
        let decrement = g.dot(&step);
        if gnorm <= opts.grad_tol || decrement.abs() <= 1e-24 * (1.0 + current.abs()) || eta.is_empty() {
            let log_ml = e.loglik + prior.log_density(&eta) + 0.5 * eta.len() as f64 * LN_2PI - 0.5 * f.log_det();
            return Ok(GaussianFit { log_ml, mode: eta, cov: f.inverse(), iterations: it });
        }
        if it == opts.max_iter {
            break;
        }
        if !step.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteStep { iteration: it, partial: eta.as_slice().to_vec() });
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..opts.max_halvings {
            let cand = &eta - &step * t;
            if lik.in_domain(&cand) {
                let v = objective(&cand)?;
                if v.is_finite() && v >= current - 1e-12 * current.abs() {
                    eta = cand;
                    current = v;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // objective flat to rounding: accept the point if the decrement is negligible
            if decrement <= 1e-10 * (1.0 + current.abs()) {
                let log_ml = e.loglik + prior.log_density(&eta) + 0.5 * eta.len() as f64 * LN_2PI - 0.5 * f.log_det();
                return Ok(GaussianFit { log_ml, mode: eta, cov: f.inverse(), iterations: it });
            }
            return Err(Error::NoConvergence { iterations: it, trace });
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, trace })
}

/// Laplace approximation as a [`MarginalScore`].
pub fn la_marginal(lik: &dyn Likelihood, prior: &dyn LogPrior, init: &DVector<f64>) -> Result<MarginalScore> {
    let fit = la_fit(lik, prior, init, NewtonOptions::default())?;
    Ok(MarginalScore {
        log_ml: fit.log_ml,
        method: Method::La,
        expansion: fit.mode.clone(),
        mode: fit.mode,
        diagnostics: Diagnostics { iterations: fit.iterations, ..Diagnostics::default() },
    })
}
