//! Importance-sampling estimate of an integrated likelihood with a
//! multivariate-t proposal. Used as a cross-oracle for quadrature.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;

use super::general::{Likelihood, LogPrior};
use crate::error::{Error, Result};
use crate::linalg::log_sum_exp;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub log_value: f64,
    /// Standard error of the estimate on the natural scale, relative to the estimate.
    pub rel_std_error: f64,
    pub draws: usize,
}

/// `log ∫ p(y|η) p(η) dη` from `draws` samples of a t proposal with `dof`
/// degrees of freedom, location `center` and scale matrix `scale`.
pub fn importance_log_marginal(
    lik: &dyn Likelihood,
    prior: &dyn LogPrior,
    center: &DVector<f64>,
    scale: &DMatrix<f64>,
    dof: f64,
    draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    let d = center.len();
    let chol = scale
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Domain("proposal scale is not positive definite".into()))?;
    let l = chol.l();
    let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let df = d as f64;
    let log_norm = ln_gamma(0.5 * (dof + df)) - ln_gamma(0.5 * dof) - 0.5 * df * (dof * std::f64::consts::PI).ln() - 0.5 * log_det;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi = ChiSquared::new(dof).map_err(|e| Error::Domain(e.to_string()))?;
    let mut log_w = Vec::with_capacity(draws);
    let mut z = DVector::zeros(d);
    for _ in 0..draws {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let w: f64 = chi.sample(&mut rng);
        let x = center + &l * &z * (dof / w).sqrt();
        // z'z * dof / w is the Mahalanobis distance of x
        let maha = z.norm_squared() * dof / w;
        let log_q = log_norm - 0.5 * (dof + df) * (1.0 + maha / dof).ln();
        let log_target = if lik.in_domain(&x) { lik.loglik(&x)? + prior.log_density(&x) } else { f64::NEG_INFINITY };
        log_w.push(log_target - log_q);
    }
    let n = draws as f64;
    let lse = log_sum_exp(&log_w);
    let log_mean = lse - n.ln();
    let mean_sq: f64 = log_w.iter().map(|v| (2.0 * (v - log_mean)).exp()).sum::<f64>() / n;
    let rel_var = (mean_sq - 1.0).max(0.0) / n;
    Ok(McEstimate { log_value: log_mean, rel_std_error: rel_var.sqrt(), draws })
}
