//! Log-normal accelerated failure time model with right censoring, in the
//! `α = β/σ`, `τ = 1/σ` parameterization where the log-likelihood is concave.

use nalgebra::{DMatrix, DVector};

use super::special::{inv_mills, log_norm_cdf, mills_curvature};
use crate::error::{Error, Result};
use crate::linalg::rank;

/// Observed log-times `y_i = min(log o_i, log c_i)` and event indicators `d_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalData {
    pub times: DVector<f64>,
    pub status: Vec<bool>,
}

impl SurvivalData {
    pub fn new(times: DVector<f64>, status: Vec<bool>) -> Result<Self> {
        if times.len() != status.len() {
            return Err(Error::Dimension("times and status lengths differ".into()));
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFiniteResponse { index: i });
        }
        Ok(Self { times, status })
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    /// Number of uncensored observations.
    pub fn n_observed(&self) -> usize {
        self.status.iter().filter(|d| **d).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AftParams {
    pub alpha: DVector<f64>,
    pub tau: f64,
}

/// Log-likelihood with its gradient and hessian (of the log-likelihood itself),
/// ordered `(α, τ)`.
pub fn aft_loglik_grad_hess(
    params: &AftParams,
    z: &DMatrix<f64>,
    data: &SurvivalData,
) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
    let tau = params.tau;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("τ = {tau} must be positive")));
    }
    let p = z.ncols();
    let n_o = data.n_observed() as f64;
    let lin = if p == 0 { DVector::zeros(data.n()) } else { z * &params.alpha };
    let mut ll = -0.5 * n_o * (2.0 * std::f64::consts::PI / (tau * tau)).ln();
    let mut g = DVector::zeros(p + 1);
    let mut h = DMatrix::zeros(p + 1, p + 1);
    h[(p, p)] = -n_o / (tau * tau);
    g[p] = n_o / tau;
    for i in 0..data.n() {
        let y = data.times[i];
        let zi = z.row(i);
        // per-row: gradient weight on z, weight on y; hessian weight D
        let (gz, gy, d) = if data.status[i] {
            let e = tau * y - lin[i];
            ll -= 0.5 * e * e;
            (e, -y * e, 1.0)
        } else {
            let t = lin[i] - tau * y;
            ll += log_norm_cdf(t);
            let r = inv_mills(t);
            (r, -y * r, mills_curvature(t))
        };
        for a in 0..p {
            g[a] += gz * zi[a];
            for b in 0..=a {
                h[(a, b)] -= d * zi[a] * zi[b];
            }
            h[(a, p)] += d * zi[a] * y;
        }
        g[p] += gy;
        h[(p, p)] -= d * y * y;
    }
    for a in 0..p {
        for b in 0..a {
            h[(b, a)] = h[(a, b)];
        }
        h[(p, a)] = h[(a, p)];
    }
    Ok((ll, g, h))
}

/// True iff there are at least `p_γ` events and the event rows of `Z_γ` have full column rank.
pub fn aft_concavity_check(z: &DMatrix<f64>, data: &SurvivalData) -> bool {
    let p = z.ncols();
    let rows: Vec<usize> = (0..data.n()).filter(|&i| data.status[i]).collect();
    if rows.len() < p {
        return false;
    }
    if p == 0 {
        return true;
    }
    rank(&z.select_rows(rows.iter())) == p
}

/// Maximizer of the log-likelihood in τ at `α = 0`.
pub fn aft_tau0(data: &SurvivalData) -> Result<f64> {
    if data.n_observed() == 0 {
        return Err(Error::DegenerateResponse("no uncensored observations".into()));
    }
    let z = DMatrix::zeros(data.n(), 0);
    let eval = |tau: f64| {
        aft_loglik_grad_hess(&AftParams { alpha: DVector::zeros(0), tau }, &z, data)
            .map(|(l, g, h)| (l, g[0], h[(0, 0)]))
    };
    let mut tau = {
        let obs: Vec<f64> = (0..data.n()).filter(|&i| data.status[i]).map(|i| data.times[i]).collect();
        let ms = obs.iter().map(|v| v * v).sum::<f64>() / obs.len() as f64;
        if ms > 0.0 { 1.0 / ms.sqrt() } else { 1.0 }
    };
    for _ in 0..200 {
        let (l, g, h) = eval(tau)?;
        if g.abs() < 1e-12 * (1.0 + l.abs()) {
            return Ok(tau);
        }
        // h < 0 by concavity
        let mut step = -g / h;
        loop {
            let next = tau + step;
            if next > 0.0 && eval(next)?.0 >= l - 1e-12 * l.abs() {
                tau = next;
                break;
            }
            step *= 0.5;
            if step.abs() < 1e-300 {
                return Ok(tau);
            }
        }
    }
    Ok(tau)
}
