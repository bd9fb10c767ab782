//! Parameter log densities and likelihoods in the form the generic
//! expansion routines consume.

use nalgebra::{DMatrix, DVector};

use super::general::{Expansion, Likelihood, LogPrior, LN_2PI};
use crate::error::{Error, Result};
use crate::families::{self, aft_loglik_grad_hess, AftParams, Family, SurvivalData};
use crate::linalg::SpdFactor;
use crate::priors::{base_precision, GroupBlock, InvGamma, PriorKind};

/// How the dispersion enters the parameter prior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scale {
    /// φ fixed; `η = β`.
    Known(f64),
    /// `η = (β, φ)` with an inverse-gamma prior on φ.
    Dispersion(InvGamma),
    /// `η = (α, τ)` for the AFT model: α is scale free, τ = φ^{-1/2} with φ ~ IG.
    Precision(InvGamma),
}

#[derive(Clone, Debug)]
struct Penalty {
    start: usize,
    size: usize,
    k: DMatrix<f64>,
}

/// Group-Zellner density, or the gMOM kernel with an optional quadratic penalty.
#[derive(Clone, Debug)]
pub struct ParamDensity {
    p0: DMatrix<f64>,
    log_det_p0: f64,
    penalty: Vec<Penalty>,
    scale: Scale,
}

impl ParamDensity {
    /// Builds the density for the active groups described by `blocks`.
    /// With `kind = GMom` and `with_penalty = false` only the Normal kernel is used.
    pub fn new(blocks: &[GroupBlock], kind: PriorKind, n: usize, g: f64, scale: Scale, with_penalty: bool) -> Self {
        let p0 = base_precision(blocks, kind, n, g);
        let log_det_p0 = SpdFactor::new(&p0).map(|f| f.log_det()).unwrap_or(f64::NAN);
        let penalty = if kind == PriorKind::GMom && with_penalty {
            blocks
                .iter()
                .map(|b| Penalty {
                    start: b.start,
                    size: b.size,
                    k: &b.gram * ((b.size as f64 + 2.0) / (g * n as f64)),
                })
                .collect()
        } else {
            Vec::new()
        };
        Self { p0, log_det_p0, penalty, scale }
    }

    pub fn base_precision(&self) -> &DMatrix<f64> {
        &self.p0
    }

    fn p(&self) -> usize {
        self.p0.nrows()
    }

    /// Splits `η` into the coefficient part and the scale used for it.
    fn split<'a>(&self, eta: &'a DVector<f64>) -> (nalgebra::DVectorView<'a, f64>, f64) {
        let p = self.p();
        let beta = eta.rows(0, p);
        let s = match self.scale {
            Scale::Known(phi) => phi,
            Scale::Dispersion(_) => eta[p],
            Scale::Precision(_) => 1.0,
        };
        (beta, s)
    }
}

fn tau_log_prior(ig: &InvGamma, tau: f64) -> (f64, f64, f64) {
    // density of τ when φ = τ^{-2} ~ IG
    let phi = tau.powi(-2);
    let (d1, d2) = ig.log_pdf_derivs(phi);
    let dphi = -2.0 * tau.powi(-3);
    let d2phi = 6.0 * tau.powi(-4);
    let val = ig.log_pdf(phi) + 2f64.ln() - 3.0 * tau.ln();
    let grad = d1 * dphi - 3.0 / tau;
    let hess = d2 * dphi * dphi + d1 * d2phi + 3.0 / (tau * tau);
    (val, grad, hess)
}

impl LogPrior for ParamDensity {
    fn log_density(&self, eta: &DVector<f64>) -> f64 {
        let p = self.p();
        let (beta, s) = self.split(eta);
        if !(s > 0.0) {
            return f64::NEG_INFINITY;
        }
        let q = if p == 0 { 0.0 } else { (beta.transpose() * &self.p0 * beta)[(0, 0)] };
        let mut v = -0.5 * p as f64 * (LN_2PI + s.ln()) + 0.5 * self.log_det_p0 - 0.5 * q / s;
        for b in &self.penalty {
            let bj = beta.rows(b.start, b.size);
            let qj = (bj.transpose() * &b.k * bj)[(0, 0)];
            v += (qj / (s * b.size as f64)).ln();
        }
        match self.scale {
            Scale::Known(_) => v,
            Scale::Dispersion(ig) => v + ig.log_pdf(s),
            Scale::Precision(ig) => {
                let tau = eta[p];
                if !(tau > 0.0) {
                    return f64::NEG_INFINITY;
                }
                v + tau_log_prior(&ig, tau).0
            }
        }
    }

    fn neg_grad_hess(&self, eta: &DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let p = self.p();
        let (beta, s) = self.split(eta);
        let d = eta.len();
        let mut g = DVector::zeros(d);
        let mut h = DMatrix::zeros(d, d);
        let pb = &self.p0 * beta;
        g.rows_mut(0, p).copy_from(&(&pb / s));
        h.view_mut((0, 0), (p, p)).copy_from(&(&self.p0 / s));
        for b in &self.penalty {
            let bj = beta.rows(b.start, b.size).into_owned();
            let kb = &b.k * &bj;
            let qj = bj.dot(&kb);
            let mut gv = g.rows_mut(b.start, b.size);
            gv -= &kb * (2.0 / qj);
            let mut hv = h.view_mut((b.start, b.start), (b.size, b.size));
            hv += &b.k * (-2.0 / qj) + &kb * kb.transpose() * (4.0 / (qj * qj));
        }
        match self.scale {
            Scale::Known(_) => {}
            Scale::Dispersion(ig) => {
                let phi = s;
                let q = beta.dot(&pb);
                let k = self.penalty.len() as f64;
                let (d1, d2) = ig.log_pdf_derivs(phi);
                g[p] = p as f64 / (2.0 * phi) - q / (2.0 * phi * phi) + k / phi - d1;
                h[(p, p)] = -(p as f64) / (2.0 * phi * phi) + q / phi.powi(3) - k / (phi * phi) - d2;
                let cross = -&pb / (phi * phi);
                h.view_mut((0, p), (p, 1)).copy_from(&cross);
                h.view_mut((p, 0), (1, p)).copy_from(&cross.transpose());
            }
            Scale::Precision(ig) => {
                let (_, d1, d2) = tau_log_prior(&ig, eta[p]);
                g[p] = -d1;
                h[(p, p)] = -d2;
            }
        }
        Some((g, h))
    }

    fn check_domain(&self, eta: &DVector<f64>) -> Result<()> {
        match self.scale {
            Scale::Known(_) => Ok(()),
            Scale::Dispersion(_) | Scale::Precision(_) => {
                let v = eta[self.p()];
                if v > 0.0 {
                    Ok(())
                } else {
                    Err(Error::NonPositiveDispersion { value: v })
                }
            }
        }
    }
}

/// Zero-mean Normal density with a given precision matrix.
#[derive(Clone, Debug)]
pub struct NormalPrior {
    precision: DMatrix<f64>,
    log_det: f64,
}

impl NormalPrior {
    pub fn new(precision: DMatrix<f64>) -> Result<Self> {
        let f = SpdFactor::new(&precision)
            .ok_or_else(|| Error::Domain("prior precision is not positive definite".into()))?;
        Ok(Self { log_det: f.log_det(), precision })
    }

    pub fn standard(dim: usize) -> Self {
        Self { precision: DMatrix::identity(dim, dim), log_det: 0.0 }
    }
}

impl LogPrior for NormalPrior {
    fn log_density(&self, eta: &DVector<f64>) -> f64 {
        let d = eta.len() as f64;
        -0.5 * d * LN_2PI + 0.5 * self.log_det - 0.5 * (eta.transpose() * &self.precision * eta)[(0, 0)]
    }

    fn neg_grad_hess(&self, eta: &DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
        Some((&self.precision * eta, self.precision.clone()))
    }
}

/// Exponential-family likelihood with fixed dispersion; `η = β`.
#[derive(Clone, Debug)]
pub struct GlmLikelihood {
    pub family: Family,
    pub z: DMatrix<f64>,
    pub y: DVector<f64>,
    pub phi: f64,
}

impl GlmLikelihood {
    fn predictor(&self, beta: &DVector<f64>) -> DVector<f64> {
        if self.z.ncols() == 0 { DVector::zeros(self.z.nrows()) } else { &self.z * beta }
    }
}

impl Likelihood for GlmLikelihood {
    fn dim(&self) -> usize {
        self.z.ncols()
    }

    fn in_domain(&self, _eta: &DVector<f64>) -> bool {
        true
    }

    fn loglik(&self, eta: &DVector<f64>) -> Result<f64> {
        Ok(families::loglik(&self.family, &self.predictor(eta), &self.y, self.phi).value)
    }

    fn expand(&self, eta: &DVector<f64>) -> Result<Expansion> {
        let (grad, hess) = families::grad_hess(&self.family, eta, self.phi, &self.z, &self.y)?;
        Ok(Expansion { point: eta.clone(), loglik: self.loglik(eta)?, grad, hess })
    }
}

/// Exponential-family likelihood with unknown dispersion; `η = (β, φ)`.
#[derive(Clone, Debug)]
pub struct GlmDispersionLikelihood {
    pub family: Family,
    pub z: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl Likelihood for GlmDispersionLikelihood {
    fn dim(&self) -> usize {
        self.z.ncols() + 1
    }

    fn in_domain(&self, eta: &DVector<f64>) -> bool {
        eta[self.z.ncols()] > 0.0
    }

    fn loglik(&self, eta: &DVector<f64>) -> Result<f64> {
        let p = self.z.ncols();
        let phi = eta[p];
        if !(phi > 0.0) {
            return Err(Error::Domain(format!("dispersion {phi} must be positive")));
        }
        let lin = if p == 0 { DVector::zeros(self.z.nrows()) } else { &self.z * eta.rows(0, p) };
        Ok(families::loglik(&self.family, &lin, &self.y, phi).value)
    }

    fn expand(&self, eta: &DVector<f64>) -> Result<Expansion> {
        let p = self.z.ncols();
        let beta = eta.rows(0, p).into_owned();
        let (grad, hess) = families::grad_hess(&self.family, &beta, eta[p], &self.z, &self.y)?;
        Ok(Expansion { point: eta.clone(), loglik: self.loglik(eta)?, grad, hess })
    }
}

/// Log-normal AFT likelihood; `η = (α, τ)`.
#[derive(Clone, Debug)]
pub struct AftLikelihood {
    pub z: DMatrix<f64>,
    pub data: SurvivalData,
}

impl AftLikelihood {
    fn params(&self, eta: &DVector<f64>) -> AftParams {
        let p = self.z.ncols();
        AftParams { alpha: eta.rows(0, p).into_owned(), tau: eta[p] }
    }
}

impl Likelihood for AftLikelihood {
    fn dim(&self) -> usize {
        self.z.ncols() + 1
    }

    fn in_domain(&self, eta: &DVector<f64>) -> bool {
        eta[self.z.ncols()] > 0.0
    }

    fn loglik(&self, eta: &DVector<f64>) -> Result<f64> {
        Ok(aft_loglik_grad_hess(&self.params(eta), &self.z, &self.data)?.0)
    }

    fn expand(&self, eta: &DVector<f64>) -> Result<Expansion> {
        let (l, g, h) = aft_loglik_grad_hess(&self.params(eta), &self.z, &self.data)?;
        Ok(Expansion { point: eta.clone(), loglik: l, grad: -g, hess: -h })
    }
}
