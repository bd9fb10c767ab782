//! Cached ALA for canonical-link exponential families, expanded at `β = 0`
//! (or the intercept-only fit) so that every model is scored from `Z_γᵀZ_γ`
//! and `Z_γᵀỹ` alone.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::general::LN_2PI;
use super::gmom::gmom_tilt;
use super::score::{Diagnostics, ExpansionVariant, MarginalScore, Method};
use crate::data_model::{Center, ModelId, SuffStatsCache};
use crate::error::{Error, Result};
use crate::families::{self, Family};
use crate::linalg::{ls_solve_jittered, SpdFactor};
use crate::priors::{base_precision, group_blocks, log_normal_blocks, ParamPriorSpec, PriorKind};

/// Pearson over-dispersion estimate at the intercept-only fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureContext {
    pub rho_hat: f64,
    pub nu0: f64,
    pub bpp_nu0: f64,
}

/// `ρ̂ = Σ(y_i − ȳ)² / [φ b''(h(ȳ)) (n − 1)]`.
pub fn curvature_context(family: &Family, y: &DVector<f64>) -> Result<CurvatureContext> {
    let phi = family
        .known_phi()
        .ok_or_else(|| Error::Unsupported("curvature adjustment needs a known dispersion".into()))?;
    let n = y.len();
    if n < 2 {
        return Err(Error::DegenerateResponse("need at least two observations".into()));
    }
    let ybar = y.sum() / n as f64;
    if y.iter().all(|v| *v == y[0]) {
        return Err(Error::DegenerateResponse("constant response".into()));
    }
    let nu0 = family.link(ybar);
    let bpp = family.b2(nu0);
    if !(bpp > 0.0) || !nu0.is_finite() {
        return Err(Error::DegenerateResponse(format!("b''(h(ȳ)) = {bpp}")));
    }
    let ss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    Ok(CurvatureContext { rho_hat: ss / (phi * bpp * (n as f64 - 1.0)), nu0, bpp_nu0: bpp })
}

/// Engine settings.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlaSettings {
    pub variant: ExpansionVariant,
    pub curvature: bool,
}

/// Cached ALA scorer for one response and one prior.
#[derive(Debug)]
pub struct CachedAla {
    cache: Arc<SuffStatsCache>,
    family: Family,
    prior: ParamPriorSpec,
    variant: ExpansionVariant,
    curvature: Option<CurvatureContext>,
    loglik0: f64,
    phi0: Option<f64>,
    s_phi0: f64,
}

impl CachedAla {
    pub fn new(cache: Arc<SuffStatsCache>, family: Family, prior: ParamPriorSpec, settings: AlaSettings) -> Result<Self> {
        if !family.is_exponential() {
            return Err(Error::Unsupported("the cached ALA covers exponential families only".into()));
        }
        let tag = cache.tag();
        let y = cache.response().clone();
        let n = y.len() as f64;
        let curvature = if settings.curvature {
            if tag.center != Center::InterceptMle {
                return Err(Error::Unsupported("curvature adjustment expands at the intercept-only fit".into()));
            }
            Some(curvature_context(&family, &y)?)
        } else {
            None
        };
        let eta0 = DVector::from_element(y.len(), tag.nu0);
        let (loglik0, phi0, s_phi0) = match family.known_phi() {
            Some(phi) => (families::loglik(&family, &eta0, &y, phi).value, None, 0.0),
            None => {
                if settings.variant == ExpansionVariant::LogJoint {
                    return Err(Error::Unsupported(
                        "the log-joint variant is available for known dispersion only".into(),
                    ));
                }
                prior.require_phi_prior()?;
                let phi0 = match tag.center {
                    Center::Zero => families::phi0_mle(&family, &y)?,
                    Center::InterceptMle => {
                        let v = y.iter().map(|v| (v - tag.b1).powi(2)).sum::<f64>() / n;
                        if v > 0.0 { v } else { return Err(Error::DegenerateResponse("constant response".into())) }
                    }
                };
                let a0 = tag.nu0 * y.sum() - n * family.b(tag.nu0);
                let sd2c: f64 = y.iter().map(|&v| family.d2c(v, phi0)).sum();
                let s = (-2.0 * a0 / (phi0 * phi0) - phi0 * sd2c) / tag.b2;
                (a0 / phi0 + families::sum_c(&family, &y, phi0), Some(phi0), s)
            }
        };
        Ok(Self { cache, family, prior, variant: settings.variant, curvature, loglik0, phi0, s_phi0 })
    }

    pub fn cache(&self) -> &Arc<SuffStatsCache> {
        &self.cache
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn curvature(&self) -> Option<CurvatureContext> {
        self.curvature
    }

    pub fn phi0(&self) -> Option<f64> {
        self.phi0
    }

    /// `s(φ₀)` of the dispersion block (unknown dispersion only).
    pub fn s_phi0(&self) -> f64 {
        self.s_phi0
    }

    /// Log integrated likelihood of `model`.
    pub fn score(&self, model: &ModelId) -> Result<MarginalScore> {
        match self.family.known_phi() {
            Some(phi) => self.score_known(model, phi),
            None => self.score_unknown(model),
        }
    }

    /// `log p̃(y|γ_a) − log p̃(y|γ_b)`.
    pub fn log_bf(&self, a: &ModelId, b: &ModelId) -> Result<f64> {
        Ok(self.score(a)?.log_ml - self.score(b)?.log_ml)
    }

    fn not_invertible(model: &ModelId) -> Error {
        Error::NotInvertible { model: model.to_string() }
    }

    fn score_known(&self, model: &ModelId, phi: f64) -> Result<MarginalScore> {
        let (g, u) = self.cache.submodel_stats(model);
        let p = g.nrows();
        let n = self.cache.n();
        let blocks = group_blocks(&g, &self.cache.design().active_sizes(model), model)?;
        let b2 = self.cache.tag().b2;
        let rho = self.curvature.map(|c| c.rho_hat).unwrap_or(1.0);
        let kappa = b2 / phi;
        let (kind, gg) = (self.prior.kind, self.prior.g);
        let (mut log_ml, mean, s_over_phi, jittered) = match self.variant {
            ExpansionVariant::Likelihood => {
                let sol = ls_solve_jittered(&g, &u).ok_or_else(|| Self::not_invertible(model))?;
                let log_prior = log_normal_blocks(&sol.beta, phi, &blocks, kind, n, gg);
                let log_ml = self.loglik0 + log_prior + 0.5 * p as f64 * (LN_2PI - (rho * kappa).ln())
                    - 0.5 * sol.factor.log_det()
                    + 0.5 * kappa * sol.quad / rho;
                let s = if kind == PriorKind::GMom { sol.factor.inverse() / (rho * b2) } else { DMatrix::zeros(0, 0) };
                (log_ml, sol.beta, s, sol.factor.jittered)
            }
            ExpansionVariant::LogJoint => {
                let h = &g * (rho * kappa) + base_precision(&blocks, kind, n, gg) / phi;
                let f = SpdFactor::with_jitter(&h).ok_or_else(|| Self::not_invertible(model))?;
                let ku = &u * kappa;
                let x = f.solve(&ku);
                let quad = if p == 0 { 0.0 } else { ku.dot(&x) };
                let log_prior0 = log_normal_blocks(&DVector::zeros(p), phi, &blocks, kind, n, gg);
                let log_ml = self.loglik0 + log_prior0 + 0.5 * p as f64 * LN_2PI - 0.5 * f.log_det() + 0.5 * quad;
                let s = if kind == PriorKind::GMom { f.inverse() / phi } else { DMatrix::zeros(0, 0) };
                (log_ml, x, s, f.jittered)
            }
        };
        if kind == PriorKind::GMom {
            log_ml += gmom_tilt(&mean, &s_over_phi, 1.0 / phi, &blocks, n, gg);
        }
        Ok(MarginalScore {
            log_ml,
            method: if self.curvature.is_some() { Method::AlaCurvAdj } else { Method::Ala },
            expansion: DVector::zeros(p),
            mode: mean,
            diagnostics: Diagnostics {
                iterations: 0,
                jittered,
                rho_hat: self.curvature.map(|c| c.rho_hat),
                phi0: None,
            },
        })
    }

    fn score_unknown(&self, model: &ModelId) -> Result<MarginalScore> {
        let (g, u) = self.cache.submodel_stats(model);
        let p = g.nrows();
        let n = self.cache.n();
        let blocks = group_blocks(&g, &self.cache.design().active_sizes(model), model)?;
        let sol = ls_solve_jittered(&g, &u).ok_or_else(|| Self::not_invertible(model))?;
        let q = sol.quad;
        let phi0 = self.phi0.expect("unknown dispersion has φ₀");
        let s = self.s_phi0;
        let b2 = self.cache.tag().b2;
        let denom = phi0 * phi0 * s - q;
        if !(denom > 0.0) {
            return Err(Error::NotConcaveAtExpansion);
        }
        let t = 1.0 + q / denom;
        let kappa0 = b2 / phi0;
        let sigma = denom / (phi0 * phi0);
        let log_det_h = (p + 1) as f64 * kappa0.ln() + sol.factor.log_det() + sigma.ln();
        let phi_t = phi0 - q * phi0 / denom;
        if !(phi_t > 0.0) {
            return Err(Error::NonPositiveDispersion { value: phi_t });
        }
        let ig = self.prior.require_phi_prior()?;
        let (kind, gg) = (self.prior.kind, self.prior.g);
        let log_prior = log_normal_blocks(&sol.beta, phi_t, &blocks, kind, n, gg) + ig.log_pdf(phi_t);
        let mut log_ml =
            self.loglik0 + log_prior + 0.5 * (p + 1) as f64 * LN_2PI - 0.5 * log_det_h + 0.5 * kappa0 * t * q;
        if kind == PriorKind::GMom {
            let inv_phi = if matches!(self.family, Family::GaussianUnknownPhi) {
                (2.0 * ig.shape + n as f64) / (2.0 * ig.scale + self.cache.yty() - q)
            } else {
                1.0 / phi_t
            };
            let s_mat = sol.factor.inverse() / b2;
            log_ml += gmom_tilt(&sol.beta, &s_mat, inv_phi, &blocks, n, gg);
        }
        let mut expansion = DVector::zeros(p + 1);
        expansion[p] = phi0;
        let mut mode = DVector::zeros(p + 1);
        mode.rows_mut(0, p).copy_from(&(&sol.beta * t));
        mode[p] = phi_t;
        Ok(MarginalScore {
            log_ml,
            method: Method::Ala,
            expansion,
            mode,
            diagnostics: Diagnostics { iterations: 0, jittered: sol.factor.jittered, rho_hat: None, phi0: Some(phi0) },
        })
    }
}
