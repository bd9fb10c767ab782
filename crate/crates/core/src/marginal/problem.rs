//! Per-model assembly of likelihood and prior from raw data, used by the
//! Laplace baseline, the refined ALA and the AFT model.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::densities::{AftLikelihood, GlmDispersionLikelihood, GlmLikelihood, ParamDensity, Scale};
use super::general::{ala_general, la_fit, GaussianFit, Likelihood, LogPrior, NewtonOptions};
use super::gmom::gmom_tilt;
use super::score::{Diagnostics, ExpansionVariant, MarginalScore, Method};
use crate::data_model::{DesignMatrix, ModelId};
use crate::error::{Error, Result};
use crate::families::{aft_concavity_check, aft_tau0, phi0_mle, Family, SurvivalData};
use crate::linalg::SpdFactor;
use crate::priors::{group_blocks, GroupBlock, ParamPriorSpec, PriorKind};

/// Response for a regression problem.
#[derive(Clone, Debug, PartialEq)]
pub enum Response {
    Glm(DVector<f64>),
    Survival(SurvivalData),
}

impl Response {
    pub fn n(&self) -> usize {
        match self {
            Response::Glm(y) => y.len(),
            Response::Survival(d) => d.n(),
        }
    }
}

/// Data, family and parameter prior shared by every model.
#[derive(Clone, Debug)]
pub struct ModelProblem {
    pub design: Arc<DesignMatrix>,
    pub response: Response,
    pub family: Family,
    pub prior: ParamPriorSpec,
}

struct Assembled {
    lik: Box<dyn Likelihood>,
    blocks: Vec<GroupBlock>,
    p: usize,
}

impl ModelProblem {
    pub fn new(design: Arc<DesignMatrix>, response: Response, family: Family, prior: ParamPriorSpec) -> Result<Self> {
        if response.n() != design.n() {
            return Err(Error::Dimension("response length differs from the number of rows".into()));
        }
        match (&response, family) {
            (Response::Survival(_), Family::AftLogNormal) => {}
            (Response::Glm(y), f) if f.is_exponential() => f.validate_response(y.as_slice())?,
            _ => return Err(Error::Unsupported("response type does not match the family".into())),
        }
        if family.known_phi().is_none() {
            prior.require_phi_prior()?;
        }
        Ok(Self { design, response, family, prior })
    }

    fn assemble(&self, model: &ModelId) -> Result<Assembled> {
        let z = self.design.submatrix(model);
        let p = z.ncols();
        let gram = z.tr_mul(&z);
        let blocks = group_blocks(&gram, &self.design.active_sizes(model), model)?;
        let lik: Box<dyn Likelihood> = match (&self.response, self.family.known_phi()) {
            (Response::Survival(data), _) => Box::new(AftLikelihood { z, data: data.clone() }),
            (Response::Glm(y), Some(phi)) => Box::new(GlmLikelihood { family: self.family, z, y: y.clone(), phi }),
            (Response::Glm(y), None) => Box::new(GlmDispersionLikelihood { family: self.family, z, y: y.clone() }),
        };
        Ok(Assembled { lik, blocks, p })
    }

    fn scale(&self) -> Scale {
        match (self.family, self.family.known_phi(), self.prior.phi_prior) {
            (_, Some(phi), _) => Scale::Known(phi),
            (Family::AftLogNormal, _, Some(ig)) => Scale::Precision(ig),
            (_, _, Some(ig)) => Scale::Dispersion(ig),
            (_, None, None) => unreachable!("checked in ModelProblem::new"),
        }
    }

    /// Prior density; for gMOM `with_penalty = false` returns the Normal kernel.
    fn density(&self, blocks: &[GroupBlock], with_penalty: bool) -> ParamDensity {
        ParamDensity::new(blocks, self.prior.kind, self.design.n(), self.prior.g, self.scale(), with_penalty)
    }

    /// Expansion point with zero coefficients and the conditional MLE of the scale.
    pub fn zero_point(&self, model: &ModelId) -> Result<DVector<f64>> {
        let p = model.dim();
        Ok(match (&self.response, self.family.known_phi()) {
            (Response::Survival(data), _) => {
                let mut v = DVector::zeros(p + 1);
                v[p] = aft_tau0(data)?;
                v
            }
            (Response::Glm(_), Some(_)) => DVector::zeros(p),
            (Response::Glm(y), None) => {
                let mut v = DVector::zeros(p + 1);
                v[p] = phi0_mle(&self.family, y)?;
                v
            }
        })
    }

    /// φ used in the gMOM tilt for the coefficient part of `eta`.
    fn plug_in_phi(&self, eta: &DVector<f64>, p: usize) -> f64 {
        match (self.family, self.family.known_phi()) {
            (Family::AftLogNormal, _) => 1.0,
            (_, Some(phi)) => phi,
            (_, None) => eta[p],
        }
    }

    fn tilt(&self, fit: &GaussianFit, a: &Assembled) -> f64 {
        if self.prior.kind != PriorKind::GMom {
            return 0.0;
        }
        let phi = self.plug_in_phi(&fit.mode, a.p);
        let mean = fit.mode.rows(0, a.p).into_owned();
        let s = fit.cov.view((0, 0), (a.p, a.p)) / phi;
        gmom_tilt(&mean, &s, 1.0 / phi, &a.blocks, self.design.n(), self.prior.g)
    }

    fn check_aft(&self, model: &ModelId) -> Result<()> {
        if let Response::Survival(data) = &self.response {
            let z = self.design.submatrix(model);
            if !aft_concavity_check(&z, data) {
                return Err(Error::NotConcaveAtExpansion);
            }
        }
        Ok(())
    }

    /// ALA at an explicit expansion point.
    pub fn ala_at(&self, model: &ModelId, eta0: &DVector<f64>, variant: ExpansionVariant) -> Result<MarginalScore> {
        let a = self.assemble(model)?;
        self.check_aft(model)?;
        let e = a.lik.expand(eta0)?;
        let fit = ala_general(&e, &self.density(&a.blocks, false), variant)?;
        Ok(MarginalScore {
            log_ml: fit.log_ml + self.tilt(&fit, &a),
            method: Method::Ala,
            expansion: eta0.clone(),
            mode: fit.mode,
            diagnostics: Diagnostics::default(),
        })
    }

    /// ALA at the zero expansion point (general route, no caching).
    pub fn ala(&self, model: &ModelId, variant: ExpansionVariant) -> Result<MarginalScore> {
        let eta0 = self.zero_point(model)?;
        self.ala_at(model, &eta0, variant)
    }

    /// Laplace approximation. Under gMOM the mode of the kernel-prior integrand
    /// is used and the non-local factor enters through the tilt.
    pub fn la(&self, model: &ModelId) -> Result<MarginalScore> {
        let a = self.assemble(model)?;
        let init = self.zero_point(model)?;
        let fit = la_fit(a.lik.as_ref(), &self.density(&a.blocks, false), &init, NewtonOptions::default())?;
        Ok(MarginalScore {
            log_ml: fit.log_ml + self.tilt(&fit, &a),
            method: Method::La,
            expansion: fit.mode.clone(),
            mode: fit.mode,
            diagnostics: Diagnostics { iterations: fit.iterations, ..Diagnostics::default() },
        })
    }

    /// Classical Laplace approximation of the full gMOM integrand, at the mode
    /// inside the sign orthant of the kernel-posterior mode.
    pub fn la_gmom_direct(&self, model: &ModelId) -> Result<MarginalScore> {
        if self.prior.kind != PriorKind::GMom {
            return self.la(model);
        }
        let a = self.assemble(model)?;
        let init = self.zero_point(model)?;
        let start = la_fit(a.lik.as_ref(), &self.density(&a.blocks, false), &init, NewtonOptions::default())?;
        let fit = la_fit(a.lik.as_ref(), &self.density(&a.blocks, true), &start.mode, NewtonOptions::default())?;
        Ok(MarginalScore {
            log_ml: fit.log_ml,
            method: Method::La,
            expansion: fit.mode.clone(),
            mode: fit.mode,
            diagnostics: Diagnostics { iterations: fit.iterations, ..Diagnostics::default() },
        })
    }

    /// `k` Newton steps from the zero point, then the ALA at the resulting point.
    /// Steps follow the log-likelihood (`Likelihood`) or the log-joint (`LogJoint`).
    pub fn ala_refined(&self, model: &ModelId, k: u32, variant: ExpansionVariant) -> Result<MarginalScore> {
        let a = self.assemble(model)?;
        self.check_aft(model)?;
        let prior = self.density(&a.blocks, false);
        let mut eta = self.zero_point(model)?;
        for it in 0..k as usize {
            let e = a.lik.expand(&eta)?;
            let (g, h) = match variant {
                ExpansionVariant::Likelihood => (e.grad, e.hess),
                ExpansionVariant::LogJoint => {
                    let (pg, ph) = prior.neg_grad_hess(&eta).expect("Normal kernel is differentiable");
                    (e.grad + pg, e.hess + ph)
                }
            };
            let step = SpdFactor::new(&h).map(|f| f.solve(&g));
            let next = step.map(|s| &eta - s);
            match next {
                Some(v) if v.iter().all(|x| x.is_finite()) && a.lik.in_domain(&v) => eta = v,
                _ => return Err(Error::NonFiniteStep { iteration: it, partial: eta.as_slice().to_vec() }),
            }
        }
        let e = a.lik.expand(&eta)?;
        let fit = ala_general(&e, &prior, variant)?;
        Ok(MarginalScore {
            log_ml: fit.log_ml + self.tilt(&fit, &a),
            method: Method::AlaRefined(k),
            expansion: eta,
            mode: fit.mode,
            diagnostics: Diagnostics { iterations: k as usize, ..Diagnostics::default() },
        })
    }

    /// Likelihood and full prior density of a model, for numerical integration.
    pub fn integrand(&self, model: &ModelId) -> Result<(Box<dyn Likelihood>, ParamDensity)> {
        let a = self.assemble(model)?;
        let prior = self.density(&a.blocks, true);
        Ok((a.lik, prior))
    }

    /// Dense `Z_γᵀZ_γ` of a model.
    pub fn gram(&self, model: &ModelId) -> DMatrix<f64> {
        let z = self.design.submatrix(model);
        z.tr_mul(&z)
    }
}
