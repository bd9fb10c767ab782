//! Command-line arguments and their translation into engine settings.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;

use ala_core::data_model::{build_cache, Center, ConstraintSet, DesignMatrix};
use ala_core::families::{Family, SurvivalData};
use ala_core::marginal::{curvature_context, AlaSettings, CachedAla, Dispersion, ExpansionVariant, ModelProblem, Response};
use ala_core::priors::{InvGamma, ModelPriorSpec, ParamPriorSpec};
use ala_core::search::{ExactScorer, ModelScorer, ProblemEngine, ProblemScorer};

use crate::error::{CliError, CliResult};
use crate::ingest::{ingest, Dataset, IngestArgs};

#[derive(Args, Clone, Debug, Serialize)]
pub struct DataArgs {
    /// Data file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Map from column name to integer group id, header `column,group`.
    #[arg(long)]
    pub groups: PathBuf,
    /// Hierarchical restrictions, one `child_group,parent_group` pair per row.
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    /// Response column.
    #[arg(long)]
    pub response: String,
    /// Event indicator column (1 = observed, 0 = censored), AFT only.
    #[arg(long)]
    pub status: Option<String>,
    /// For AFT: the response column already holds log-times.
    #[arg(long)]
    pub log_times: bool,
    /// Add a constant column as its own group, forced into every model.
    #[arg(long)]
    pub intercept: bool,
    /// Center and scale every non-constant column to unit variance.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Logistic,
    Poisson,
    /// Gaussian with unknown dispersion (inverse-gamma prior).
    Gaussian,
    /// Gaussian with dispersion fixed by `--phi`.
    GaussianKnown,
    /// Log-normal accelerated failure time with right censoring.
    Aft,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorArg {
    /// Group Zellner prior.
    Zellner,
    /// Group product moment (non-local) prior.
    Gmom,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterArg {
    /// Intercept-only MLE when the curvature adjustment is on, zero otherwise.
    Auto,
    Zero,
    InterceptMle,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Toggle {
    /// On for logistic and Poisson, off otherwise.
    Auto,
    On,
    Off,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    /// Approximate Laplace approximation at the zero point.
    Ala,
    /// ALA after `--steps` Newton steps.
    AlaRefined,
    /// Laplace approximation (gMOM: Normal-kernel mode plus moment factor).
    La,
    /// Laplace approximation of the full gMOM integrand.
    LaDirect,
    /// Closed form, Gaussian families only.
    Exact,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    /// Quadratic expansion of the log-likelihood; prior evaluated at the step.
    Likelihood,
    /// Quadratic expansion of log-likelihood plus log-prior.
    LogJoint,
}

impl From<VariantArg> for ExpansionVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Likelihood => ExpansionVariant::Likelihood,
            VariantArg::LogJoint => ExpansionVariant::LogJoint,
        }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Dispersion for `gaussian-known`.
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
    #[arg(long, value_enum, default_value_t = PriorArg::Zellner)]
    pub prior: PriorArg,
    /// Prior dispersion parameter g.
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    /// Inverse-gamma shape for the dispersion (AFT: precision) prior.
    #[arg(long, default_value_t = 0.01)]
    pub phi_a: f64,
    /// Inverse-gamma scale for the dispersion (AFT: precision) prior.
    #[arg(long, default_value_t = 0.01)]
    pub phi_b: f64,
    /// Model-prior complexity exponent c; 0 gives the beta-binomial prior.
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    /// Largest number of groups in a model.
    #[arg(long)]
    pub max_groups: Option<usize>,
    /// Group ids included in every model.
    #[arg(long, value_delimiter = ',')]
    pub force: Vec<String>,
    #[arg(long, value_enum, default_value_t = CenterArg::Auto)]
    pub center: CenterArg,
    /// Curvature adjustment of the ALA.
    #[arg(long, value_enum, default_value_t = Toggle::Auto)]
    pub curvature: Toggle,
    #[arg(long, value_enum, default_value_t = MethodArg::Ala)]
    pub method: MethodArg,
    /// Newton steps for `ala-refined`.
    #[arg(long, default_value_t = 1)]
    pub steps: u32,
    #[arg(long, value_enum, default_value_t = VariantArg::Likelihood)]
    pub variant: VariantArg,
}

impl ModelArgs {
    pub fn family(&self) -> Family {
        match self.family {
            FamilyArg::Logistic => Family::Logistic,
            FamilyArg::Poisson => Family::Poisson,
            FamilyArg::Gaussian => Family::GaussianUnknownPhi,
            FamilyArg::GaussianKnown => Family::GaussianKnownPhi(self.phi),
            FamilyArg::Aft => Family::AftLogNormal,
        }
    }

    pub fn param_prior(&self) -> CliResult<ParamPriorSpec> {
        let base = match self.prior {
            PriorArg::Zellner => ParamPriorSpec::group_zellner(self.g),
            PriorArg::Gmom => ParamPriorSpec::gmom(self.g),
        };
        if !(self.g > 0.0) {
            return Err(CliError::Config(format!("g must be positive, got {}", self.g)));
        }
        Ok(match self.family().known_phi() {
            Some(_) => base,
            None => base.with_phi_prior(InvGamma::new(self.phi_a, self.phi_b)?),
        })
    }

    pub fn curvature_on(&self) -> bool {
        match self.curvature {
            Toggle::Auto => self.family().default_curvature(),
            Toggle::On => true,
            Toggle::Off => false,
        }
    }

    pub fn center(&self) -> Center {
        match self.center {
            CenterArg::Zero => Center::Zero,
            CenterArg::InterceptMle => Center::InterceptMle,
            CenterArg::Auto if self.curvature_on() => Center::InterceptMle,
            CenterArg::Auto => Center::Zero,
        }
    }
}

/// Data in engine form.
pub struct Problem {
    pub dataset: Dataset,
    pub design: Arc<DesignMatrix>,
    pub response: Response,
    pub family: Family,
}

impl Problem {
    pub fn load(data: &DataArgs, model: &ModelArgs) -> CliResult<Self> {
        let family = model.family();
        let is_aft = family == Family::AftLogNormal;
        if is_aft != data.status.is_some() {
            return Err(CliError::Config("`--status` is required for, and only used by, the AFT family".into()));
        }
        let dataset = ingest(&IngestArgs {
            data: &data.data,
            groups: &data.groups,
            constraints: data.constraints.as_deref(),
            response: &data.response,
            status: data.status.as_deref(),
            intercept: data.intercept,
        })?;
        let design = if data.standardize { dataset.design.standardized() } else { dataset.design.clone() };
        let y = DVector::from_column_slice(&dataset.response);
        let response = match &dataset.status {
            Some(status) => {
                let times = if data.log_times {
                    y
                } else {
                    if let Some(i) = y.iter().position(|t| !(*t > 0.0)) {
                        return Err(CliError::Config(format!("survival time in row {} is not positive", i + 1)));
                    }
                    y.map(f64::ln)
                };
                Response::Survival(SurvivalData::new(times, status.iter().map(|s| *s == 1.0).collect())?)
            }
            None => {
                family.validate_response(y.as_slice())?;
                Response::Glm(y)
            }
        };
        Ok(Self { dataset, design: Arc::new(design), response, family })
    }

    pub fn glm_response(&self) -> Option<&DVector<f64>> {
        match &self.response {
            Response::Glm(y) => Some(y),
            Response::Survival(_) => None,
        }
    }

    pub fn constraints(&self, model: &ModelArgs) -> CliResult<ConstraintSet> {
        let mut set = self.dataset.constraint_set()?;
        for label in &model.force {
            let g = self
                .dataset
                .group_index(label)
                .ok_or_else(|| CliError::Config(format!("`--force {label}`: no such group")))?;
            set = set.force(g);
        }
        if let Some(m) = model.max_groups {
            set = set.with_max_groups(m);
        }
        Ok(set)
    }

    pub fn model_prior(&self, model: &ModelArgs) -> CliResult<ModelPriorSpec> {
        Ok(ModelPriorSpec::new(model.c, self.design.p(), self.constraints(model)?))
    }

    /// Scorer for `method`; GLM `ala` goes through the sufficient-statistics cache.
    pub fn scorer(&self, model: &ModelArgs, method: MethodArg) -> CliResult<Box<dyn ModelScorer>> {
        let prior = model.param_prior()?;
        let variant = ExpansionVariant::from(model.variant);
        let problem = || ModelProblem::new(self.design.clone(), self.response.clone(), self.family, prior);
        Ok(match (method, self.glm_response()) {
            (MethodArg::Ala, Some(y)) => {
                let cache = Arc::new(build_cache(self.design.clone(), y, &self.family, model.center())?);
                let settings = AlaSettings { variant, curvature: model.curvature_on() };
                Box::new(CachedAla::new(cache, self.family, prior, settings)?)
            }
            (MethodArg::Ala, None) => Box::new(ProblemScorer { problem: problem()?, engine: ProblemEngine::Ala(variant) }),
            (MethodArg::AlaRefined, _) => {
                Box::new(ProblemScorer { problem: problem()?, engine: ProblemEngine::Refined(model.steps, variant) })
            }
            (MethodArg::La, _) => Box::new(ProblemScorer { problem: problem()?, engine: ProblemEngine::La }),
            (MethodArg::LaDirect, _) => Box::new(ProblemScorer { problem: problem()?, engine: ProblemEngine::LaGmomDirect }),
            (MethodArg::Exact, Some(y)) => {
                let dispersion = match self.family {
                    Family::GaussianKnownPhi(phi) => Dispersion::Known(phi),
                    Family::GaussianUnknownPhi => Dispersion::InvGamma(prior.require_phi_prior()?),
                    _ => return Err(CliError::Config("`--method exact` needs a Gaussian family".into())),
                };
                let cache = Arc::new(build_cache(self.design.clone(), y, &self.family, Center::Zero)?);
                Box::new(ExactScorer { cache, prior, dispersion })
            }
            (MethodArg::Exact, None) => return Err(CliError::Config("`--method exact` needs a Gaussian family".into())),
        })
    }

    /// Curvature ratio ρ̂ when the adjustment is on.
    pub fn rho_hat(&self, model: &ModelArgs) -> CliResult<Option<f64>> {
        match self.glm_response() {
            Some(y) if model.curvature_on() && self.family.is_exponential() => {
                Ok(Some(curvature_context(&self.family, y)?.rho_hat))
            }
            _ => Ok(None),
        }
    }

    /// Dispersion (AFT: precision) at the zero expansion point.
    pub fn phi0(&self) -> CliResult<Option<f64>> {
        Ok(match (&self.response, self.family) {
            (Response::Survival(d), _) => Some(ala_core::families::aft_tau0(d)?),
            (Response::Glm(y), Family::GaussianUnknownPhi) => Some(ala_core::families::phi0_mle(&self.family, y)?),
            (_, f) => f.known_phi(),
        })
    }
}
