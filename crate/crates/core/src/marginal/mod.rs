//! Log integrated likelihood engines: ALA (cached exponential-family and
//! general), the gMOM correction, Laplace, refined ALA, and exact,
//! quadrature and Monte Carlo oracles.

mod densities;
mod exact;
mod expfam;
mod general;
mod gmom;
mod montecarlo;
mod problem;
mod quadrature;
mod score;

pub use densities::{AftLikelihood, GlmDispersionLikelihood, GlmLikelihood, NormalPrior, ParamDensity, Scale};
pub use exact::{exact_gaussian_marginal, Dispersion};
pub use expfam::{curvature_context, AlaSettings, CachedAla, CurvatureContext};
pub use general::{ala_general, la_fit, la_marginal, Expansion, GaussianFit, Likelihood, LogPrior, NewtonOptions};
pub use gmom::{gmom_tilt, quad_form_mean, quad_form_mean_ig};
pub use montecarlo::{importance_log_marginal, McEstimate};
pub use problem::{ModelProblem, Response};
pub use quadrature::{log_integrate_1d, log_integrate_2d, InnerBracket, QuadOptions, QuadResult};
pub use score::{Diagnostics, ExpansionVariant, MarginalScore, Method};

#[cfg(test)]
mod tests;
