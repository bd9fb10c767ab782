use statrs::function::gamma::ln_gamma;

use crate::data_model::{ConstraintSet, ModelId};
use crate::error::{Error, Result};

/// Model-space prior: uniform over models of a given size within the
/// constrained space, with size probabilities `p(|γ|) ∝ p^{−c|γ|}`.
/// `c = 0` gives the Beta-Binomial(1, 1) prior.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPriorSpec {
    pub c_exponent: f64,
    pub p_total: usize,
    pub constraints: ConstraintSet,
}

impl ModelPriorSpec {
    pub fn new(c_exponent: f64, p_total: usize, constraints: ConstraintSet) -> Self {
        Self { c_exponent, p_total, constraints }
    }

    /// Beta-Binomial(1, 1) prior without constraints.
    pub fn beta_binomial(n_groups: usize, p_total: usize) -> Self {
        Self::new(0.0, p_total, ConstraintSet::unconstrained(n_groups))
    }

    /// `log p(γ)` up to the normalizing constant; `−∞` outside the constrained space.
    pub fn log_unnormalized(&self, model: &ModelId) -> f64 {
        if !self.constraints.allows(model) {
            return f64::NEG_INFINITY;
        }
        let k = self.constraints.free_size(model) as f64;
        let j = self.constraints.n_countable() as f64;
        let size_term = if self.c_exponent == 0.0 { 0.0 } else { -self.c_exponent * k * (self.p_total as f64).ln() };
        size_term - ln_choose(j, k)
    }
}

fn ln_choose(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// `log p(γ) − log p(γ′)`.
pub fn log_model_prior_ratio(a: &ModelId, b: &ModelId, spec: &ModelPriorSpec) -> Result<f64> {
    for m in [a, b] {
        if !spec.constraints.allows(m) {
            return Err(Error::InvalidModel { model: m.to_string() });
        }
    }
    Ok(spec.log_unnormalized(a) - spec.log_unnormalized(b))
}
