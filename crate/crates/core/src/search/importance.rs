use super::posterior::{enumerate_posterior, PosteriorSummary};
use super::scorer::ScoreMemo;
use crate::data_model::ModelId;
use crate::error::Result;
use crate::linalg::log_sum_exp;
use crate::priors::ModelPriorSpec;

/// Importance weights `w(γ) = p̂(γ|y)/p̃(γ|y)` for models drawn from the
/// approximate posterior, both posteriors normalized on the sampled support.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceReport {
    /// Distinct sampled models with multiplicity and weight.
    pub weights: Vec<(ModelId, usize, f64)>,
    /// `(Σ_b w_b)² / Σ_b w_b²` over all draws.
    pub effective_sample_size: f64,
    pub draws: usize,
    pub max_weight: f64,
    /// Largest single-draw share `w_b / Σ w`.
    pub max_normalized_weight: f64,
    pub degenerate: bool,
    /// Weighted inclusion probabilities.
    pub inclusion: Vec<f64>,
}

/// Reweights draws from the `approx` posterior towards the `target` posterior.
/// Each distinct model is scored once per memo.
pub fn importance_reweight(
    samples: &[(ModelId, usize)],
    target: &ScoreMemo<'_>,
    approx: &ScoreMemo<'_>,
    prior: &ModelPriorSpec,
) -> ImportanceReport {
    let n_groups = prior.constraints.n_groups();
    let draws: usize = samples.iter().map(|(_, c)| c).sum();
    let lt: Vec<f64> = samples.iter().map(|(m, _)| target.log_ml(m) + prior.log_unnormalized(m)).collect();
    let la: Vec<f64> = samples.iter().map(|(m, _)| approx.log_ml(m) + prior.log_unnormalized(m)).collect();
    let (nt, na) = (log_sum_exp(&lt), log_sum_exp(&la));
    let w: Vec<f64> = lt
        .iter()
        .zip(&la)
        .map(|(t, a)| {
            let v = ((t - nt) - (a - na)).exp();
            if v.is_finite() { v } else if *t > f64::NEG_INFINITY { f64::INFINITY } else { 0.0 }
        })
        .collect();
    let sum: f64 = samples.iter().zip(&w).map(|((_, c), w)| *c as f64 * w).sum();
    let sum_sq: f64 = samples.iter().zip(&w).map(|((_, c), w)| *c as f64 * w * w).sum();
    let max_weight = w.iter().cloned().fold(0.0, f64::max);
    let (ess, max_norm) = if sum.is_finite() && sum > 0.0 {
        (sum * sum / sum_sq, max_weight / sum)
    } else {
        (1.0, 1.0)
    };
    let mut inclusion = vec![0.0; n_groups];
    if sum.is_finite() && sum > 0.0 {
        for ((m, c), wi) in samples.iter().zip(&w) {
            for j in m.active() {
                inclusion[j] += *c as f64 * wi / sum;
            }
        }
    }
    ImportanceReport {
        weights: samples.iter().zip(&w).map(|((m, c), w)| (m.clone(), *c, *w)).collect(),
        effective_sample_size: ess.min(draws as f64),
        draws,
        max_weight,
        max_normalized_weight: max_norm,
        degenerate: max_norm > 0.5,
        inclusion,
    }
}

/// Drops groups whose inclusion under `screen` is not above `threshold`
/// (`threshold = 0` keeps every group) and enumerates the survivors with `refine`.
pub fn screen_then_refine(
    screen: &PosteriorSummary,
    threshold: f64,
    refine: &ScoreMemo<'_>,
    prior: &ModelPriorSpec,
    limit: usize,
) -> Result<PosteriorSummary> {
    let mut cons = prior.constraints.clone();
    for (j, &p) in screen.inclusion.iter().enumerate() {
        let keep = threshold <= 0.0 || p > threshold;
        if !keep && !cons.is_forced(j) {
            cons = cons.exclude(j);
        }
    }
    let reduced = ModelPriorSpec { constraints: cons, ..prior.clone() };
    let mut out = enumerate_posterior(refine, &reduced, limit)?;
    if reduced.constraints.free_groups().is_empty() {
        out.warnings.push("every group was screened out; only the null model remains".into());
    }
    Ok(out)
}
