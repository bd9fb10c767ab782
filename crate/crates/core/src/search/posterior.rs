use rand::Rng;
use rayon::prelude::*;

use super::scorer::ScoreMemo;
use crate::data_model::{enumerate_models, ModelId};
use crate::error::{Error, Result};
use crate::linalg::log_sum_exp;
use crate::marginal::Method;
use crate::priors::ModelPriorSpec;

/// How a posterior summary was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMethod {
    Enumerate,
    Gibbs { n_scans: usize, burn_in: usize, seed: u64 },
}

impl SearchMethod {
    pub fn label(&self) -> String {
        match self {
            SearchMethod::Enumerate => "enumerate".into(),
            SearchMethod::Gibbs { n_scans, seed, .. } => format!("gibbs({n_scans},{seed})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelEntry {
    pub model: ModelId,
    /// Log integrated likelihood (`−∞` when scoring failed).
    pub log_ml: f64,
    pub log_prior: f64,
    /// Normalized posterior probability (enumeration) or visit frequency (Gibbs).
    pub prob: f64,
    /// Post burn-in visits (Gibbs only).
    pub visits: Option<usize>,
}

/// Posterior over models and groups.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorSummary {
    /// Sorted by decreasing probability, ties by model order.
    pub models: Vec<ModelEntry>,
    /// Marginal inclusion probabilities (enumerated, or visit frequencies for Gibbs).
    pub inclusion: Vec<f64>,
    /// Rao–Blackwellized inclusion probabilities (Gibbs only).
    pub inclusion_rb: Option<Vec<f64>>,
    pub method: SearchMethod,
    pub scoring: Method,
    pub failed: Vec<(ModelId, String)>,
    /// Visited states outside the constrained space (always expected to be 0).
    pub violations: usize,
    pub warnings: Vec<String>,
}

impl PosteriorSummary {
    /// Highest-probability model; `None` only for an empty Gibbs run.
    pub fn top(&self) -> Option<&ModelEntry> {
        self.models.first()
    }

    pub fn prob_of(&self, model: &ModelId) -> f64 {
        self.models.iter().find(|e| &e.model == model).map_or(0.0, |e| e.prob)
    }

    pub fn n_groups(&self) -> usize {
        self.inclusion.len()
    }
}

pub(crate) fn sort_entries(models: &mut [ModelEntry]) {
    models.sort_by(|a, b| b.prob.total_cmp(&a.prob).then_with(|| a.model.cmp(&b.model)));
}

pub(crate) fn inclusion_from(models: &[ModelEntry], n_groups: usize) -> Vec<f64> {
    let mut inc = vec![0.0; n_groups];
    for e in models {
        for j in e.model.active() {
            inc[j] += e.prob;
        }
    }
    inc
}

/// Exact posterior over every model allowed by the prior's constraints.
pub fn enumerate_posterior(memo: &ScoreMemo<'_>, prior: &ModelPriorSpec, limit: usize) -> Result<PosteriorSummary> {
    let sizes = memo.scorer().group_sizes();
    if sizes.len() != prior.constraints.n_groups() {
        return Err(Error::Dimension("model prior and scorer disagree on the number of groups".into()));
    }
    let models = enumerate_models(&sizes, &prior.constraints, limit)?;
    let scored: Vec<(f64, f64)> =
        models.par_iter().map(|m| (memo.log_ml(m), prior.log_unnormalized(m))).collect();
    let logs: Vec<f64> = scored.iter().map(|(l, p)| l + p).collect();
    let norm = log_sum_exp(&logs);
    let mut warnings = Vec::new();
    let mut entries: Vec<ModelEntry> = models
        .into_iter()
        .zip(scored)
        .zip(&logs)
        .map(|((model, (log_ml, log_prior)), lp)| ModelEntry {
            model,
            log_ml,
            log_prior,
            prob: if norm.is_finite() { (lp - norm).exp() } else { 0.0 },
            visits: None,
        })
        .collect();
    if !norm.is_finite() {
        warnings.push("no model received a finite score".into());
    }
    sort_entries(&mut entries);
    let inclusion = inclusion_from(&entries, sizes.len());
    Ok(PosteriorSummary {
        models: entries,
        inclusion,
        inclusion_rb: None,
        method: SearchMethod::Enumerate,
        scoring: memo.scorer().method(),
        failed: memo.failures(),
        violations: 0,
        warnings,
    })
}

/// `draws` independent models from the summary's probabilities, returned as
/// distinct models with multiplicities in summary order.
pub fn sample_from_summary<R: Rng + ?Sized>(summary: &PosteriorSummary, draws: usize, rng: &mut R) -> Vec<(ModelId, usize)> {
    let mut cdf = Vec::with_capacity(summary.models.len());
    let mut acc = 0.0;
    for e in &summary.models {
        acc += e.prob;
        cdf.push(acc);
    }
    let mut counts = vec![0usize; summary.models.len()];
    for _ in 0..draws {
        let u = rng.random::<f64>() * acc;
        let i = cdf.partition_point(|c| *c <= u).min(counts.len() - 1);
        counts[i] += 1;
    }
    summary
        .models
        .iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|(e, c)| (e.model.clone(), c))
        .collect()
}
