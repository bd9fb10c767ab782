use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::posterior::{inclusion_from, sort_entries, ModelEntry, PosteriorSummary, SearchMethod};
use super::scorer::ScoreMemo;
use crate::data_model::ModelId;
use crate::error::{Error, Result};
use crate::priors::ModelPriorSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GibbsOptions {
    pub n_scans: usize,
    pub seed: u64,
    /// Fraction of scans discarded as burn-in.
    pub burn_in_fraction: f64,
}

impl GibbsOptions {
    pub fn new(n_scans: usize, seed: u64) -> Self {
        Self { n_scans, seed, burn_in_fraction: 0.1 }
    }

    pub fn burn_in(&self) -> usize {
        ((self.n_scans as f64 * self.burn_in_fraction).floor() as usize).min(self.n_scans)
    }
}

/// Systematic-scan Gibbs sampler over groups. Each free group is drawn from its
/// full conditional; states outside the constrained space have zero mass, so a
/// child cannot switch on while a parent is off and a parent cannot switch off
/// while a child is on.
pub fn gibbs_models(memo: &ScoreMemo<'_>, prior: &ModelPriorSpec, opts: GibbsOptions) -> Result<PosteriorSummary> {
    let sizes = memo.scorer().group_sizes();
    let cons = &prior.constraints;
    let n_groups = sizes.len();
    if n_groups != cons.n_groups() {
        return Err(Error::Dimension("model prior and scorer disagree on the number of groups".into()));
    }
    let mut state = ModelId::empty(n_groups);
    for j in 0..n_groups {
        if cons.is_forced(j) {
            state.set(j, true, &sizes);
        }
    }
    if !cons.allows(&state) {
        return Err(Error::InvalidModel { model: state.to_string() });
    }
    let free = cons.free_groups();
    let burn_in = opts.burn_in();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let log_post = |m: &ModelId| -> f64 {
        let lp = prior.log_unnormalized(m);
        if lp == f64::NEG_INFINITY { lp } else { memo.log_ml(m) + lp }
    };
    let mut current = log_post(&state);
    let mut visits: HashMap<ModelId, usize> = HashMap::new();
    let mut rb = vec![0.0; n_groups];
    let mut violations = 0usize;
    for scan in 0..opts.n_scans {
        let keep = scan >= burn_in;
        for &j in &free {
            let flipped = state.with(j, !state.contains(j), &sizes);
            let other = log_post(&flipped);
            let (w_on, w_off) = if state.contains(j) { (current, other) } else { (other, current) };
            let p_on = if w_on == f64::NEG_INFINITY && w_off == f64::NEG_INFINITY {
                if state.contains(j) { 1.0 } else { 0.0 }
            } else {
                1.0 / (1.0 + (w_off - w_on).exp())
            };
            if keep {
                rb[j] += p_on;
            }
            let on = rng.random::<f64>() < p_on;
            if on != state.contains(j) {
                state = flipped;
                current = other;
            }
        }
        if !cons.allows(&state) {
            violations += 1;
        }
        debug_assert!(cons.allows(&state), "Gibbs visited a disallowed state {state}");
        if keep {
            *visits.entry(state.clone()).or_insert(0) += 1;
        }
    }
    let kept = opts.n_scans - burn_in;
    for (j, v) in rb.iter_mut().enumerate() {
        if cons.is_forced(j) {
            *v = 1.0;
        } else if kept > 0 {
            *v /= kept as f64;
        }
    }
    let mut models: Vec<ModelEntry> = visits
        .into_iter()
        .map(|(model, c)| ModelEntry {
            log_ml: memo.log_ml(&model),
            log_prior: prior.log_unnormalized(&model),
            prob: c as f64 / kept as f64,
            visits: Some(c),
            model,
        })
        .collect();
    sort_entries(&mut models);
    let inclusion = inclusion_from(&models, n_groups);
    let mut warnings = Vec::new();
    if kept == 0 {
        warnings.push("no scans after burn-in".into());
    }
    Ok(PosteriorSummary {
        models,
        inclusion,
        inclusion_rb: Some(rb),
        method: SearchMethod::Gibbs { n_scans: opts.n_scans, burn_in, seed: opts.seed },
        scoring: memo.scorer().method(),
        failed: memo.failures(),
        violations,
        warnings,
    })
}
