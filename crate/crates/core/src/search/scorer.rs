use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use parking_lot::RwLock;

use crate::data_model::{ModelId, SuffStatsCache};
use crate::error::Result;
use crate::marginal::{
    exact_gaussian_marginal, CachedAla, Dispersion, ExpansionVariant, MarginalScore, Method, ModelProblem,
};
use crate::priors::ParamPriorSpec;

/// Anything that assigns a log integrated likelihood to a model.
pub trait ModelScorer: Sync {
    fn group_sizes(&self) -> Vec<usize>;
    fn score(&self, model: &ModelId) -> Result<MarginalScore>;
    fn method(&self) -> Method;
}

impl ModelScorer for CachedAla {
    fn group_sizes(&self) -> Vec<usize> {
        self.cache().design().group_sizes()
    }

    fn score(&self, model: &ModelId) -> Result<MarginalScore> {
        CachedAla::score(self, model)
    }

    fn method(&self) -> Method {
        if self.curvature().is_some() { Method::AlaCurvAdj } else { Method::Ala }
    }
}

/// Per-model routes that work from raw data rather than the cache.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProblemEngine {
    Ala(ExpansionVariant),
    Refined(u32, ExpansionVariant),
    La,
    LaGmomDirect,
}

#[derive(Clone, Debug)]
pub struct ProblemScorer {
    pub problem: ModelProblem,
    pub engine: ProblemEngine,
}

impl ModelScorer for ProblemScorer {
    fn group_sizes(&self) -> Vec<usize> {
        self.problem.design.group_sizes()
    }

    fn score(&self, model: &ModelId) -> Result<MarginalScore> {
        match self.engine {
            ProblemEngine::Ala(v) => self.problem.ala(model, v),
            ProblemEngine::Refined(k, v) => self.problem.ala_refined(model, k, v),
            ProblemEngine::La => self.problem.la(model),
            ProblemEngine::LaGmomDirect => self.problem.la_gmom_direct(model),
        }
    }

    fn method(&self) -> Method {
        match self.engine {
            ProblemEngine::Ala(_) => Method::Ala,
            ProblemEngine::Refined(k, _) => Method::AlaRefined(k),
            ProblemEngine::La | ProblemEngine::LaGmomDirect => Method::La,
        }
    }
}

/// Closed-form Gaussian scorer.
#[derive(Clone, Debug)]
pub struct ExactScorer {
    pub cache: Arc<SuffStatsCache>,
    pub prior: ParamPriorSpec,
    pub dispersion: Dispersion,
}

impl ModelScorer for ExactScorer {
    fn group_sizes(&self) -> Vec<usize> {
        self.cache.design().group_sizes()
    }

    fn score(&self, model: &ModelId) -> Result<MarginalScore> {
        exact_gaussian_marginal(model, &self.cache, &self.prior, self.dispersion)
    }

    fn method(&self) -> Method {
        Method::ExactGaussian
    }
}

/// Memoized outcome for one model. Failures keep their message and score `−∞`.
#[derive(Clone, Debug)]
pub enum Scored {
    Ok(Arc<MarginalScore>),
    Failed(String),
}

impl Scored {
    pub fn log_ml(&self) -> f64 {
        match self {
            Scored::Ok(s) => s.log_ml,
            Scored::Failed(_) => f64::NEG_INFINITY,
        }
    }
}

/// Unbounded, thread-safe score memo in front of a scorer.
pub struct ScoreMemo<'a> {
    scorer: &'a dyn ModelScorer,
    map: RwLock<HashMap<ModelId, Scored>>,
    evaluations: AtomicUsize,
}

impl<'a> ScoreMemo<'a> {
    pub fn new(scorer: &'a dyn ModelScorer) -> Self {
        Self { scorer, map: RwLock::new(HashMap::new()), evaluations: AtomicUsize::new(0) }
    }

    pub fn scorer(&self) -> &dyn ModelScorer {
        self.scorer
    }

    pub fn get(&self, model: &ModelId) -> Scored {
        if let Some(s) = self.map.read().get(model) {
            return s.clone();
        }
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let s = match self.scorer.score(model) {
            Ok(v) if v.log_ml.is_nan() => Scored::Failed("score is NaN".into()),
            Ok(v) => Scored::Ok(Arc::new(v)),
            Err(e) => Scored::Failed(e.to_string()),
        };
        self.map.write().entry(model.clone()).or_insert(s).clone()
    }

    pub fn log_ml(&self, model: &ModelId) -> f64 {
        self.get(model).log_ml()
    }

    /// Number of calls that reached the underlying scorer.
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.map.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Models whose scoring failed, with the error message.
    pub fn failures(&self) -> Vec<(ModelId, String)> {
        let mut v: Vec<_> = self
            .map
            .read()
            .iter()
            .filter_map(|(m, s)| match s {
                Scored::Failed(msg) => Some((m.clone(), msg.clone())),
                Scored::Ok(_) => None,
            })
            .collect();
        v.sort();
        v
    }
}
