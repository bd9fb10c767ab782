//! Posterior over models: enumeration, Gibbs sampling under constraints,
//! importance reweighting and screening.

mod gibbs;
mod importance;
mod posterior;
mod scorer;

pub use gibbs::{gibbs_models, GibbsOptions};
pub use importance::{importance_reweight, screen_then_refine, ImportanceReport};
pub use posterior::{enumerate_posterior, sample_from_summary, ModelEntry, PosteriorSummary, SearchMethod};
pub use scorer::{ExactScorer, ModelScorer, ProblemEngine, ProblemScorer, ScoreMemo, Scored};
