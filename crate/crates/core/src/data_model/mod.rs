//! Design matrices with group structure, model identifiers, model-space
//! constraints and the shared sufficient-statistics cache.

mod cache;
mod constraints;
mod design;
mod model_id;

pub use cache::{build_cache, Center, SuffStatsCache, TransformTag};
pub use constraints::{enumerate_models, ConstraintSet, DEFAULT_ENUMERATION_LIMIT};
pub use design::DesignMatrix;
pub use model_id::ModelId;
