//! Parameter priors (group Zellner, gMOM, inverse-gamma dispersion) and the
//! model-space prior.

mod model;
mod param;

pub use model::{log_model_prior_ratio, ModelPriorSpec};
pub use param::{
    base_precision, group_blocks, log_gmom, log_gmom_penalty, log_gzellner, log_normal_blocks,
    precision_scale, GroupBlock, InvGamma, ParamPriorSpec, PriorKind,
};
