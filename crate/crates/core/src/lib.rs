#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data_model;
pub mod error;
pub mod families;
pub mod linalg;
pub mod marginal;
pub mod priors;
pub mod search;
pub mod sim;

pub use error::{Error, Result};
