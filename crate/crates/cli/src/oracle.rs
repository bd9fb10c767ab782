//! Numerical reference values for a single model.

use std::path::PathBuf;

use clap::Args;
use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Value};

use ala_core::data_model::ModelId;
use ala_core::families::Family;
use ala_core::marginal::{
    importance_log_marginal, la_fit, log_integrate_1d, log_integrate_2d, InnerBracket, Likelihood, LogPrior,
    ModelProblem, NewtonOptions, QuadOptions,
};

use crate::config::{DataArgs, MethodArg, ModelArgs, Problem};
use crate::error::{CliError, CliResult};
use crate::output::{config_hash, write_json, VERSION};

#[derive(Args, Clone, Debug, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Model as one 0/1 character per group, in group order.
    #[arg(long = "model")]
    pub gamma: String,
    /// Monte Carlo draws from the t proposal.
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: usize,
    /// Degrees of freedom of the t proposal.
    #[arg(long, default_value_t = 5.0)]
    pub dof: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn outcome(r: CliResult<f64>) -> Value {
    match r {
        Ok(v) => json!({ "log_ml": v }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn log_target(lik: &dyn Likelihood, prior: &dyn LogPrior, eta: &DVector<f64>) -> f64 {
    if !lik.in_domain(eta) {
        return f64::NEG_INFINITY;
    }
    lik.loglik(eta).map_or(f64::NEG_INFINITY, |l| l + prior.log_density(eta))
}

/// Quadrature in one or two dimensions, bracketed by the Laplace fit.
fn quadrature(lik: &dyn Likelihood, prior: &dyn LogPrior, mode: &DVector<f64>, cov: &nalgebra::DMatrix<f64>) -> Value {
    let opts = QuadOptions::default();
    let res = match mode.len() {
        1 => {
            let f = |x: f64| log_target(lik, prior, &DVector::from_element(1, x));
            log_integrate_1d(&f, mode[0], cov[(0, 0)].sqrt(), opts)
        }
        2 => {
            let f = |a: f64, b: f64| log_target(lik, prior, &DVector::from_vec(vec![a, b]));
            let (m0, m1, c) = (mode[0], mode[1], cov.clone());
            let center = move |a: f64| m1 + c[(1, 0)] / c[(0, 0)] * (a - m0);
            let inner_sd = (cov[(1, 1)] - cov[(1, 0)].powi(2) / cov[(0, 0)]).sqrt();
            log_integrate_2d(&f, m0, cov[(0, 0)].sqrt(), InnerBracket { center: &center, scale: inner_sd }, opts)
        }
        _ => return Value::Null,
    };
    match res {
        Ok(q) => json!({ "log_ml": q.log_value, "rel_error": q.rel_error }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn run(args: &OracleArgs) -> CliResult<()> {
    let problem = Problem::load(&args.data, &args.model)?;
    let sizes = problem.design.group_sizes();
    let gamma = ModelId::parse(&args.gamma, &sizes).ok_or_else(|| {
        CliError::Config(format!("`--model {}` must have one 0/1 character for each of the {} groups", args.gamma, sizes.len()))
    })?;

    let score = |m: MethodArg| -> CliResult<f64> { Ok(problem.scorer(&args.model, m)?.score(&gamma)?.log_ml) };
    let mut scores = serde_json::Map::new();
    scores.insert("ala".into(), outcome(score(MethodArg::Ala)));
    scores.insert("la".into(), outcome(score(MethodArg::La)));
    if matches!(problem.family, Family::GaussianKnownPhi(_) | Family::GaussianUnknownPhi) {
        scores.insert("exact".into(), outcome(score(MethodArg::Exact)));
    }

    let mp = ModelProblem::new(problem.design.clone(), problem.response.clone(), problem.family, args.model.param_prior()?)?;
    let (lik, prior) = mp.integrand(&gamma)?;
    let start = mp.la(&gamma)?.mode;
    let fit = la_fit(lik.as_ref(), &prior, &start, NewtonOptions::default())?;
    let mc = importance_log_marginal(lik.as_ref(), &prior, &fit.mode, &(&fit.cov * 1.5), args.dof, args.draws, args.seed);

    let report = json!({
        "version": VERSION,
        "seed": args.seed,
        "config_hash": config_hash(args),
        "model": gamma.bit_string(),
        "dim": fit.mode.len(),
        "scores": scores,
        "laplace_full_prior": { "log_ml": fit.log_ml, "mode": fit.mode.as_slice() },
        "quadrature": quadrature(lik.as_ref(), &prior, &fit.mode, &fit.cov),
        "monte_carlo": match mc {
            Ok(m) => json!({ "log_ml": m.log_value, "rel_std_error": m.rel_std_error, "draws": m.draws }),
            Err(e) => json!({ "error": e.to_string() }),
        },
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    Ok(())
}
