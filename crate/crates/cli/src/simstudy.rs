//! Replicated simulation studies over the built-in designs.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use ala_core::data_model::{build_cache, Center, DEFAULT_ENUMERATION_LIMIT};
use ala_core::marginal::{AlaSettings, CachedAla, Dispersion, ExpansionVariant, ModelProblem, Response};
use ala_core::priors::{ModelPriorSpec, ParamPriorSpec};
use ala_core::search::{enumerate_posterior, ExactScorer, ModelScorer, ProblemEngine, ProblemScorer, ScoreMemo};
use ala_core::sim::{simulate, SimData, SimDesign};

use crate::error::{CliError, CliResult};
use crate::output::{config_hash, write_csv, write_json, VERSION};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DesignArg {
    /// Logistic, `p` equicorrelated covariates, two active.
    #[value(name = "logistic-fig2")]
    #[serde(rename = "logistic-fig2")]
    LogisticFig2,
    /// Poisson version of the logistic design.
    #[value(name = "poisson-figS1")]
    #[serde(rename = "poisson-figS1")]
    PoissonFigS1,
    /// Gaussian, gMOM prior, 10 covariates; errors against the closed form.
    #[value(name = "gmom-accuracy-fig3")]
    #[serde(rename = "gmom-accuracy-fig3")]
    GmomAccuracyFig3,
    /// Log-normal AFT truth with linear and spline groups.
    #[value(name = "aft-scenario1")]
    #[serde(rename = "aft-scenario1")]
    AftScenario1,
    /// Proportional-hazards truth with linear and spline groups.
    #[value(name = "aft-scenario2")]
    #[serde(rename = "aft-scenario2")]
    AftScenario2,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMethod {
    /// ALA with the family's default curvature setting.
    Ala,
    /// ALA without the curvature adjustment (GLM designs).
    AlaUnadjusted,
    /// ALA after `--steps` Newton steps.
    AlaRefined,
    /// Laplace approximation (gMOM design: of the full non-local integrand).
    La,
    /// Closed form (Gaussian design).
    Exact,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct SimstudyArgs {
    #[arg(long, value_enum)]
    pub design: DesignArg,
    #[arg(long, default_value_t = 50)]
    pub replicates: usize,
    /// Sample size; defaults to 50 for the gMOM design and 1000 otherwise.
    #[arg(long)]
    pub n: Option<usize>,
    /// Replicate r uses seed + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Covariates in the logistic and Poisson designs.
    #[arg(long, default_value_t = 10)]
    pub p: usize,
    /// Covariates in the AFT designs.
    #[arg(long, default_value_t = 5)]
    pub covariates: usize,
    /// Random correlation matrix for the gMOM design.
    #[arg(long)]
    pub correlated: bool,
    /// Methods to run; defaults depend on the design.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Vec<SimMethod>,
    /// Newton steps for `ala-refined`.
    #[arg(long, default_value_t = 1)]
    pub steps: u32,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

impl SimstudyArgs {
    fn sim_design(&self) -> SimDesign {
        match self.design {
            DesignArg::LogisticFig2 => SimDesign::LogisticTrend { p: self.p },
            DesignArg::PoissonFigS1 => SimDesign::PoissonTrend { p: self.p },
            DesignArg::GmomAccuracyFig3 => SimDesign::GmomAccuracy { correlated: self.correlated },
            DesignArg::AftScenario1 => SimDesign::AftScenario1 { covariates: self.covariates },
            DesignArg::AftScenario2 => SimDesign::AftScenario2 { covariates: self.covariates },
        }
    }

    fn n(&self) -> usize {
        self.n.unwrap_or(if self.design == DesignArg::GmomAccuracyFig3 { 50 } else { 1000 })
    }

    fn methods(&self) -> Vec<SimMethod> {
        if !self.methods.is_empty() {
            return self.methods.clone();
        }
        match self.design {
            DesignArg::LogisticFig2 => vec![SimMethod::Ala],
            DesignArg::PoissonFigS1 => vec![SimMethod::Ala, SimMethod::AlaUnadjusted],
            DesignArg::GmomAccuracyFig3 => vec![SimMethod::Ala, SimMethod::La],
            DesignArg::AftScenario1 | DesignArg::AftScenario2 => vec![SimMethod::Ala, SimMethod::La],
        }
    }

    fn param_prior(&self) -> ParamPriorSpec {
        match self.design {
            DesignArg::GmomAccuracyFig3 => ParamPriorSpec::gmom(1.0),
            DesignArg::AftScenario1 | DesignArg::AftScenario2 => {
                ParamPriorSpec::group_zellner(1.0).with_phi_prior(Default::default())
            }
            _ => ParamPriorSpec::group_zellner(1.0),
        }
    }
}

fn scorer(args: &SimstudyArgs, sim: &SimData, method: SimMethod) -> CliResult<Box<dyn ModelScorer>> {
    let prior = args.param_prior();
    let gaussian = args.design == DesignArg::GmomAccuracyFig3;
    let problem = || ModelProblem::new(sim.design.clone(), sim.response.clone(), sim.family, prior);
    let cached = |curvature: bool, variant: ExpansionVariant| -> CliResult<Box<dyn ModelScorer>> {
        let Response::Glm(y) = &sim.response else {
            return Err(CliError::Config(format!("{method:?} needs a GLM design")));
        };
        let center = if curvature { Center::InterceptMle } else { Center::Zero };
        let cache = Arc::new(build_cache(sim.design.clone(), y, &sim.family, center)?);
        let settings = AlaSettings { variant, curvature };
        Ok(Box::new(CachedAla::new(cache, sim.family, prior, settings)?))
    };
    Ok(match (method, &sim.response) {
        // the log-joint expansion integrates the Normal kernel exactly
        (SimMethod::Ala, Response::Glm(_)) if gaussian => cached(false, ExpansionVariant::LogJoint)?,
        (SimMethod::Ala, Response::Glm(_)) => cached(sim.family.default_curvature(), ExpansionVariant::Likelihood)?,
        (SimMethod::Ala, Response::Survival(_)) => {
            Box::new(ProblemScorer { problem: problem()?, engine: ProblemEngine::Ala(ExpansionVariant::Likelihood) })
        }
        (SimMethod::AlaUnadjusted, _) => cached(false, ExpansionVariant::Likelihood)?,
        (SimMethod::AlaRefined, _) => Box::new(ProblemScorer {
            problem: problem()?,
            engine: ProblemEngine::Refined(args.steps, ExpansionVariant::Likelihood),
        }),
        (SimMethod::La, _) if gaussian => Box::new(ProblemScorer { problem: problem()?, engine: ProblemEngine::LaGmomDirect }),
        (SimMethod::La, _) => Box::new(ProblemScorer { problem: problem()?, engine: ProblemEngine::La }),
        (SimMethod::Exact, Response::Glm(y)) if gaussian => {
            let phi = sim.family.known_phi().expect("known dispersion");
            let cache = Arc::new(build_cache(sim.design.clone(), y, &sim.family, Center::Zero)?);
            Box::new(ExactScorer { cache, prior, dispersion: Dispersion::Known(phi) })
        }
        (SimMethod::Exact, _) => return Err(CliError::Config("`exact` is only available for the gMOM design".into())),
    })
}

struct MethodResult {
    method: SimMethod,
    models: usize,
    failed: usize,
    correct: bool,
    top_model: String,
    incl_active: f64,
    incl_inactive: f64,
    /// Mean absolute log-score error against the oracle, if there is one.
    abs_error: Option<f64>,
    /// Count, summed error and summed |error| by number of free groups.
    by_size: BTreeMap<usize, (usize, f64, f64)>,
    seconds: f64,
}

struct Replicate {
    index: usize,
    seed: u64,
    true_model: String,
    methods: Vec<MethodResult>,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = v.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 { f64::NAN } else { s / k as f64 }
}

fn run_replicate(args: &SimstudyArgs, index: usize) -> CliResult<Replicate> {
    let seed = args.seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sim = simulate(args.sim_design(), args.n(), &mut rng)?;
    let prior = ModelPriorSpec::new(0.0, sim.design.p(), sim.constraints.clone());
    let free: Vec<usize> = sim.constraints.free_groups();
    let sizes = sim.design.group_sizes();
    let truth = ala_core::data_model::ModelId::from_bits(&sim.active, &sizes);

    let oracle = if args.design == DesignArg::GmomAccuracyFig3 { Some(scorer(args, &sim, SimMethod::Exact)?) } else { None };
    let oracle_memo = oracle.as_ref().map(|s| ScoreMemo::new(s.as_ref()));

    let mut methods = Vec::new();
    for method in args.methods() {
        let s = scorer(args, &sim, method)?;
        let memo = ScoreMemo::new(s.as_ref());
        let t = Instant::now();
        let post = enumerate_posterior(&memo, &prior, DEFAULT_ENUMERATION_LIMIT)?;
        let seconds = t.elapsed().as_secs_f64();
        let top = post.top().map(|e| e.model.clone());
        let mut by_size = BTreeMap::new();
        let abs_error = oracle_memo.as_ref().map(|om| {
            let errs: Vec<f64> = post
                .models
                .iter()
                .filter(|e| e.log_ml.is_finite())
                .map(|e| {
                    let err = e.log_ml - om.log_ml(&e.model);
                    let entry = by_size.entry(sim.constraints.free_size(&e.model)).or_insert((0, 0.0, 0.0));
                    entry.0 += 1;
                    entry.1 += err;
                    entry.2 += err.abs();
                    err.abs()
                })
                .collect();
            mean(errs.into_iter())
        });
        methods.push(MethodResult {
            method,
            models: memo.evaluations(),
            failed: post.failed.len(),
            correct: top.as_ref() == Some(&truth),
            top_model: top.map(|m| m.bit_string()).unwrap_or_default(),
            incl_active: mean(free.iter().filter(|&&j| sim.active[j]).map(|&j| post.inclusion[j])),
            incl_inactive: mean(free.iter().filter(|&&j| !sim.active[j]).map(|&j| post.inclusion[j])),
            abs_error,
            by_size,
            seconds,
        });
    }
    Ok(Replicate { index, seed, true_model: truth.bit_string(), methods })
}

fn fmt(v: f64) -> String {
    if v.is_nan() { String::new() } else { v.to_string() }
}

fn label(m: SimMethod) -> String {
    m.to_possible_value().expect("not skipped").get_name().to_string()
}

#[derive(Serialize)]
struct Meta<'a> {
    version: &'static str,
    seed: u64,
    config_hash: String,
    config: &'a SimstudyArgs,
    n: usize,
    threads: usize,
    total_seconds: f64,
}

pub fn run(args: &SimstudyArgs) -> CliResult<()> {
    let start = Instant::now();
    let reps: Vec<Replicate> =
        (0..args.replicates).into_par_iter().map(|r| run_replicate(args, r)).collect::<CliResult<_>>()?;

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let design = args.design.to_possible_value().expect("not skipped").get_name().to_string();

    let header = [
        "design",
        "replicate",
        "seed",
        "n",
        "method",
        "models",
        "failed",
        "true_model",
        "top_model",
        "correct_selection",
        "mean_inclusion_active",
        "mean_inclusion_inactive",
        "mean_abs_log_error",
        "seconds",
        "seconds_per_model",
    ];
    let mut rows = Vec::new();
    let mut size_rows = Vec::new();
    for rep in &reps {
        for m in &rep.methods {
            rows.push(vec![
                design.clone(),
                rep.index.to_string(),
                rep.seed.to_string(),
                args.n().to_string(),
                label(m.method),
                m.models.to_string(),
                m.failed.to_string(),
                rep.true_model.clone(),
                m.top_model.clone(),
                u8::from(m.correct).to_string(),
                fmt(m.incl_active),
                fmt(m.incl_inactive),
                m.abs_error.map(fmt).unwrap_or_default(),
                m.seconds.to_string(),
                (m.seconds / m.models.max(1) as f64).to_string(),
            ]);
            for (size, (k, e, a)) in &m.by_size {
                size_rows.push(vec![
                    rep.index.to_string(),
                    label(m.method),
                    size.to_string(),
                    k.to_string(),
                    (e / *k as f64).to_string(),
                    (a / *k as f64).to_string(),
                ]);
            }
        }
    }
    write_csv(&args.out.join("replicates.csv"), &header, &rows)?;
    write_csv(
        &args.out.join("errors_by_size.csv"),
        &["replicate", "method", "size", "models", "mean_log_error", "mean_abs_log_error"],
        &size_rows,
    )?;

    let mut agg = Vec::new();
    let mut agg_size = Vec::new();
    if !reps.is_empty() {
        for (k, method) in args.methods().into_iter().enumerate() {
            let ms: Vec<&MethodResult> = reps.iter().map(|r| &r.methods[k]).collect();
            agg.push(vec![
                design.clone(),
                label(method),
                ms.len().to_string(),
                fmt(mean(ms.iter().map(|m| f64::from(u8::from(m.correct))))),
                fmt(mean(ms.iter().map(|m| m.incl_active).filter(|v| !v.is_nan()))),
                fmt(mean(ms.iter().map(|m| m.incl_inactive).filter(|v| !v.is_nan()))),
                fmt(mean(ms.iter().filter_map(|m| m.abs_error))),
                fmt(mean(ms.iter().map(|m| m.seconds / m.models.max(1) as f64))),
            ]);
            let mut pooled: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
            for m in &ms {
                for (size, (c, e, a)) in &m.by_size {
                    pooled.entry(*size).or_default().push((e / *c as f64, a / *c as f64));
                }
            }
            for (size, v) in pooled {
                agg_size.push(vec![
                    label(method),
                    size.to_string(),
                    v.len().to_string(),
                    fmt(mean(v.iter().map(|x| x.0))),
                    fmt(mean(v.iter().map(|x| x.1))),
                ]);
            }
        }
    }
    write_csv(
        &args.out.join("aggregate.csv"),
        &[
            "design",
            "method",
            "replicates",
            "correct_selection_rate",
            "mean_inclusion_active",
            "mean_inclusion_inactive",
            "mean_abs_log_error",
            "mean_seconds_per_model",
        ],
        &agg,
    )?;
    write_csv(
        &args.out.join("aggregate_by_size.csv"),
        &["method", "size", "replicates", "mean_log_error", "mean_abs_log_error"],
        &agg_size,
    )?;
    let meta = Meta {
        version: VERSION,
        seed: args.seed,
        config_hash: config_hash(args),
        config: args,
        n: args.n(),
        threads: rayon::current_num_threads(),
        total_seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&args.out.join("meta.json"), &meta)
}
