use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;

use ala_core::data_model::DEFAULT_ENUMERATION_LIMIT;
use ala_core::search::{enumerate_posterior, gibbs_models, screen_then_refine, GibbsOptions, PosteriorSummary, ScoreMemo};

use crate::config::{DataArgs, MethodArg, ModelArgs, Problem};
use crate::error::{CliError, CliResult};
use crate::ingest::export;
use crate::output::{config_hash, write_inclusion, write_json, write_models, VERSION};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchArg {
    /// Score every model in the constrained space.
    Enumerate,
    /// Single-site Gibbs sampling over groups.
    Gibbs,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = SearchArg::Enumerate)]
    pub search: SearchArg,
    /// Gibbs scans.
    #[arg(long, default_value_t = 10_000)]
    pub scans: usize,
    /// Gibbs seed (always recorded).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fraction of Gibbs scans discarded as burn-in.
    #[arg(long, default_value_t = 0.1)]
    pub burn_in: f64,
    /// Screen with the ALA first, keep groups whose inclusion exceeds this
    /// value, then rescore the reduced space with `--method`.
    #[arg(long)]
    pub screen: Option<f64>,
    /// Largest number of free groups for enumeration.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
    pub enum_limit: usize,
    /// Output directory for models.csv, inclusion.csv and meta.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the parsed design back out, in input format, to this directory.
    #[arg(long)]
    pub export_design: Option<PathBuf>,
}

#[derive(Serialize)]
struct FailedModel {
    model: String,
    error: String,
}

#[derive(Serialize)]
struct Timings {
    ingest_seconds: f64,
    setup_seconds: f64,
    search_seconds: f64,
    total_seconds: f64,
}

#[derive(Serialize)]
struct Meta<'a> {
    version: &'static str,
    seed: u64,
    config_hash: String,
    config: &'a SelectArgs,
    family: &'static str,
    method: String,
    search: String,
    rho_hat: Option<f64>,
    phi0: Option<f64>,
    n: usize,
    p: usize,
    groups: usize,
    group_sizes: Vec<usize>,
    models_scored: usize,
    failed: Vec<FailedModel>,
    violations: usize,
    warnings: Vec<String>,
    threads: usize,
    timings: Timings,
}

fn search(args: &SelectArgs, memo: &ScoreMemo<'_>, prior: &ala_core::priors::ModelPriorSpec) -> CliResult<PosteriorSummary> {
    Ok(match args.search {
        SearchArg::Enumerate => enumerate_posterior(memo, prior, args.enum_limit)?,
        SearchArg::Gibbs => {
            if !(0.0..1.0).contains(&args.burn_in) {
                return Err(CliError::Config(format!("burn-in fraction {} is outside [0, 1)", args.burn_in)));
            }
            let opts = GibbsOptions { burn_in_fraction: args.burn_in, ..GibbsOptions::new(args.scans, args.seed) };
            gibbs_models(memo, prior, opts)?
        }
    })
}

pub fn run(args: &SelectArgs) -> CliResult<()> {
    let start = Instant::now();
    let problem = Problem::load(&args.data, &args.model)?;
    let prior = problem.model_prior(&args.model)?;
    if let Some(dir) = &args.export_design {
        export(&problem.dataset, &args.data.response, args.data.status.as_deref(), dir)?;
    }
    let t_ingest = start.elapsed().as_secs_f64();

    let scorer = problem.scorer(&args.model, args.model.method)?;
    let memo = ScoreMemo::new(scorer.as_ref());
    let t_setup = start.elapsed().as_secs_f64();

    let (post, scored) = match args.screen {
        None => {
            let post = search(args, &memo, &prior)?;
            (post, memo.evaluations())
        }
        Some(t) => {
            if !(0.0..=1.0).contains(&t) {
                return Err(CliError::Config(format!("screening threshold {t} is outside [0, 1]")));
            }
            let screener = problem.scorer(&args.model, MethodArg::Ala)?;
            let screen_memo = ScoreMemo::new(screener.as_ref());
            let screened = search(args, &screen_memo, &prior)?;
            let post = screen_then_refine(&screened, t, &memo, &prior, args.enum_limit)?;
            (post, screen_memo.evaluations() + memo.evaluations())
        }
    };
    let t_search = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    write_models(&args.out.join("models.csv"), &post)?;
    write_inclusion(&args.out.join("inclusion.csv"), &post, &problem.design, &problem.dataset.group_labels)?;
    let meta = Meta {
        version: VERSION,
        seed: args.seed,
        config_hash: config_hash(args),
        config: args,
        family: problem.family.name(),
        method: post.scoring.label(),
        search: post.method.label(),
        rho_hat: problem.rho_hat(&args.model)?,
        phi0: problem.phi0()?,
        n: problem.design.n(),
        p: problem.design.p(),
        groups: problem.design.n_groups(),
        group_sizes: problem.design.group_sizes(),
        models_scored: scored,
        failed: post.failed.iter().map(|(m, e)| FailedModel { model: m.bit_string(), error: e.clone() }).collect(),
        violations: post.violations,
        warnings: post.warnings.clone(),
        threads: rayon::current_num_threads(),
        timings: Timings {
            ingest_seconds: t_ingest,
            setup_seconds: t_setup - t_ingest,
            search_seconds: t_search - t_setup,
            total_seconds: start.elapsed().as_secs_f64(),
        },
    };
    write_json(&args.out.join("meta.json"), &meta)
}
