//! Data generators for the simulation designs, and the spline basis used to
//! code non-linear effects.

mod spline;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal, Poisson, StandardNormal};
use statrs::function::erf::erfc_inv;

use crate::data_model::{ConstraintSet, DesignMatrix};
use crate::error::{Error, Result};
use crate::families::{Family, SurvivalData};
use crate::marginal::Response;

pub use spline::{quantile, spline_deviation_basis};

/// A simulated dataset with its data-generating support.
#[derive(Clone, Debug)]
pub struct SimData {
    pub design: Arc<DesignMatrix>,
    pub response: Response,
    pub family: Family,
    /// Groups with a non-zero effect in the data-generating model.
    pub active: Vec<bool>,
    /// Forced and hierarchical restrictions that come with the design.
    pub constraints: ConstraintSet,
}

/// Simulation designs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimDesign {
    /// One N(0,1) covariate, logistic response with slope `beta`.
    LogisticSingle { beta: f64 },
    /// `p` equicorrelated (0.5) covariates, `β* = (0,…,0,0.5,1)`, logistic.
    LogisticTrend { p: usize },
    /// As `LogisticTrend` with a Poisson response.
    PoissonTrend { p: usize },
    /// Intercept column plus 9 equicorrelated covariates,
    /// `β* = (2, 0,…,0, 0.5, 1)`, logistic; optionally forcing the intercept.
    LogisticIntercept { force_intercept: bool },
    /// Forced intercept, 5 equicorrelated covariates and their squares,
    /// Poisson with `β₄* = 0.5`, `β₅* = 1`.
    PoissonQuadratic,
    /// Gaussian, `φ = 1`, 10 covariates, `β* = (0.4,0.6,1.2,0.8,0,…,0)`;
    /// independent covariates or a random correlation matrix.
    GmomAccuracy { correlated: bool },
    /// Log-normal AFT truth `x₁ + 0.5 log|x₂| + N(0, 0.5²)` for log-times, censoring time 0.5.
    /// Design: forced intercept, `covariates` linear groups and 5-column spline groups.
    AftScenario1 { covariates: usize },
    /// Proportional hazards truth `h₀(t) exp(3x₁/4 − 5 log|x₂|/4)` with a
    /// log-Normal(0, 0.5) baseline, censoring time 0.55. Same design as scenario 1.
    AftScenario2 { covariates: usize },
    /// Two-component mixture of logistic regressions on `p` equicorrelated covariates,
    /// supports `{1, 2}` and `{3, 4}`.
    LogisticMixture { p: usize },
}

impl SimDesign {
    pub fn name(&self) -> &'static str {
        match self {
            SimDesign::LogisticSingle { .. } => "logistic-single",
            SimDesign::LogisticTrend { .. } => "logistic-fig2",
            SimDesign::PoissonTrend { .. } => "poisson-figS1",
            SimDesign::LogisticIntercept { .. } => "logistic-intercept",
            SimDesign::PoissonQuadratic => "poisson-quadratic",
            SimDesign::GmomAccuracy { .. } => "gmom-accuracy-fig3",
            SimDesign::AftScenario1 { .. } => "aft-scenario1",
            SimDesign::AftScenario2 { .. } => "aft-scenario2",
            SimDesign::LogisticMixture { .. } => "logistic-mixture",
        }
    }
}

/// `n × p` draws with unit variances and common correlation `rho ∈ [0, 1)`.
pub fn equicorrelated_normal<R: Rng + ?Sized>(n: usize, p: usize, rho: f64, rng: &mut R) -> DMatrix<f64> {
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    let mut z = DMatrix::zeros(n, p);
    for i in 0..n {
        let common: f64 = rng.sample(StandardNormal);
        for j in 0..p {
            let e: f64 = rng.sample(StandardNormal);
            z[(i, j)] = a * common + b * e;
        }
    }
    z
}

/// `n` rows from `N(0, cov)`.
pub fn correlated_normal<R: Rng + ?Sized>(n: usize, cov: &DMatrix<f64>, rng: &mut R) -> Result<DMatrix<f64>> {
    let l = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Domain("covariance is not positive definite".into()))?
        .l();
    let p = cov.nrows();
    let e = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok(e * l.transpose())
}

/// Correlation matrix of `WᵀW` with `W` a `p × p` matrix of standard Normal entries.
pub fn random_correlation<R: Rng + ?Sized>(p: usize, rng: &mut R) -> DMatrix<f64> {
    let w = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let s = w.transpose() * w;
    DMatrix::from_fn(p, p, |i, j| s[(i, j)] / (s[(i, i)] * s[(j, j)]).sqrt())
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn bernoulli<R: Rng + ?Sized>(prob: f64, rng: &mut R) -> f64 {
    let d = Bernoulli::new(prob.clamp(0.0, 1.0)).expect("probability in [0, 1]");
    if d.sample(rng) { 1.0 } else { 0.0 }
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng)
}

/// Standard Normal quantile.
fn norm_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

fn singletons(values: DMatrix<f64>, names: Vec<String>) -> Result<DesignMatrix> {
    DesignMatrix::singletons(values).with_column_names(names)
}

fn names(prefix: &str, p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("{prefix}{j}")).collect()
}

fn active_from(beta: &[f64]) -> Vec<bool> {
    beta.iter().map(|b| *b != 0.0).collect()
}

/// Draws one dataset of size `n` from `design`.
pub fn simulate<R: Rng + ?Sized>(design: SimDesign, n: usize, rng: &mut R) -> Result<SimData> {
    match design {
        SimDesign::LogisticSingle { beta } => {
            let z = DMatrix::from_fn(n, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
            let y = DVector::from_fn(n, |i, _| bernoulli(logistic(beta * z[(i, 0)]), rng));
            Ok(SimData {
                design: Arc::new(singletons(z, names("z", 1))?),
                response: Response::Glm(y),
                family: Family::Logistic,
                active: vec![beta != 0.0],
                constraints: ConstraintSet::unconstrained(1),
            })
        }
        SimDesign::LogisticTrend { p } | SimDesign::PoissonTrend { p } => {
            if p < 2 {
                return Err(Error::Domain("trend designs need p ≥ 2".into()));
            }
            let z = equicorrelated_normal(n, p, 0.5, rng);
            let mut beta = vec![0.0; p];
            beta[p - 2] = 0.5;
            beta[p - 1] = 1.0;
            let eta = &z * DVector::from_column_slice(&beta);
            let (family, y) = if matches!(design, SimDesign::LogisticTrend { .. }) {
                (Family::Logistic, eta.map(|u| bernoulli(logistic(u), rng)))
            } else {
                (Family::Poisson, eta.map(|u| poisson(u.exp(), rng)))
            };
            Ok(SimData {
                design: Arc::new(singletons(z, names("z", p))?),
                response: Response::Glm(y),
                family,
                active: active_from(&beta),
                constraints: ConstraintSet::unconstrained(p),
            })
        }
        SimDesign::LogisticIntercept { force_intercept } => {
            let x = equicorrelated_normal(n, 9, 0.5, rng);
            let mut z = DMatrix::from_element(n, 10, 1.0);
            z.columns_mut(1, 9).copy_from(&x);
            let beta = [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 1.0];
            let eta = &z * DVector::from_column_slice(&beta);
            let y = eta.map(|u| bernoulli(logistic(u), rng));
            let mut cols = vec!["intercept".to_string()];
            cols.extend((2..=10).map(|j| format!("z{j}")));
            let mut d = singletons(z, cols)?;
            let mut cons = ConstraintSet::unconstrained(10);
            if force_intercept {
                d = d.with_intercept_group(0)?;
                cons = cons.force(0);
            }
            Ok(SimData {
                design: Arc::new(d),
                response: Response::Glm(y),
                family: Family::Logistic,
                active: active_from(&beta),
                constraints: cons,
            })
        }
        SimDesign::PoissonQuadratic => {
            let x = equicorrelated_normal(n, 5, 0.5, rng);
            let mut z = DMatrix::from_element(n, 11, 1.0);
            z.columns_mut(1, 5).copy_from(&x);
            z.columns_mut(6, 5).copy_from(&x.map(|v| v * v));
            let mut beta = vec![0.0; 11];
            beta[4] = 0.5;
            beta[5] = 1.0;
            let eta = &z * DVector::from_column_slice(&beta);
            let y = eta.map(|u| poisson(u.exp(), rng));
            let mut cols = vec!["intercept".to_string()];
            cols.extend(names("z", 5));
            cols.extend((1..=5).map(|j| format!("z{j}^2")));
            let mut active = active_from(&beta);
            active[0] = true;
            Ok(SimData {
                design: Arc::new(singletons(z, cols)?.with_intercept_group(0)?),
                response: Response::Glm(y),
                family: Family::Poisson,
                active,
                constraints: ConstraintSet::unconstrained(11).force(0),
            })
        }
        SimDesign::GmomAccuracy { correlated } => {
            let p = 10;
            let z = if correlated {
                let v = random_correlation(p, rng);
                correlated_normal(n, &v, rng)?
            } else {
                DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal))
            };
            let beta = [0.4, 0.6, 1.2, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
            let mean = &z * DVector::from_column_slice(&beta);
            let y = mean.map(|m| m + rng.sample::<f64, _>(StandardNormal));
            Ok(SimData {
                design: Arc::new(singletons(z, names("z", p))?),
                response: Response::Glm(y),
                family: Family::GaussianKnownPhi(1.0),
                active: active_from(&beta),
                constraints: ConstraintSet::unconstrained(p),
            })
        }
        SimDesign::AftScenario1 { covariates } | SimDesign::AftScenario2 { covariates } => {
            if covariates < 2 {
                return Err(Error::Domain("AFT scenarios need at least two covariates".into()));
            }
            let x = equicorrelated_normal(n, covariates, 0.5, rng);
            let (log_t, censor): (Vec<f64>, f64) = match design {
                SimDesign::AftScenario1 { .. } => {
                    let e = Normal::new(0.0, 0.5).expect("valid sd");
                    ((0..n).map(|i| x[(i, 0)] + 0.5 * x[(i, 1)].abs().ln() + e.sample(rng)).collect(), 0.5f64.ln())
                }
                _ => (
                    (0..n)
                        .map(|i| {
                            let lin = 0.75 * x[(i, 0)] - 1.25 * x[(i, 1)].abs().ln();
                            // S(t) = S₀(t)^{exp(lin)}, S₀(t) = 1 − Φ(2 log t)
                            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                            let s0 = u.powf((-lin).exp());
                            0.5 * norm_quantile(1.0 - s0)
                        })
                        .collect(),
                    0.55f64.ln(),
                ),
            };
            let times = DVector::from_iterator(n, log_t.iter().map(|t| t.min(censor)));
            let status: Vec<bool> = log_t.iter().map(|t| *t <= censor).collect();
            aft_design(&x, SurvivalData::new(times, status)?)
        }
        SimDesign::LogisticMixture { p } => {
            if p < 4 {
                return Err(Error::Domain("the mixture design needs p ≥ 4".into()));
            }
            let z = equicorrelated_normal(n, p, 0.5, rng);
            let y = DVector::from_fn(n, |i, _| {
                let lin = if rng.random::<f64>() < 0.5 {
                    1.5 * z[(i, 0)] + z[(i, 1)]
                } else {
                    -z[(i, 2)] + 1.5 * z[(i, 3)]
                };
                bernoulli(logistic(lin), rng)
            });
            let mut active = vec![false; p];
            active[..4].fill(true);
            Ok(SimData {
                design: Arc::new(singletons(z, names("z", p))?),
                response: Response::Glm(y),
                family: Family::Logistic,
                active,
                constraints: ConstraintSet::unconstrained(p),
            })
        }
    }
}

/// Forced intercept, one linear group per covariate, then one 5-column spline
/// deviation group per covariate. Truth: intercept, linear `x₁`, spline `x₂`.
fn aft_design(x: &DMatrix<f64>, data: SurvivalData) -> Result<SimData> {
    let (n, q) = x.shape();
    let dim = 5;
    let p = 1 + q + q * dim;
    let mut z = DMatrix::from_element(n, p, 1.0);
    z.columns_mut(1, q).copy_from(x);
    let mut cols = vec!["intercept".to_string()];
    cols.extend(names("x", q));
    for j in 0..q {
        let xj: Vec<f64> = x.column(j).iter().copied().collect();
        let b = spline_deviation_basis(&xj, dim)?;
        z.columns_mut(1 + q + j * dim, dim).copy_from(&b);
        cols.extend((1..=dim).map(|k| format!("s{}_{k}", j + 1)));
    }
    let mut sizes = vec![1; 1 + q];
    sizes.extend(std::iter::repeat_n(dim, q));
    let design = DesignMatrix::new(z, &sizes)?.with_column_names(cols)?.with_intercept_group(0)?;
    let n_groups = 1 + 2 * q;
    let mut active = vec![false; n_groups];
    active[0] = true;
    active[1] = true;
    active[1 + q + 1] = true;
    Ok(SimData {
        design: Arc::new(design),
        response: Response::Survival(data),
        family: Family::AftLogNormal,
        active,
        constraints: ConstraintSet::unconstrained(n_groups).force(0),
    })
}
