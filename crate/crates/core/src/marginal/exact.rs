//! Closed-form Gaussian integrated likelihoods: Normal and Normal–inverse-gamma
//! conjugate integrals, and the gMOM integral with known dispersion through
//! exact Gaussian moments of the penalty product.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use super::general::LN_2PI;
use super::score::{Diagnostics, MarginalScore, Method};
use crate::data_model::{ModelId, SuffStatsCache};
use crate::error::{Error, Result};
use crate::linalg::SpdFactor;
use crate::priors::{base_precision, group_blocks, precision_scale, GroupBlock, InvGamma, ParamPriorSpec, PriorKind};

/// Dispersion treatment for the exact Gaussian integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dispersion {
    Known(f64),
    InvGamma(InvGamma),
}

/// Exact log integrated likelihood of a Gaussian linear model.
///
/// The cache must hold the raw response (`ν₀ = 0`, Gaussian family), so that
/// `ỹ = y`. gMOM is supported with known dispersion only.
pub fn exact_gaussian_marginal(
    model: &ModelId,
    cache: &SuffStatsCache,
    prior: &ParamPriorSpec,
    dispersion: Dispersion,
) -> Result<MarginalScore> {
    let tag = cache.tag();
    if tag.nu0 != 0.0 || tag.b1 != 0.0 || tag.b2 != 1.0 {
        return Err(Error::Unsupported("exact marginal needs a Gaussian cache expanded at zero".into()));
    }
    let (g, u) = cache.submodel_stats(model);
    let p = g.nrows();
    let n = cache.n();
    let blocks = group_blocks(&g, &cache.design().active_sizes(model), model)?;
    let p0 = base_precision(&blocks, prior.kind, n, prior.g);
    let a = &g + &p0;
    let fa = SpdFactor::new(&a).ok_or_else(|| Error::NotInvertible { model: model.to_string() })?;
    let log_det_p0 = if p == 0 {
        0.0
    } else {
        SpdFactor::new(&p0).ok_or_else(|| Error::NotInvertible { model: model.to_string() })?.log_det()
    };
    let mean = fa.solve(&u);
    let fit = if p == 0 { 0.0 } else { u.dot(&mean) };
    let rss = cache.yty() - fit;
    let nf = n as f64;
    let log_ml = match dispersion {
        Dispersion::Known(phi) => {
            let base = -0.5 * nf * (LN_2PI + phi.ln()) - 0.5 * rss / phi + 0.5 * log_det_p0 - 0.5 * fa.log_det();
            match prior.kind {
                PriorKind::GroupZellner => base,
                PriorKind::GMom => {
                    let cov = fa.inverse() * phi;
                    base + gmom_penalty_moment(&mean, &cov, &blocks, phi, n, prior.g).ln()
                }
            }
        }
        Dispersion::InvGamma(ig) => {
            if prior.kind == PriorKind::GMom {
                return Err(Error::Unsupported("exact gMOM marginal with unknown dispersion".into()));
            }
            let (sa, sb) = (ig.shape, ig.scale);
            -0.5 * nf * LN_2PI + 0.5 * log_det_p0 - 0.5 * fa.log_det() + sa * sb.ln() - ln_gamma(sa)
                + ln_gamma(sa + 0.5 * nf)
                - (sa + 0.5 * nf) * (sb + 0.5 * rss).ln()
        }
    };
    Ok(MarginalScore {
        log_ml,
        method: Method::ExactGaussian,
        expansion: DVector::zeros(p),
        mode: mean,
        diagnostics: Diagnostics::default(),
    })
}

/// `E[Π_j β_jᵀK_jβ_j/(φ p_j)]` for `β ~ N(mean, cov)`.
fn gmom_penalty_moment(mean: &DVector<f64>, cov: &DMatrix<f64>, blocks: &[GroupBlock], phi: f64, n: usize, g: f64) -> f64 {
    let mut poly = Polynomial::one(mean.len());
    for b in blocks {
        let k = &b.gram * (precision_scale(PriorKind::GMom, b.size, n, g) / (phi * b.size as f64));
        let mut quad = Polynomial::zero(mean.len());
        for r in 0..b.size {
            for c in 0..b.size {
                quad.add_monomial(&[b.start + r, b.start + c], k[(r, c)]);
            }
        }
        poly = poly.mul(&quad);
    }
    let mut moments = GaussianMoments::new(mean, cov);
    poly.terms.iter().map(|(e, coef)| coef * moments.get(e)).sum()
}

/// Sparse polynomial in `p` variables keyed by exponent vectors.
struct Polynomial {
    dim: usize,
    terms: HashMap<Vec<u8>, f64>,
}

impl Polynomial {
    fn zero(dim: usize) -> Self {
        Self { dim, terms: HashMap::new() }
    }

    fn one(dim: usize) -> Self {
        let mut terms = HashMap::new();
        terms.insert(vec![0; dim], 1.0);
        Self { dim, terms }
    }

    fn add_monomial(&mut self, vars: &[usize], coef: f64) {
        let mut e = vec![0u8; self.dim];
        for &v in vars {
            e[v] += 1;
        }
        *self.terms.entry(e).or_insert(0.0) += coef;
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *out.terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        out
    }
}

/// Raw moments `E[x^e]` of a multivariate Normal via the Stein recursion
/// `E[x_i f(x)] = m_i E[f] + Σ_k C_ik E[∂_k f]`.
struct GaussianMoments<'a> {
    mean: &'a DVector<f64>,
    cov: &'a DMatrix<f64>,
    memo: HashMap<Vec<u8>, f64>,
}

impl<'a> GaussianMoments<'a> {
    fn new(mean: &'a DVector<f64>, cov: &'a DMatrix<f64>) -> Self {
        Self { mean, cov, memo: HashMap::new() }
    }

    fn get(&mut self, e: &[u8]) -> f64 {
        let Some(i) = e.iter().position(|&v| v > 0) else {
            return 1.0;
        };
        if let Some(v) = self.memo.get(e) {
            return *v;
        }
        let mut rest = e.to_vec();
        rest[i] -= 1;
        let mut v = self.mean[i] * self.get(&rest);
        for k in 0..rest.len() {
            if rest[k] > 0 {
                let mut d = rest.clone();
                d[k] -= 1;
                v += self.cov[(i, k)] * rest[k] as f64 * self.get(&d);
            }
        }
        self.memo.insert(e.to_vec(), v);
        v
    }
}
