use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use crate::data_model::{ModelId, SuffStatsCache};
use crate::error::{Error, Result};
use crate::linalg::SpdFactor;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorKind {
    GroupZellner,
    GMom,
}

/// Inverse-gamma distribution with shape `a` and scale `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvGamma {
    pub shape: f64,
    pub scale: f64,
}

impl Default for InvGamma {
    fn default() -> Self {
        Self { shape: 0.01, scale: 0.01 }
    }
}

impl InvGamma {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && scale > 0.0) {
            return Err(Error::Domain(format!("IG({shape}, {scale}) needs positive parameters")));
        }
        Ok(Self { shape, scale })
    }

    pub fn log_pdf(&self, phi: f64) -> f64 {
        if !(phi > 0.0) {
            return f64::NEG_INFINITY;
        }
        let (a, b) = (self.shape, self.scale);
        a * b.ln() - ln_gamma(a) - (a + 1.0) * phi.ln() - b / phi
    }

    /// First and second derivatives of the log density.
    pub fn log_pdf_derivs(&self, phi: f64) -> (f64, f64) {
        let (a, b) = (self.shape, self.scale);
        (-(a + 1.0) / phi + b / (phi * phi), (a + 1.0) / (phi * phi) - 2.0 * b / phi.powi(3))
    }

    /// `E(1/φ)`.
    pub fn mean_inverse(&self) -> f64 {
        self.shape / self.scale
    }
}

/// Parameter prior: kind, `g` (`g_L` or `g_N`) and the dispersion prior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamPriorSpec {
    pub kind: PriorKind,
    pub g: f64,
    pub phi_prior: Option<InvGamma>,
}

impl ParamPriorSpec {
    pub fn group_zellner(g: f64) -> Self {
        Self { kind: PriorKind::GroupZellner, g, phi_prior: None }
    }

    pub fn gmom(g: f64) -> Self {
        Self { kind: PriorKind::GMom, g, phi_prior: None }
    }

    pub fn with_phi_prior(mut self, ig: InvGamma) -> Self {
        self.phi_prior = Some(ig);
        self
    }

    /// Dispersion prior; unknown-dispersion scoring has no implicit default.
    pub fn require_phi_prior(&self) -> Result<InvGamma> {
        self.phi_prior
            .ok_or_else(|| Error::Domain("unknown dispersion requires an explicit inverse-gamma prior on φ".into()))
    }
}

/// Diagonal gram block of one active group inside `Z_γᵀZ_γ`.
#[derive(Clone, Debug)]
pub struct GroupBlock {
    pub start: usize,
    pub size: usize,
    pub gram: DMatrix<f64>,
    pub log_det: f64,
}

/// Extracts and factorizes the within-group blocks of a submodel gram.
pub fn group_blocks(xtx: &DMatrix<f64>, sizes: &[usize], model: &ModelId) -> Result<Vec<GroupBlock>> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &s in sizes {
        let gram = xtx.view((start, start), (s, s)).into_owned();
        let f = SpdFactor::new(&gram).ok_or_else(|| Error::NotInvertible { model: model.to_string() })?;
        out.push(GroupBlock { start, size: s, log_det: f.log_det(), gram });
        start += s;
    }
    Ok(out)
}

fn block_quad(beta: &DVector<f64>, b: &GroupBlock) -> f64 {
    let bj = beta.rows(b.start, b.size);
    (bj.transpose() * &b.gram * bj)[(0, 0)]
}

/// Per-group precision multiplier `c_j` so that the (kernel) precision is `c_j Z_jᵀZ_j / φ`.
pub fn precision_scale(kind: PriorKind, size: usize, n: usize, g: f64) -> f64 {
    match kind {
        PriorKind::GroupZellner => size as f64 / (g * n as f64),
        PriorKind::GMom => (size as f64 + 2.0) / (g * n as f64),
    }
}

/// Block-diagonal precision of the Normal (kernel) prior, for `φ = 1`.
pub fn base_precision(blocks: &[GroupBlock], kind: PriorKind, n: usize, g: f64) -> DMatrix<f64> {
    let p: usize = blocks.iter().map(|b| b.size).sum();
    let mut out = DMatrix::zeros(p, p);
    for b in blocks {
        let c = precision_scale(kind, b.size, n, g);
        out.view_mut((b.start, b.start), (b.size, b.size)).copy_from(&(&b.gram * c));
    }
    out
}

/// Log density of the Normal (kernel) part, `Σ_j log N(β_j; 0, φ (c_j Z_jᵀZ_j)⁻¹)`.
pub fn log_normal_blocks(beta: &DVector<f64>, phi: f64, blocks: &[GroupBlock], kind: PriorKind, n: usize, g: f64) -> f64 {
    blocks
        .iter()
        .map(|b| {
            let c = precision_scale(kind, b.size, n, g);
            let k = b.size as f64;
            -0.5 * k * (LN_2PI + phi.ln()) + 0.5 * (k * c.ln() + b.log_det) - 0.5 * c * block_quad(beta, b) / phi
        })
        .sum()
}

/// `Σ_j log[β_jᵀ K_j β_j / (φ p_j)]` with `K_j = (p_j + 2)/(g n) Z_jᵀZ_j`.
pub fn log_gmom_penalty(beta: &DVector<f64>, phi: f64, blocks: &[GroupBlock], n: usize, g: f64) -> f64 {
    blocks
        .iter()
        .map(|b| {
            let c = precision_scale(PriorKind::GMom, b.size, n, g);
            (c * block_quad(beta, b) / (phi * b.size as f64)).ln()
        })
        .sum()
}

/// Group-Zellner log density over the active groups of `model`.
pub fn log_gzellner(beta: &DVector<f64>, phi: f64, model: &ModelId, cache: &SuffStatsCache, g: f64) -> Result<f64> {
    let blocks = blocks_from_cache(model, cache)?;
    check_len(beta, &blocks)?;
    Ok(log_normal_blocks(beta, phi, &blocks, PriorKind::GroupZellner, cache.n(), g))
}

/// gMOM log density over the active groups of `model`; `−∞` when some `β_j = 0`.
pub fn log_gmom(beta: &DVector<f64>, phi: f64, model: &ModelId, cache: &SuffStatsCache, g: f64) -> Result<f64> {
    let blocks = blocks_from_cache(model, cache)?;
    check_len(beta, &blocks)?;
    let n = cache.n();
    Ok(log_normal_blocks(beta, phi, &blocks, PriorKind::GMom, n, g) + log_gmom_penalty(beta, phi, &blocks, n, g))
}

fn blocks_from_cache(model: &ModelId, cache: &SuffStatsCache) -> Result<Vec<GroupBlock>> {
    let (xtx, _) = cache.submodel_stats(model);
    group_blocks(&xtx, &cache.design().active_sizes(model), model)
}

fn check_len(beta: &DVector<f64>, blocks: &[GroupBlock]) -> Result<()> {
    let p: usize = blocks.iter().map(|b| b.size).sum();
    if beta.len() != p {
        return Err(Error::Dimension(format!("β has {} entries, model has {p} columns", beta.len())));
    }
    Ok(())
}
