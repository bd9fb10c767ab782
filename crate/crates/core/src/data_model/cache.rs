use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use parking_lot::RwLock;

use super::{DesignMatrix, ModelId};
use crate::error::{Error, Result};
use crate::families::Family;

/// Point at which the response is shifted and scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Center {
    /// `ν₀ = 0`.
    Zero,
    /// `ν₀ = h(ȳ)`, the intercept-only MLE.
    InterceptMle,
}

/// Shift/scale used for the working response `ỹ = (y − b'(ν₀)) / b''(ν₀)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformTag {
    pub center: Center,
    pub nu0: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Sufficient statistics shared by every submodel: `Zᵀỹ`, `ỹᵀỹ` and a lazily
/// filled, symmetric store of `ZᵀZ` entries.
#[derive(Debug)]
pub struct SuffStatsCache {
    design: Arc<DesignMatrix>,
    y: DVector<f64>,
    zty: DVector<f64>,
    yty: f64,
    tag: TransformTag,
    gram: RwLock<HashMap<(u32, u32), f64>>,
    dot_products: AtomicUsize,
}

/// Builds the cache for `family` with the response centered at `center`.
pub fn build_cache(
    design: Arc<DesignMatrix>,
    y: &DVector<f64>,
    family: &Family,
    center: Center,
) -> Result<SuffStatsCache> {
    if y.len() != design.n() {
        return Err(Error::Dimension(format!(
            "response has {} entries, design has {} rows",
            y.len(),
            design.n()
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteResponse { index: i });
    }
    let n = y.len() as f64;
    let nu0 = match center {
        Center::Zero => 0.0,
        Center::InterceptMle => family.link(y.sum() / n),
    };
    let (b1, b2) = (family.b1(nu0), family.b2(nu0));
    if !(b2 > 0.0) || !nu0.is_finite() {
        return Err(Error::DegenerateResponse(format!(
            "b''(ν₀) = {b2} at ν₀ = {nu0}; the response is constant at the boundary of its support"
        )));
    }
    let ytilde = y.map(|v| (v - b1) / b2);
    let zty = design.values().tr_mul(&ytilde);
    let yty = ytilde.dot(&ytilde);
    Ok(SuffStatsCache {
        design,
        y: y.clone(),
        zty,
        yty,
        tag: TransformTag { center, nu0, b1, b2 },
        gram: RwLock::new(HashMap::new()),
        dot_products: AtomicUsize::new(0),
    })
}

impl SuffStatsCache {
    pub fn design(&self) -> &Arc<DesignMatrix> {
        &self.design
    }

    /// Untransformed response.
    pub fn response(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.design.n()
    }

    pub fn zty(&self) -> &DVector<f64> {
        &self.zty
    }

    pub fn yty(&self) -> f64 {
        self.yty
    }

    pub fn tag(&self) -> TransformTag {
        self.tag
    }

    /// Number of column dot products computed so far.
    pub fn dot_products(&self) -> usize {
        self.dot_products.load(Ordering::Relaxed)
    }

    /// Number of distinct gram entries stored.
    pub fn filled_entries(&self) -> usize {
        self.gram.read().len()
    }

    fn key(i: usize, j: usize) -> (u32, u32) {
        if i <= j { (i as u32, j as u32) } else { (j as u32, i as u32) }
    }

    fn dot(&self, i: usize, j: usize) -> f64 {
        self.dot_products.fetch_add(1, Ordering::Relaxed);
        let (a, b) = (self.design.column(i), self.design.column(j));
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    /// Single gram entry `z_iᵀ z_j`.
    pub fn gram_entry(&self, i: usize, j: usize) -> f64 {
        let k = Self::key(i, j);
        if let Some(v) = self.gram.read().get(&k) {
            return *v;
        }
        let v = self.dot(k.0 as usize, k.1 as usize);
        *self.gram.write().entry(k).or_insert(v)
    }

    /// Dense gram block for an explicit column list.
    pub fn gram_of_columns(&self, cols: &[usize]) -> DMatrix<f64> {
        let m = cols.len();
        let mut out = DMatrix::zeros(m, m);
        let mut missing = Vec::new();
        {
            let store = self.gram.read();
            for a in 0..m {
                for b in 0..=a {
                    match store.get(&Self::key(cols[a], cols[b])) {
                        Some(v) => {
                            out[(a, b)] = *v;
                            out[(b, a)] = *v;
                        }
                        None => missing.push((a, b)),
                    }
                }
            }
        }
        if !missing.is_empty() {
            let computed: Vec<_> = missing
                .iter()
                .map(|&(a, b)| (a, b, self.dot(cols[a], cols[b])))
                .collect();
            let mut store = self.gram.write();
            for (a, b, v) in computed {
                // first published value wins so concurrent fills agree
                let v = *store.entry(Self::key(cols[a], cols[b])).or_insert(v);
                out[(a, b)] = v;
                out[(b, a)] = v;
            }
        }
        out
    }

    /// `(Z_γᵀZ_γ, Z_γᵀỹ)` assembled from the cache.
    pub fn submodel_stats(&self, model: &ModelId) -> (DMatrix<f64>, DVector<f64>) {
        let cols = self.design.columns_of(model);
        let xtx = self.gram_of_columns(&cols);
        let xty = DVector::from_iterator(cols.len(), cols.iter().map(|&c| self.zty[c]));
        (xtx, xty)
    }
}
