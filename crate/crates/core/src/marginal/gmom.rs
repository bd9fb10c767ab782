//! Non-local correction for the gMOM prior: the log of the posterior mean of
//! the quadratic penalty under the local Gaussian approximation.

use nalgebra::{DMatrix, DVector};

use crate::priors::{precision_scale, GroupBlock, InvGamma, PriorKind};

/// `E[ξᵀAξ/φ]` for `ξ ~ N(m, φS)`: `tr(AS) + mᵀAm/φ`.
pub fn quad_form_mean(a: &DMatrix<f64>, s: &DMatrix<f64>, m: &DVector<f64>, phi: f64) -> f64 {
    (a * s).trace() + (m.transpose() * a * m)[(0, 0)] / phi
}

/// As [`quad_form_mean`] with `φ ~ IG(a, b)` integrated out: `tr(AS) + (a/b) mᵀAm`.
pub fn quad_form_mean_ig(a: &DMatrix<f64>, s: &DMatrix<f64>, m: &DVector<f64>, ig: &InvGamma) -> f64 {
    (a * s).trace() + ig.mean_inverse() * (m.transpose() * a * m)[(0, 0)]
}

/// `Σ_j log[tr(K_j S_jj)/p_j + E(1/φ) m_jᵀK_jm_j/p_j]` with `K_j = (p_j+2)/(g n) Z_jᵀZ_j`,
/// where `S` is the posterior covariance of β divided by φ.
pub fn gmom_tilt(mean: &DVector<f64>, s: &DMatrix<f64>, inv_phi: f64, blocks: &[GroupBlock], n: usize, g: f64) -> f64 {
    blocks
        .iter()
        .map(|b| {
            let k = &b.gram * precision_scale(PriorKind::GMom, b.size, n, g);
            let sj = s.view((b.start, b.start), (b.size, b.size));
            let mj = mean.rows(b.start, b.size);
            let tr = (&k * sj).trace();
            let quad = (mj.transpose() * &k * mj)[(0, 0)];
            ((tr + inv_phi * quad) / b.size as f64).ln()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_second_moment() {
        let a = DMatrix::from_element(1, 1, 2.0);
        let s = DMatrix::from_element(1, 1, 3.0);
        let m = DVector::from_element(1, 1.0);
        assert_eq!(quad_form_mean(&a, &s, &m, 1.0), 8.0);
    }
}
