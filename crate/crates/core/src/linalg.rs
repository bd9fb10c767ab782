//! Small dense helpers shared by the engines: a Cholesky wrapper that keeps
//! the factor around for determinants, and a ridge-jitter fallback.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Retained Cholesky factor of a symmetric positive-definite matrix.
#[derive(Clone, Debug)]
pub struct SpdFactor {
    chol: Option<Cholesky<f64, Dyn>>,
    dim: usize,
    /// True when a diagonal ridge had to be added before factorizing.
    pub jittered: bool,
}

impl SpdFactor {
    /// Factorizes `a`, returning `None` when it is not positive definite.
    pub fn new(a: &DMatrix<f64>) -> Option<Self> {
        let dim = a.nrows();
        if dim == 0 {
            return Some(Self { chol: None, dim, jittered: false });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let chol = Cholesky::new(a.clone())?;
        if chol.l_dirty().diagonal().iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return None;
        }
        Some(Self { chol: Some(chol), dim, jittered: false })
    }

    /// Factorizes `a`; on failure retries once with `1e-10 * trace / dim` on the diagonal.
    pub fn with_jitter(a: &DMatrix<f64>) -> Option<Self> {
        if let Some(f) = Self::new(a) {
            return Some(f);
        }
        let dim = a.nrows();
        let trace: f64 = a.diagonal().iter().sum();
        let ridge = 1e-10 * trace.abs().max(f64::MIN_POSITIVE) / dim as f64;
        let mut b = a.clone();
        for i in 0..dim {
            b[(i, i)] += ridge;
        }
        Self::new(&b).map(|mut f| {
            f.jittered = true;
            f
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn log_det(&self) -> f64 {
        match &self.chol {
            None => 0.0,
            Some(c) => 2.0 * c.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
        }
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        match &self.chol {
            None => DVector::zeros(0),
            Some(c) => c.solve(b),
        }
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        match &self.chol {
            None => DMatrix::zeros(0, 0),
            Some(c) => c.inverse(),
        }
    }
}

/// Solution of a least-squares normal system.
#[derive(Clone, Debug)]
pub struct LsSolution {
    pub beta: DVector<f64>,
    /// `xtyᵀ β`.
    pub quad: f64,
    pub factor: SpdFactor,
}

/// Solves `xtx β = xty` by Cholesky; `None` when `xtx` is not positive definite.
pub fn ls_solve(xtx: &DMatrix<f64>, xty: &DVector<f64>) -> Option<LsSolution> {
    let factor = SpdFactor::new(xtx)?;
    Some(finish_ls(factor, xty))
}

/// As [`ls_solve`] but falls back to a ridge-jittered factorization.
pub fn ls_solve_jittered(xtx: &DMatrix<f64>, xty: &DVector<f64>) -> Option<LsSolution> {
    let factor = SpdFactor::with_jitter(xtx)?;
    Some(finish_ls(factor, xty))
}

fn finish_ls(factor: SpdFactor, xty: &DVector<f64>) -> LsSolution {
    let beta = factor.solve(xty);
    let quad = if beta.is_empty() { 0.0 } else { xty.dot(&beta) };
    LsSolution { beta, quad, factor }
}

/// Numerical rank from the singular values, relative tolerance `1e-10`.
pub fn rank(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let tol = smax * 1e-10 * a.nrows().max(a.ncols()) as f64;
    sv.iter().filter(|s| **s > tol).count()
}

/// Stable `log(Σ exp(x_i))`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gram() {
        let sol = ls_solve(&DMatrix::identity(2, 2), &DVector::from_vec(vec![3.0, -1.0])).unwrap();
        assert_eq!(sol.beta.as_slice(), &[3.0, -1.0]);
        assert!((sol.quad - 10.0).abs() < 1e-14);
        assert!(sol.factor.log_det().abs() < 1e-15);
    }

    #[test]
    fn jitter_rescues_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(ls_solve(&a, &DVector::from_vec(vec![1.0, 1.0])).is_none());
        let sol = ls_solve_jittered(&a, &DVector::from_vec(vec![1.0, 1.0])).unwrap();
        assert!(sol.factor.jittered);
    }

    #[test]
    fn empty_system() {
        let sol = ls_solve(&DMatrix::zeros(0, 0), &DVector::zeros(0)).unwrap();
        assert_eq!(sol.quad, 0.0);
        assert_eq!(sol.factor.log_det(), 0.0);
    }

    #[test]
    fn lse() {
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }
}
