use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Sample quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Cubic-spline deviation-from-linearity basis of dimension `dim ≥ 3`:
/// `x², x³` and truncated cubes at `dim − 2` knots placed at equispaced
/// interior quantiles, residualized against `[1, x]` as a block and
/// orthonormalized so that each column has squared norm `n`.
pub fn spline_deviation_basis(x: &[f64], dim: usize) -> Result<DMatrix<f64>> {
    let n = x.len();
    if dim < 3 {
        return Err(Error::Domain("spline deviation basis needs dimension at least 3".into()));
    }
    if n <= dim + 2 {
        return Err(Error::Dimension(format!("{n} observations are too few for a {dim}-column spline basis")));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n_knots = dim - 2;
    let knots: Vec<f64> = (1..=n_knots).map(|k| quantile(&sorted, k as f64 / (n_knots + 1) as f64)).collect();
    let raw = DMatrix::from_fn(n, dim, |i, c| {
        let v = x[i];
        match c {
            0 => v * v,
            1 => v * v * v,
            k => (v - knots[k - 2]).max(0.0).powi(3),
        }
    });
    let lin = DMatrix::from_fn(n, 2, |i, c| if c == 0 { 1.0 } else { x[i] });
    let qr_lin = lin.clone().qr();
    let q_lin = qr_lin.q();
    let resid = &raw - &q_lin * (q_lin.transpose() * &raw);
    let qr = resid.qr();
    let r = qr.r();
    let scale = r.diagonal().iter().map(|v| v.abs()).fold(0.0, f64::max);
    if r.diagonal().iter().any(|v| v.abs() <= 1e-10 * scale) {
        return Err(Error::Domain("spline basis is rank deficient for this covariate".into()));
    }
    Ok(qr.q() * (n as f64).sqrt())
}
