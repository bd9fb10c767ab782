//! Adaptive Gauss–Kronrod quadrature of `exp(f)` for 1-d and 2-d log integrands.
//! Used as a validation oracle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Drop in log integrand, relative to the running maximum, that ends the bracket search.
    pub log_drop: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, max_subdivisions: 5000, log_drop: 60.0 }
    }
}

/// `log ∫ exp(f)` with its relative error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub log_value: f64,
    pub rel_error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Segment { a, b, value: k * h, error: ((k - g) * h).abs() }
}

/// Walks outwards from `center` in steps of `scale / 8` (doubling every 64 steps)
/// until `f` is `log_drop` below the running maximum on both sides. Returns the
/// bracket and the maximum seen; a later, larger maximum only strengthens the
/// stopping condition already met on the other side.
fn bracket(f: &mut dyn FnMut(f64) -> f64, center: f64, scale: f64, log_drop: f64) -> Result<(f64, f64, f64)> {
    let h0 = scale / 8.0;
    let mut fmax = f(center);
    if fmax.is_nan() {
        return Err(Error::Domain("log integrand is NaN at the bracket center".into()));
    }
    let mut ends = [center, center];
    for (side, sign) in [(0usize, -1.0), (1usize, 1.0)] {
        let mut x = center;
        let mut h = h0;
        let mut steps = 0usize;
        loop {
            x += sign * h;
            let v = f(x);
            if v > fmax {
                fmax = v;
            }
            steps += 1;
            if steps >= 8 && (v < fmax - log_drop || v == f64::NEG_INFINITY) {
                break;
            }
            if steps.is_multiple_of(64) {
                h *= 2.0;
            }
            if steps > 4096 {
                return Err(Error::ToleranceNotMet { tolerance: log_drop, estimate: x, error: f64::INFINITY });
            }
        }
        ends[side] = x;
    }
    Ok((ends[0], ends[1], fmax))
}

/// `log ∫ exp(f(x)) dx` over the real line. `center` and `scale` locate the bulk
/// of the mass (a mode and a rough standard deviation).
pub fn log_integrate_1d(f: &dyn Fn(f64) -> f64, center: f64, scale: f64, opts: QuadOptions) -> Result<QuadResult> {
    if !(scale > 0.0) || !center.is_finite() {
        return Err(Error::Domain("bracket needs a finite center and a positive scale".into()));
    }
    let mut probe = |x: f64| f(x);
    let (lo, hi, fmax) = bracket(&mut probe, center, scale, opts.log_drop)?;
    let mut g = |x: f64| {
        let v = f(x) - fmax;
        if v.is_finite() { v.exp() } else { 0.0 }
    };
    let pieces = 32;
    let width = (hi - lo) / pieces as f64;
    let mut heap = BinaryHeap::new();
    for i in 0..pieces {
        let a = lo + width * i as f64;
        let b = if i + 1 == pieces { hi } else { a + width };
        heap.push(gk15(&mut g, a, b));
    }
    let mut subdivisions = pieces;
    loop {
        let total: f64 = heap.iter().map(|s| s.value).sum();
        let err: f64 = heap.iter().map(|s| s.error).sum();
        if total > 0.0 && err <= opts.rel_tol * total {
            return Ok(QuadResult { log_value: total.ln() + fmax, rel_error: err / total });
        }
        if subdivisions >= opts.max_subdivisions || !(total > 0.0) {
            return Err(Error::ToleranceNotMet { tolerance: opts.rel_tol, estimate: total.ln() + fmax, error: err / total });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(gk15(&mut g, worst.a, mid));
        heap.push(gk15(&mut g, mid, worst.b));
        subdivisions += 1;
    }
}

/// Locates the bulk of the inner integral at a given outer coordinate.
pub struct InnerBracket<'a> {
    pub center: &'a dyn Fn(f64) -> f64,
    pub scale: f64,
}

/// `log ∫∫ exp(f(x, y)) dy dx` by iterated adaptive quadrature. The inner
/// integral over `y` is bracketed around `inner.center(x)`.
pub fn log_integrate_2d(
    f: &dyn Fn(f64, f64) -> f64,
    center_x: f64,
    scale_x: f64,
    inner: InnerBracket<'_>,
    opts: QuadOptions,
) -> Result<QuadResult> {
    let inner_opts = QuadOptions { rel_tol: opts.rel_tol * 1e-2, ..opts };
    let failure = std::cell::Cell::new(None);
    let outer = |x: f64| -> f64 {
        let fy = |y: f64| f(x, y);
        match log_integrate_1d(&fy, (inner.center)(x), inner.scale, inner_opts) {
            Ok(r) => r.log_value,
            Err(e) => {
                failure.set(Some(e.to_string()));
                f64::NEG_INFINITY
            }
        }
    };
    let r = log_integrate_1d(&outer, center_x, scale_x, opts)?;
    if let Some(msg) = failure.take() {
        return Err(Error::Domain(format!("inner quadrature failed: {msg}")));
    }
    Ok(r)
}
