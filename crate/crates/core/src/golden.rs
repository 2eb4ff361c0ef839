//! Golden-section search for the maximum of a unimodal scalar function.
//!
//! Near a smooth maximum `f(x*) − f(x) ≈ f''·δ²/2`, so bracket points closer
//! than about `√ε` to `x*` compare equal in double precision. After the
//! bracket closes, one parabolic interpolation through points a fixed step
//! apart recovers the vertex well below that limit.

use crate::error::{invalid, Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (√5 − 1) / 2
const POLISH_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

pub fn maximize<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Maximum> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    if !(lo < hi) {
        return invalid(format!("empty bracket [{lo}, {hi}]"));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while b - a > tol {
        if iterations >= max_iter {
            return Err(Error::NoConvergence {
                iterations,
                width: b - a,
            });
        }
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let x = polish(&f, mid, lo, hi).unwrap_or(mid);
    Ok(Maximum {
        x,
        value: f(x),
        iterations,
    })
}

/// Vertex of the parabola through `x − h, x, x + h`, kept only when the
/// parabola is concave and the vertex stays inside `[x − h, x + h] ∩ [lo, hi]`.
fn polish<F: Fn(f64) -> f64>(f: &F, x: f64, lo: f64, hi: f64) -> Option<f64> {
    let h = POLISH_STEP.min((x - lo).abs()).min((hi - x).abs());
    if h <= 0.0 {
        return None;
    }
    let (fl, f0, fr) = (f(x - h), f(x), f(x + h));
    let curvature = fl - 2.0 * f0 + fr;
    if !(curvature < 0.0) {
        return None;
    }
    let vertex = x + 0.5 * h * (fl - fr) / curvature;
    ((vertex - x).abs() <= h).then_some(vertex)
}
