//! Global maximizer of the power coefficient surrogate.

use crate::error::{Error, Result};
use crate::model::{Surrogate, TurbineParams};

pub const LAMBDA_GRID: (f64, f64) = (1.0, 15.0);
pub const THETA_GRID: (f64, f64) = (0.0, 30.0);
pub const GRID_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CpOptimum {
    pub lambda: f64,
    pub theta: f64,
    pub cp: f64,
}

fn grid_len(range: (f64, f64)) -> usize {
    ((range.1 - range.0) / GRID_STEP).round() as usize + 1
}

fn grid_at(range: (f64, f64), i: usize) -> f64 {
    range.0 + i as f64 * GRID_STEP
}

/// Maximizes `f` over `[lo, hi]` by golden-section search; returns `(x, f(x))`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    // endpoints are never probed by the interior iteration
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Grid scan over λ ∈ [1, 15] × θ ∈ [0°, 30°] followed by nested
/// golden-section refinement. The pitch lower bound θ = 0 is an admissible
/// location for the optimum; any other grid edge signals a misconfigured
/// surrogate.
pub fn cp_maximizer(params: &TurbineParams) -> Result<CpOptimum> {
    let s = Surrogate::power(params);
    let (nl, nt) = (grid_len(LAMBDA_GRID), grid_len(THETA_GRID));
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for j in 0..nt {
        let theta = grid_at(THETA_GRID, j);
        for i in 0..nl {
            let v = s.raw(grid_at(LAMBDA_GRID, i), theta).clamp(0.0, s.hi);
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }
    let (cp_grid, i, j) = best;
    if !(cp_grid > 0.0) {
        return Err(Error::Config("power coefficient surrogate is nonpositive on the whole grid".into()));
    }
    if i == 0 || i == nl - 1 || j == nt - 1 {
        return Err(Error::Config(format!(
            "power coefficient maximizer lies on the grid boundary (lambda = {:.2}, theta = {:.2})",
            grid_at(LAMBDA_GRID, i),
            grid_at(THETA_GRID, j)
        )));
    }
    let lambda_g = grid_at(LAMBDA_GRID, i);
    let theta_g = grid_at(THETA_GRID, j);
    let eval = |l: f64, t: f64| s.raw(l, t).clamp(0.0, s.hi);
    let inner = |t: f64| golden_max(|l| eval(l, t), lambda_g - GRID_STEP, lambda_g + GRID_STEP, 1e-12);
    let t_lo = (theta_g - GRID_STEP).max(THETA_GRID.0);
    let (theta, _) = golden_max(|t| inner(t).1, t_lo, theta_g + GRID_STEP, 1e-12);
    let (lambda, cp) = inner(theta);
    Ok(CpOptimum { lambda, theta, cp })
}
