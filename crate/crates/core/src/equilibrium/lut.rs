//! Power-to-speed lookup table for reference tracking.
//!
//! Entries follow the optimal-power curve `P = η (ρπr²/2) Cp* (r ω / (Ng λ*))³`
//! inverted for ω, clamped at `omega_max`. Interpolation is linear in `P^{1/3}`,
//! in which the unclamped curve is exactly linear.

use serde::{Deserialize, Serialize};

use crate::equilibrium::CpOptimum;
use crate::error::{Error, Result};
use crate::model::TurbineParams;

pub const LUT_POINTS: usize = 200;
/// Lowest tabulated power as a fraction of rated power.
pub const LUT_MIN_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpeedLut {
    pub power: Vec<f64>,
    pub omega: Vec<f64>,
}

/// Speed on the unclamped optimal-power curve.
pub fn optimal_curve_speed(params: &TurbineParams, opt: &CpOptimum, p: f64) -> f64 {
    let k = params.eta * params.half_rho_area() * opt.cp;
    params.ng * opt.lambda / params.r * (p / k).cbrt()
}

impl PowerSpeedLut {
    /// Table over `[p_lo, p_hi]`, uniform in `P^{1/3}`.
    pub fn over(params: &TurbineParams, opt: &CpOptimum, p_lo: f64, p_hi: f64) -> Result<Self> {
        if !(p_lo > 0.0 && p_hi > p_lo) {
            return Err(Error::Config(format!("empty power range [{p_lo}, {p_hi}] for lookup table")));
        }
        let (a, b) = (p_lo.cbrt(), p_hi.cbrt());
        let mut power = Vec::with_capacity(LUT_POINTS);
        let mut omega = Vec::with_capacity(LUT_POINTS);
        for k in 0..LUT_POINTS {
            let q = if k == LUT_POINTS - 1 {
                b
            } else {
                a + (b - a) * k as f64 / (LUT_POINTS - 1) as f64
            };
            let p = if k == 0 { p_lo } else if k == LUT_POINTS - 1 { p_hi } else { q * q * q };
            power.push(p);
            omega.push(optimal_curve_speed(params, opt, p).min(params.omega_max));
        }
        Ok(Self { power, omega })
    }

    /// Wind-independent table spanning `[LUT_MIN_FRACTION·p_rated, p_rated]`.
    pub fn for_turbine(params: &TurbineParams, opt: &CpOptimum) -> Result<Self> {
        Self::over(params, opt, LUT_MIN_FRACTION * params.p_rated, params.p_rated)
    }

    pub fn p_min(&self) -> f64 {
        self.power[0]
    }

    pub fn p_max(&self) -> f64 {
        *self.power.last().expect("nonempty table")
    }

    pub fn lookup(&self, p: f64) -> Option<f64> {
        let (lo, hi) = (self.p_min(), self.p_max());
        if !(p >= lo * (1.0 - 1e-12) && p <= hi * (1.0 + 1e-12)) {
            return None;
        }
        let p = p.clamp(lo, hi);
        let k = self.power.partition_point(|&x| x <= p).clamp(1, self.power.len() - 1);
        let (p0, p1) = (self.power[k - 1], self.power[k]);
        let (w0, w1) = (self.omega[k - 1], self.omega[k]);
        let (c0, c1, c) = (p0.cbrt(), p1.cbrt(), p.cbrt());
        let f = if c1 > c0 { (c - c0) / (c1 - c0) } else { 0.0 };
        Some(w0 + f * (w1 - w0))
    }
}
