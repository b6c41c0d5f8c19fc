//! Exponential power and thrust coefficient surrogates.
//!
//! `C(λ, θ) = c1 (c2 z − c3 θ − c4) e^{−c5 z} + c6 λ` with
//! `z = 1/(λ + 0.08θ) − 0.035/(θ³ + 1)`, θ in degrees, clamped to `[0, hi]`.

use crate::error::{Error, Result};
use crate::model::TurbineParams;

pub const BETZ_LIMIT: f64 = 0.593;
pub const CT_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surrogate {
    pub c: [f64; 6],
    pub hi: f64,
}

/// Value and partial derivatives; derivatives vanish where the value is clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffEval {
    pub value: f64,
    pub d_lambda: f64,
    pub d_theta: f64,
}

impl Surrogate {
    pub fn power(params: &TurbineParams) -> Self {
        Self {
            c: params.cp_coeffs,
            hi: BETZ_LIMIT,
        }
    }

    pub fn thrust(params: &TurbineParams) -> Self {
        Self {
            c: params.ct_coeffs,
            hi: CT_MAX,
        }
    }

    fn check(lambda: f64, theta: f64) -> Result<()> {
        if !(lambda > 0.0) || !lambda.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!(
                "coefficient surrogate needs lambda > 0, got lambda = {lambda}, theta = {theta}"
            )));
        }
        if lambda + 0.08 * theta <= 0.0 || (theta.powi(3) + 1.0).abs() < 1e-9 {
            return Err(Error::Domain(format!("surrogate singular at lambda = {lambda}, theta = {theta}")));
        }
        Ok(())
    }

    /// Unclamped surrogate.
    pub fn raw(&self, lambda: f64, theta: f64) -> f64 {
        let c = &self.c;
        let z = 1.0 / (lambda + 0.08 * theta) - 0.035 / (theta.powi(3) + 1.0);
        c[0] * (c[1] * z - c[2] * theta - c[3]) * (-c[4] * z).exp() + c[5] * lambda
    }

    pub fn eval(&self, lambda: f64, theta: f64) -> Result<f64> {
        Self::check(lambda, theta)?;
        Ok(self.raw(lambda, theta).clamp(0.0, self.hi))
    }

    pub fn eval_with_partials(&self, lambda: f64, theta: f64) -> Result<CoeffEval> {
        Self::check(lambda, theta)?;
        let c = &self.c;
        let s = lambda + 0.08 * theta;
        let t3 = theta.powi(3) + 1.0;
        let z = 1.0 / s - 0.035 / t3;
        let e = (-c[4] * z).exp();
        let raw = c[0] * (c[1] * z - c[2] * theta - c[3]) * e + c[5] * lambda;
        if raw <= 0.0 || raw >= self.hi {
            return Ok(CoeffEval {
                value: raw.clamp(0.0, self.hi),
                d_lambda: 0.0,
                d_theta: 0.0,
            });
        }
        let dz = c[0] * e * (c[1] - c[4] * (c[1] * z - c[2] * theta - c[3]));
        let z_l = -1.0 / (s * s);
        let z_t = -0.08 / (s * s) + 0.105 * theta * theta / (t3 * t3);
        Ok(CoeffEval {
            value: raw,
            d_lambda: dz * z_l + c[5],
            d_theta: dz * z_t - c[0] * c[2] * e,
        })
    }
}

pub fn cp_eval(params: &TurbineParams, lambda: f64, theta: f64) -> Result<f64> {
    Surrogate::power(params).eval(lambda, theta)
}

pub fn ct_eval(params: &TurbineParams, lambda: f64, theta: f64) -> Result<f64> {
    Surrogate::thrust(params).eval(lambda, theta)
}
