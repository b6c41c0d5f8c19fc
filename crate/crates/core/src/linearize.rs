//! Analytic Jacobians of the turbine model at an operating point.

use windshape_linalg::{Mat, StateSpace};

use crate::equilibrium::OperatingPoint;
use crate::error::Result;
use crate::model::{Surrogate, TurbineParams};

/// Continuous-time linear model with states `[ω, xt, vt]`, inputs `[θ, Mg]`
/// and outputs `[ω, λ, P, xt]`.
pub fn linearize_at(params: &TurbineParams, op: &OperatingPoint) -> Result<StateSpace> {
    let (w, v) = (op.x0.omega, op.v0);
    let (theta, mg) = (op.u0.theta, op.u0.mg);
    let k = params.r / (params.ng * v);
    let lambda = k * w;
    let cp = Surrogate::power(params).eval_with_partials(lambda, theta)?;
    let ct = Surrogate::thrust(params).eval_with_partials(lambda, theta)?;
    let ng2_j = params.ng * params.ng / params.jt;
    let a_rot = params.half_rho_area() * ng2_j * v.powi(3);
    let a_tow = params.half_rho_area() / params.mt * v * v;

    let a = Mat::from_row_slice(
        3,
        3,
        &[
            a_rot * (-cp.value / (w * w) + cp.d_lambda * k / w),
            0.0,
            0.0,
            0.0,
            0.0,
            1.0,
            a_tow * ct.d_lambda * k,
            -params.kt / params.mt,
            -params.dt / params.mt,
        ],
    );
    let b = Mat::from_row_slice(
        3,
        2,
        &[a_rot / w * cp.d_theta, -ng2_j, 0.0, 0.0, a_tow * ct.d_theta, 0.0],
    );
    let c = Mat::from_row_slice(
        4,
        3,
        &[1.0, 0.0, 0.0, k, 0.0, 0.0, params.eta * mg, 0.0, 0.0, 0.0, 1.0, 0.0],
    );
    let mut d = Mat::zeros(4, 2);
    d[(2, 1)] = params.eta * w;
    Ok(StateSpace::new(a, b, c, d)?)
}
