//! Rotor speed and tower fore-aft dynamics, the output map and an RK4 step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::aero::Surrogate;
use crate::model::TurbineParams;

/// Generator speed below which the model is considered to have left its domain.
pub const OMEGA_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVec {
    /// Generator speed [rad/s].
    pub omega: f64,
    /// Tower-top fore-aft displacement [m].
    pub xt: f64,
    /// Tower-top velocity [m/s].
    pub vt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InputVec {
    /// Blade pitch [deg].
    pub theta: f64,
    /// Generator torque [N·m].
    pub mg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputVec {
    pub omega: f64,
    pub lambda: f64,
    /// Electrical power [W].
    pub p: f64,
    pub xt: f64,
}

impl StateVec {
    pub fn to_array(self) -> [f64; 3] {
        [self.omega, self.xt, self.vt]
    }
    pub fn from_array(a: [f64; 3]) -> Self {
        Self { omega: a[0], xt: a[1], vt: a[2] }
    }
    fn axpy(self, h: f64, d: Self) -> Self {
        Self {
            omega: self.omega + h * d.omega,
            xt: self.xt + h * d.xt,
            vt: self.vt + h * d.vt,
        }
    }
}

impl InputVec {
    pub fn to_array(self) -> [f64; 2] {
        [self.theta, self.mg]
    }
    pub fn from_array(a: [f64; 2]) -> Self {
        Self { theta: a[0], mg: a[1] }
    }
}

impl OutputVec {
    pub fn to_array(self) -> [f64; 4] {
        [self.omega, self.lambda, self.p, self.xt]
    }
}

/// `[ω̇, ẋt, v̇t]`.
pub fn dynamics(params: &TurbineParams, x: StateVec, u: InputVec, v: f64) -> Result<StateVec> {
    if !(x.omega > 0.0) || !(v > 0.0) {
        return Err(Error::Domain(format!(
            "dynamics need omega > 0 and V > 0, got omega = {}, V = {v}",
            x.omega
        )));
    }
    let lambda = params.tip_speed_ratio(x.omega, v);
    let cp = Surrogate::power(params).eval(lambda, u.theta)?;
    let ct = Surrogate::thrust(params).eval(lambda, u.theta)?;
    let a = params.half_rho_area();
    let ng2 = params.ng * params.ng;
    let omega_dot = a * ng2 / params.jt * v.powi(3) / x.omega * cp - ng2 / params.jt * u.mg;
    let vt_dot = a / params.mt * v * v * ct - params.dt / params.mt * x.vt - params.kt / params.mt * x.xt;
    Ok(StateVec {
        omega: omega_dot,
        xt: x.vt,
        vt: vt_dot,
    })
}

pub fn output_map(params: &TurbineParams, x: StateVec, u: InputVec, v: f64) -> Result<OutputVec> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("output map needs V > 0, got {v}")));
    }
    Ok(OutputVec {
        omega: x.omega,
        lambda: params.tip_speed_ratio(x.omega, v),
        p: params.eta * x.omega * u.mg,
        xt: x.xt,
    })
}

/// One classical RK4 step with input and wind held over the step.
pub fn integrate_step(params: &TurbineParams, x: StateVec, u: InputVec, v: f64, dt: f64) -> Result<StateVec> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("step size must be positive, got {dt}")));
    }
    let k1 = dynamics(params, x, u, v)?;
    let k2 = dynamics(params, x.axpy(0.5 * dt, k1), u, v)?;
    let k3 = dynamics(params, x.axpy(0.5 * dt, k2), u, v)?;
    let k4 = dynamics(params, x.axpy(dt, k3), u, v)?;
    let next = StateVec {
        omega: x.omega + dt / 6.0 * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega),
        xt: x.xt + dt / 6.0 * (k1.xt + 2.0 * k2.xt + 2.0 * k3.xt + k4.xt),
        vt: x.vt + dt / 6.0 * (k1.vt + 2.0 * k2.vt + 2.0 * k3.vt + k4.vt),
    };
    if !(next.omega >= OMEGA_FLOOR) || !next.xt.is_finite() || !next.vt.is_finite() {
        return Err(Error::Domain(format!(
            "state left the physical domain (omega = {:.4} rad/s)",
            next.omega
        )));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state() -> StateVec {
        StateVec { omega: 90.0, xt: 0.3, vt: -0.02 }
    }

    #[test]
    fn tower_kinematics_identity() {
        let p = TurbineParams::default();
        for &(th, mg) in &[(0.0, 1e4), (12.0, 0.0), (3.0, 3e4)] {
            let d = dynamics(&p, state(), InputVec { theta: th, mg }, 8.0).unwrap();
            assert_eq!(d.xt, state().vt);
        }
    }

    #[test]
    fn zero_power_coefficient_decelerates() {
        let p = TurbineParams {
            cp_coeffs: [0.0; 6],
            ..Default::default()
        };
        let mg = 2.0e4;
        let d = dynamics(&p, state(), InputVec { theta: 0.0, mg }, 8.0).unwrap();
        assert_eq!(d.omega, -(p.ng * p.ng / p.jt) * mg);
    }

    #[test]
    fn output_identities() {
        let p = TurbineParams::default();
        let x = state();
        let y = output_map(&p, x, InputVec { theta: 1.0, mg: 0.0 }, 8.0).unwrap();
        assert_eq!(y.p, 0.0);
        assert_eq!(y.omega.to_bits(), x.omega.to_bits());
        let y4 = output_map(&p, x, InputVec::default(), 4.0).unwrap();
        assert!((y4.lambda - 2.0 * y.lambda).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        let p = TurbineParams::default();
        let bad = StateVec { omega: 0.0, ..state() };
        assert!(dynamics(&p, bad, InputVec::default(), 8.0).is_err());
        assert!(dynamics(&p, state(), InputVec::default(), 0.0).is_err());
        assert!(output_map(&p, state(), InputVec::default(), -1.0).is_err());
    }

    #[test]
    fn falls_below_floor_is_fault() {
        let p = TurbineParams::default();
        let slow = StateVec { omega: 0.2, ..state() };
        let r = integrate_step(&p, slow, InputVec { theta: 30.0, mg: 3.5e4 }, 3.0, 0.1);
        assert!(r.is_err());
    }
}
