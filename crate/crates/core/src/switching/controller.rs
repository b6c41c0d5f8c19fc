//! Discrete controller realizations around a moving operating point.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use windshape_linalg::StateSpace;

use crate::equilibrium::{OperatingPoint, Region};
use crate::error::{Error, Result};
use crate::model::{InputVec, OutputVec, TurbineParams};
use crate::switching::bumpless::{bumpless_init, BumplessSolution};

#[derive(Debug, Clone)]
pub struct DiscreteController {
    pub region: Region,
    pub sys: StateSpace,
    pub xi: DVector<f64>,
    pub op: OperatingPoint,
    pub dt: f64,
}

impl DiscreteController {
    pub fn new(region: Region, sys: StateSpace, op: OperatingPoint) -> Result<Self> {
        let dt = match sys.time {
            windshape_linalg::TimeDomain::Discrete { dt } => dt,
            _ => return Err(Error::Domain("controller realization must be discrete".into())),
        };
        if sys.ninputs() != 4 || sys.noutputs() != 2 {
            return Err(Error::Domain(format!(
                "controller must map 4 outputs to 2 inputs, got {}→{}",
                sys.ninputs(),
                sys.noutputs()
            )));
        }
        Ok(Self {
            region,
            xi: DVector::zeros(sys.nstates()),
            sys,
            op,
            dt,
        })
    }

    /// Advances one sample and returns the unclamped input command `u° + μ`.
    pub fn step(&mut self, y: OutputVec) -> InputVec {
        let nu = arr4(y) - arr4(self.op.y0);
        let mu = &self.sys.c * &self.xi + &self.sys.d * &nu;
        self.xi = &self.sys.a * &self.xi + &self.sys.b * &nu;
        InputVec {
            theta: self.op.u0.theta + mu[0],
            mg: self.op.u0.mg + mu[1],
        }
    }

    pub fn reset(&mut self) {
        self.xi.fill(0.0);
    }

    /// Re-initializes the state from the previous plant input and output.
    pub fn initialize_from(&mut self, u_prev: InputVec, y_prev: OutputVec) -> BumplessSolution {
        let du = DVector::from_row_slice(&[u_prev.theta - self.op.u0.theta, u_prev.mg - self.op.u0.mg]);
        let dy = arr4(y_prev) - arr4(self.op.y0);
        let sol = bumpless_init(&self.sys, &du, &dy);
        self.xi = sol.state.clone();
        sol
    }
}

fn arr4(y: OutputVec) -> DVector<f64> {
    DVector::from_row_slice(&y.to_array())
}

/// Actuator range and rate limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputLimits {
    pub theta_range: [f64; 2],
    pub mg_range: [f64; 2],
    pub theta_rate: f64,
    pub mg_rate: f64,
}

impl InputLimits {
    pub fn from_params(p: &TurbineParams) -> Self {
        Self {
            theta_range: p.theta_range,
            mg_range: p.mg_range,
            theta_rate: p.theta_rate,
            mg_rate: p.mg_rate,
        }
    }

    /// Per-channel difference divided by the channel range.
    pub fn normalized(&self, du: InputVec) -> [f64; 2] {
        [
            du.theta / (self.theta_range[1] - self.theta_range[0]),
            du.mg / (self.mg_range[1] - self.mg_range[0]),
        ]
    }
}

/// Slew-rate then range clamp of an input command.
pub fn clamp_input(cmd: InputVec, prev: InputVec, lim: &InputLimits, dt: f64) -> InputVec {
    let ch = |c: f64, p: f64, rate: f64, [lo, hi]: [f64; 2]| {
        let c = if c.is_nan() { p } else { c };
        c.clamp(p - rate * dt, p + rate * dt).clamp(lo, hi)
    };
    InputVec {
        theta: ch(cmd.theta, prev.theta, lim.theta_rate, lim.theta_range),
        mg: ch(cmd.mg, prev.mg, lim.mg_rate, lim.mg_range),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::Turbine;
    use windshape_linalg::dense::Mat;
    use windshape_linalg::TimeDomain;

    fn controller() -> DiscreteController {
        let t = Turbine::new(TurbineParams::default()).unwrap();
        let op = t.region2(7.5).unwrap();
        let sys = StateSpace::with_time(
            Mat::identity(3, 3) * 0.5,
            Mat::from_element(3, 4, 0.1),
            Mat::from_element(2, 3, 1.0),
            Mat::from_element(2, 4, 0.01),
            TimeDomain::Discrete { dt: 0.004 },
        )
        .unwrap();
        DiscreteController::new(Region::Two, sys, op).unwrap()
    }

    #[test]
    fn equilibrium_output_returns_equilibrium_input() {
        let mut k = controller();
        let u = k.step(k.op.y0);
        assert_eq!(u, k.op.u0);
        assert!(k.xi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bumpless_at_equilibrium_is_exact() {
        let mut k = controller();
        let sol = k.initialize_from(k.op.u0, k.op.y0);
        assert!(sol.cost < 1e-20);
    }

    #[test]
    fn clamp_honours_rate_and_range() {
        let lim = InputLimits::from_params(&TurbineParams::default());
        let prev = InputVec { theta: 0.01, mg: 34990.0 };
        let u = clamp_input(InputVec { theta: -5.0, mg: 1e9 }, prev, &lim, 0.004);
        assert_eq!(u.theta, 0.0);
        assert_eq!(u.mg, 35000.0);
        let u = clamp_input(InputVec { theta: 20.0, mg: 0.0 }, InputVec { theta: 10.0, mg: 20000.0 }, &lim, 0.004);
        assert!((u.theta - (10.0 + 8.0 * 0.004)).abs() < 1e-12);
        assert!((u.mg - (20000.0 - 60.0)).abs() < 1e-9);
    }
}
