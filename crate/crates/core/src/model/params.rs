use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants, aerodynamic surrogate coefficients and actuator limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbineParams {
    /// Air density [kg/m³].
    pub rho: f64,
    /// Rotor radius [m].
    pub r: f64,
    /// Gearbox ratio.
    pub ng: f64,
    /// Drivetrain inertia as it enters the speed equation [kg·m²].
    pub jt: f64,
    /// Tower-top modal mass [kg].
    pub mt: f64,
    /// Tower damping [N·s/m].
    pub dt: f64,
    /// Tower stiffness [N/m].
    pub kt: f64,
    /// Generator efficiency.
    pub eta: f64,
    pub cp_coeffs: [f64; 6],
    pub ct_coeffs: [f64; 6],
    /// Pitch bounds [deg].
    pub theta_range: [f64; 2],
    /// Generator torque bounds [N·m].
    pub mg_range: [f64; 2],
    /// Pitch slew limit [deg/s].
    pub theta_rate: f64,
    /// Torque slew limit [N·m/s].
    pub mg_rate: f64,
    /// Rated electrical power [W].
    pub p_rated: f64,
    /// Generator speed bound [rad/s].
    pub omega_max: f64,
}

impl Default for TurbineParams {
    fn default() -> Self {
        Self {
            rho: 1.225,
            r: 65.0,
            ng: 97.0,
            jt: 3.5e7,
            mt: 2.5e5,
            dt: 9.4e3,
            kt: 8.9e5,
            eta: 0.94,
            cp_coeffs: [0.5176, 116.0, 0.4, 5.0, 21.0, 0.0068],
            ct_coeffs: [1.0, 1.5, 0.015, 0.05, 0.5, 0.1],
            theta_range: [0.0, 35.0],
            mg_range: [0.0, 35_000.0],
            theta_rate: 8.0,
            mg_rate: 15_000.0,
            p_rated: 3.4e6,
            omega_max: 125.0,
        }
    }
}

impl TurbineParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("r", self.r),
            ("ng", self.ng),
            ("jt", self.jt),
            ("mt", self.mt),
            ("dt", self.dt),
            ("kt", self.kt),
            ("theta_rate", self.theta_rate),
            ("mg_rate", self.mg_rate),
            ("p_rated", self.p_rated),
            ("omega_max", self.omega_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("turbine.{name} must be positive, got {v}")));
            }
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Config(format!("turbine.eta must lie in (0, 1], got {}", self.eta)));
        }
        for (name, [lo, hi]) in [("theta_range", self.theta_range), ("mg_range", self.mg_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!("turbine.{name} must be a nonempty interval, got [{lo}, {hi}]")));
            }
        }
        if self.cp_coeffs.iter().chain(&self.ct_coeffs).any(|c| !c.is_finite()) {
            return Err(Error::Config("surrogate coefficients must be finite".into()));
        }
        Ok(())
    }

    /// ρπr²/2, the swept-area factor of the aerodynamic terms.
    pub fn half_rho_area(&self) -> f64 {
        0.5 * self.rho * std::f64::consts::PI * self.r * self.r
    }

    pub fn tip_speed_ratio(&self, omega: f64, v: f64) -> f64 {
        self.r / self.ng * omega / v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        TurbineParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_empty_pitch_interval() {
        let p = TurbineParams {
            theta_range: [5.0, 5.0],
            ..Default::default()
        };
        assert!(p.validate().unwrap_err().is_config());
    }

    #[test]
    fn rejects_efficiency_above_one() {
        let p = TurbineParams {
            eta: 1.2,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
