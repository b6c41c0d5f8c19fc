//! Steady states for power maximization (region 2) and reference tracking (region 3).

use serde::{Deserialize, Serialize};

use crate::equilibrium::lut::PowerSpeedLut;
use crate::equilibrium::maximizer::{cp_maximizer, golden_max, CpOptimum};
use crate::error::{Error, Result};
use crate::model::{dynamics, output_map, InputVec, OutputVec, StateVec, Surrogate, TurbineParams};

/// Operating region / controller mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Region {
    Two,
    Three,
}

impl From<Region> for u8 {
    fn from(r: Region) -> u8 {
        match r {
            Region::Two => 2,
            Region::Three => 3,
        }
    }
}

impl TryFrom<u8> for Region {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            2 => Ok(Region::Two),
            3 => Ok(Region::Three),
            other => Err(format!("region must be 2 or 3, got {other}")),
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub x0: StateVec,
    pub u0: InputVec,
    pub y0: OutputVec,
    pub v0: f64,
    pub region: Region,
    pub p_ref: Option<f64>,
}

/// Pitch grid spacing used to bracket the largest root of the power balance.
const PITCH_SCAN_STEP: f64 = 0.25;

/// Turbine parameters bundled with the cached power-coefficient optimum and
/// the power-to-speed table.
#[derive(Debug, Clone)]
pub struct Turbine {
    pub params: TurbineParams,
    pub optimum: CpOptimum,
    pub lut: PowerSpeedLut,
}

impl Turbine {
    pub fn new(params: TurbineParams) -> Result<Self> {
        params.validate()?;
        let optimum = cp_maximizer(&params)?;
        let lut = PowerSpeedLut::for_turbine(&params, &optimum)?;
        Ok(Self { params, optimum, lut })
    }

    /// Electrical power extractable at the coefficient optimum.
    pub fn available_power(&self, v: f64) -> f64 {
        let p = &self.params;
        p.eta * p.half_rho_area() * v.powi(3) * self.optimum.cp
    }

    fn tower_position(&self, v: f64, lambda: f64, theta: f64) -> Result<f64> {
        let p = &self.params;
        let ct = Surrogate::thrust(p).eval(lambda, theta)?;
        Ok(p.half_rho_area() / p.kt * v * v * ct)
    }

    fn check_inputs(&self, u: InputVec, omega: f64) -> Result<()> {
        let p = &self.params;
        let [tl, th] = p.theta_range;
        let [ml, mh] = p.mg_range;
        if !(u.theta >= tl && u.theta <= th) {
            return Err(Error::Envelope(format!("equilibrium pitch {:.4} deg outside [{tl}, {th}]", u.theta)));
        }
        if !(u.mg >= ml && u.mg <= mh) {
            return Err(Error::Envelope(format!("equilibrium torque {:.1} N·m outside [{ml}, {mh}]", u.mg)));
        }
        if omega > p.omega_max * (1.0 + 1e-12) {
            return Err(Error::Envelope(format!(
                "equilibrium speed {omega:.3} rad/s exceeds omega_max = {}",
                p.omega_max
            )));
        }
        Ok(())
    }

    /// Power-maximizing steady state at wind speed `v0`.
    pub fn region2(&self, v0: f64) -> Result<OperatingPoint> {
        if !(v0 > 0.0) {
            return Err(Error::Domain(format!("wind speed must be positive, got {v0}")));
        }
        let p = &self.params;
        let opt = &self.optimum;
        let omega = p.ng * opt.lambda * v0 / p.r;
        let mg = p.half_rho_area() * v0.powi(3) * opt.cp / omega;
        let u0 = InputVec { theta: opt.theta, mg };
        self.check_inputs(u0, omega)?;
        let x0 = StateVec {
            omega,
            xt: self.tower_position(v0, opt.lambda, opt.theta)?,
            vt: 0.0,
        };
        Ok(OperatingPoint {
            x0,
            u0,
            y0: output_map(p, x0, u0, v0)?,
            v0,
            region: Region::Two,
            p_ref: None,
        })
    }

    /// Reference-tracking steady state delivering exactly `p_ref` at `v0`.
    pub fn region3(&self, v0: f64, p_ref: f64) -> Result<OperatingPoint> {
        if !(v0 > 0.0) {
            return Err(Error::Domain(format!("wind speed must be positive, got {v0}")));
        }
        let infeasible = |reason: String| Error::InfeasibleReference { v: v0, p_ref, reason };
        let p = &self.params;
        let omega = self
            .lut
            .lookup(p_ref)
            .ok_or_else(|| infeasible(format!(
                "reference outside lookup table [{:.1}, {:.1}] W",
                self.lut.p_min(),
                self.lut.p_max()
            )))?;
        let lambda = p.tip_speed_ratio(omega, v0);
        let target = p_ref / (p.eta * p.half_rho_area() * v0.powi(3));
        let theta = largest_pitch_root(p, lambda, target).map_err(|e| match e {
            Error::InfeasibleReference { reason, .. } => infeasible(reason),
            other => other,
        })?;
        let mg = p_ref / (p.eta * omega);
        let u0 = InputVec { theta, mg };
        self.check_inputs(u0, omega)?;
        let x0 = StateVec {
            omega,
            xt: self.tower_position(v0, lambda, theta)?,
            vt: 0.0,
        };
        let mut y0 = output_map(p, x0, u0, v0)?;
        // η·ω·(P/(ηω)) can differ from P in the last bit
        y0.p = p_ref;
        Ok(OperatingPoint {
            x0,
            u0,
            y0,
            v0,
            region: Region::Three,
            p_ref: Some(p_ref),
        })
    }

    pub fn operating_point(&self, region: Region, v0: f64, p_ref: f64) -> Result<OperatingPoint> {
        match region {
            Region::Two => self.region2(v0),
            Region::Three => self.region3(v0, p_ref),
        }
    }

    /// Table restricted to references that are attainable at `v0`, with each
    /// entry checked against the power balance.
    pub fn build_lut(&self, v0: f64) -> Result<PowerSpeedLut> {
        let p_hi = self.params.p_rated.min(self.available_power(v0));
        let p_lo = self.lut.p_min();
        if p_hi <= p_lo {
            return Err(Error::InfeasibleReference {
                v: v0,
                p_ref: p_lo,
                reason: "available power below the lowest table entry".into(),
            });
        }
        let lut = PowerSpeedLut::over(&self.params, &self.optimum, p_lo, p_hi)?;
        for (&pw, &w) in lut.power.iter().zip(&lut.omega) {
            let lambda = self.params.tip_speed_ratio(w, v0);
            let target = pw / (self.params.eta * self.params.half_rho_area() * v0.powi(3));
            largest_pitch_root(&self.params, lambda, target)?;
        }
        Ok(lut)
    }
}

/// Largest θ in the pitch range with `Cp(λ, θ) = target`.
pub fn largest_pitch_root(params: &TurbineParams, lambda: f64, target: f64) -> Result<f64> {
    let s = Surrogate::power(params);
    let [lo, hi] = params.theta_range;
    let f = |t: f64| s.eval(lambda, t).map(|c| c - target);
    let infeasible = |reason: String| Error::InfeasibleReference { v: f64::NAN, p_ref: f64::NAN, reason };
    let mut upper = hi;
    let mut f_upper = f(hi)?;
    if f_upper > 0.0 {
        return Err(Error::Envelope(format!(
            "pitch saturated: Cp({lambda:.4}, {hi}) exceeds the required {target:.6}"
        )));
    }
    if f_upper == 0.0 {
        return Ok(hi);
    }
    let mut best = (hi, f_upper);
    loop {
        let t = (upper - PITCH_SCAN_STEP).max(lo);
        let ft = f(t)?;
        if ft >= 0.0 {
            return bisect(&f, t, upper);
        }
        if ft > best.1 {
            best = (t, ft);
        }
        if t <= lo {
            break;
        }
        upper = t;
        f_upper = ft;
    }
    let _ = f_upper;
    // no sign change on the grid: the target may touch the peak tangentially
    let a = (best.0 - PITCH_SCAN_STEP).max(lo);
    let b = (best.0 + PITCH_SCAN_STEP).min(hi);
    let (t_peak, c_peak) = golden_max(|t| s.eval(lambda, t).unwrap_or(0.0), a, b, 1e-12);
    if c_peak >= target * (1.0 - 1e-9) {
        return Ok(t_peak);
    }
    Err(infeasible(format!(
        "required Cp {target:.6} exceeds the attainable maximum {c_peak:.6} at lambda = {lambda:.4}"
    )))
}

/// Bisection on `[a, b]` with `f(a) ≥ 0 > f(b)`.
fn bisect<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64) -> Result<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m)? >= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(a)
}

/// `‖f(x°, u°, V°)‖∞` with each component divided by the size of the terms it balances.
pub fn scaled_residual(params: &TurbineParams, op: &OperatingPoint) -> Result<f64> {
    let d = dynamics(params, op.x0, op.u0, op.v0)?;
    let ng2_j = params.ng * params.ng / params.jt;
    let torque_scale = ng2_j * op.u0.mg.abs().max(1.0);
    let thrust = params.half_rho_area() / params.mt
        * op.v0
        * op.v0
        * Surrogate::thrust(params).eval(params.tip_speed_ratio(op.x0.omega, op.v0), op.u0.theta)?;
    let tower_scale = thrust.abs().max(params.kt / params.mt * op.x0.xt.abs()).max(1e-9);
    Ok((d.omega.abs() / torque_scale)
        .max(d.xt.abs())
        .max(d.vt.abs() / tower_scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn turbine() -> Turbine {
        Turbine::new(TurbineParams::default()).unwrap()
    }

    #[test]
    fn region2_scaling_laws() {
        let t = turbine();
        let a = t.region2(4.0).unwrap();
        let b = t.region2(8.0).unwrap();
        assert!((b.u0.mg / a.u0.mg - 4.0).abs() < 1e-12);
        assert!((b.x0.xt / a.x0.xt - 4.0).abs() < 1e-12);
        assert!(scaled_residual(&t.params, &b).unwrap() < 1e-8);
    }

    #[test]
    fn region2_speed_limit() {
        let t = turbine();
        assert!(matches!(t.region2(12.0), Err(Error::Envelope(_))));
    }

    #[test]
    fn region3_hits_reference_exactly() {
        let t = turbine();
        let op = t.region3(13.0, 2.0e6).unwrap();
        assert_eq!(op.y0.p, 2.0e6);
        assert!(op.u0.theta > 0.0);
        assert!(scaled_residual(&t.params, &op).unwrap() < 1e-8);
    }

    #[test]
    fn region3_matches_region2_at_available_power() {
        let t = turbine();
        let v = 8.0;
        let p2 = t.region2(v).unwrap();
        let p3 = t.region3(v, p2.y0.p).unwrap();
        assert!((p3.x0.omega - p2.x0.omega).abs() < 1e-6 * p2.x0.omega);
        assert!((p3.u0.mg - p2.u0.mg).abs() < 1e-6 * p2.u0.mg);
        assert!((p3.u0.theta - p2.u0.theta).abs() < 1e-3);
    }

    #[test]
    fn region3_rejects_excess_reference() {
        let t = turbine();
        let p_av = t.available_power(7.0);
        assert!(matches!(t.region3(7.0, 1.01 * p_av), Err(Error::InfeasibleReference { .. })));
        assert!(t.region3(15.0, 5.0e6).is_err());
    }

    #[test]
    fn region_serializes_as_number() {
        assert_eq!(serde_json::to_string(&Region::Three).unwrap(), "3");
        assert!(serde_json::from_str::<Region>("4").is_err());
    }
}
