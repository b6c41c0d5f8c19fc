//! Continuous-to-discrete conversion of controller realizations.

use windshape_linalg::dense::{inverse, Mat};
use windshape_linalg::expm::expm;
use windshape_linalg::{StateSpace, TimeDomain};

use crate::error::{Error, Result};

pub trait Discretizer: Send + Sync {
    fn name(&self) -> &'static str;
    fn discretize(&self, sys: &StateSpace, dt: f64) -> Result<StateSpace>;
}

/// Trapezoidal (Tustin) rule without prewarping.
pub struct Bilinear;

/// Exact sampling with the input held over each period.
pub struct ZeroOrderHold;

fn check(sys: &StateSpace, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("sample time must be positive, got {dt}")));
    }
    if !sys.is_continuous() {
        return Err(Error::Domain("system is already discrete".into()));
    }
    Ok(())
}

impl Discretizer for Bilinear {
    fn name(&self) -> &'static str {
        "bilinear"
    }

    fn discretize(&self, sys: &StateSpace, dt: f64) -> Result<StateSpace> {
        check(sys, dt)?;
        let n = sys.nstates();
        let time = TimeDomain::Discrete { dt };
        if n == 0 {
            return Ok(StateSpace { time, ..sys.clone() });
        }
        let id = Mat::identity(n, n);
        let half = &sys.a * (0.5 * dt);
        let m = inverse(&(&id - &half), "I − A·dt/2").map_err(|_| {
            Error::Domain(format!("a controller pole sits at the bilinear singularity 2/dt = {}", 2.0 / dt))
        })?;
        let ad = &m * (&id + &half);
        let bd = &m * &sys.b * dt;
        let cd = &sys.c * &m;
        let dd = &sys.d + &sys.c * &m * &sys.b * (0.5 * dt);
        Ok(StateSpace::with_time(ad, bd, cd, dd, time)?)
    }
}

impl Discretizer for ZeroOrderHold {
    fn name(&self) -> &'static str {
        "zoh"
    }

    fn discretize(&self, sys: &StateSpace, dt: f64) -> Result<StateSpace> {
        check(sys, dt)?;
        let (n, m) = (sys.nstates(), sys.ninputs());
        let time = TimeDomain::Discrete { dt };
        let mut big = Mat::zeros(n + m, n + m);
        big.view_mut((0, 0), (n, n)).copy_from(&(&sys.a * dt));
        big.view_mut((0, n), (n, m)).copy_from(&(&sys.b * dt));
        let e = expm(&big)?;
        let ad = e.view((0, 0), (n, n)).clone_owned();
        let bd = e.view((0, n), (n, m)).clone_owned();
        Ok(StateSpace::with_time(ad, bd, sys.c.clone(), sys.d.clone(), time)?)
    }
}

pub const DISCRETIZERS: &[&str] = &["bilinear", "zoh"];

pub fn discretizer(name: &str) -> Result<Box<dyn Discretizer>> {
    match name {
        "bilinear" => Ok(Box::new(Bilinear)),
        "zoh" => Ok(Box::new(ZeroOrderHold)),
        other => Err(Error::Config(format!(
            "unknown discretizer '{other}' (available: {})",
            DISCRETIZERS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn integrator() -> StateSpace {
        StateSpace::new(
            Mat::zeros(1, 1),
            Mat::from_element(1, 1, 1.0),
            Mat::from_element(1, 1, 1.0),
            Mat::zeros(1, 1),
        )
        .unwrap()
    }

    #[test]
    fn static_gain_unchanged() {
        let g = StateSpace::gain(Mat::from_element(2, 1, 3.0));
        let d = Bilinear.discretize(&g, 0.004).unwrap();
        assert_eq!(d.d, g.d);
        assert_eq!(d.time, TimeDomain::Discrete { dt: 0.004 });
    }

    #[test]
    fn integrator_closed_form() {
        let dt = 0.004;
        let d = Bilinear.discretize(&integrator(), dt).unwrap();
        assert_eq!(d.a[(0, 0)], 1.0);
        for w in [0.01, 0.3, 2.0] {
            let z = Complex64::from_polar(1.0, w * dt);
            let want = (z + 1.0) * dt / ((z - 1.0) * 2.0);
            let got = d.freq_response(w).unwrap()[(0, 0)];
            assert!((got - want).norm() < 1e-9 * want.norm());
            let cont = Complex64::new(0.0, w).inv();
            assert!((got - cont).norm() < 1e-3 * cont.norm());
        }
    }

    #[test]
    fn singular_transform_rejected() {
        let dt = 0.004;
        let g = StateSpace::new(
            Mat::from_element(1, 1, 2.0 / dt),
            Mat::from_element(1, 1, 1.0),
            Mat::from_element(1, 1, 1.0),
            Mat::zeros(1, 1),
        )
        .unwrap();
        assert!(Bilinear.discretize(&g, dt).is_err());
    }

    #[test]
    fn zoh_first_order_lag() {
        let g = StateSpace::new(
            Mat::from_element(1, 1, -2.0),
            Mat::from_element(1, 1, 1.0),
            Mat::from_element(1, 1, 1.0),
            Mat::zeros(1, 1),
        )
        .unwrap();
        let d = ZeroOrderHold.discretize(&g, 0.1).unwrap();
        assert!((d.a[(0, 0)] - (-0.2f64).exp()).abs() < 1e-15);
        assert!((d.b[(0, 0)] - (1.0 - (-0.2f64).exp()) / 2.0).abs() < 1e-15);
        assert!(discretizer("euler").is_err());
    }
}
