//! Wind speed surrogate: a deterministic mean profile plus Ornstein–Uhlenbeck
//! turbulence with exact discretization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reflection floor for sampled wind speeds [m/s].
pub const WIND_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindScenario {
    pub mean_speed: f64,
    pub turbulence_intensity: f64,
    /// OU correlation time [s].
    pub correlation_time: f64,
    pub seed: u64,
    pub duration: f64,
    /// Mean-profile shape, see [`wind_profile`].
    pub profile: String,
    /// Ramp target speed and window, used by the `ramp` profile.
    pub ramp_end_speed: f64,
    pub ramp_start: f64,
    pub ramp_stop: f64,
    /// Optional periodic gust superimposed on the mean [m/s], [s].
    pub gust_amplitude: f64,
    pub gust_period: f64,
}

impl Default for WindScenario {
    fn default() -> Self {
        Self {
            mean_speed: 8.0,
            turbulence_intensity: 0.0,
            correlation_time: 10.0,
            seed: 0,
            duration: 600.0,
            profile: "constant".into(),
            ramp_end_speed: 8.0,
            ramp_start: 0.0,
            ramp_stop: 0.0,
            gust_amplitude: 0.0,
            gust_period: 60.0,
        }
    }
}

impl WindScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_speed > 0.0) {
            return Err(Error::Config(format!("wind.mean_speed must be positive, got {}", self.mean_speed)));
        }
        if !(self.turbulence_intensity >= 0.0) {
            return Err(Error::Config("wind.turbulence_intensity must be nonnegative".into()));
        }
        if !(self.correlation_time > 0.0) {
            return Err(Error::Config("wind.correlation_time must be positive".into()));
        }
        if !(self.duration > 0.0) {
            return Err(Error::Config("wind.duration must be positive".into()));
        }
        if self.gust_amplitude != 0.0 && !(self.gust_period > 0.0) {
            return Err(Error::Config("wind.gust_period must be positive".into()));
        }
        wind_profile(&self.profile)?;
        Ok(())
    }
}

/// Deterministic mean wind speed as a function of time.
pub trait WindProfile: Send + Sync {
    fn name(&self) -> &'static str;
    fn mean_at(&self, scenario: &WindScenario, t: f64) -> f64;
}

pub struct ConstantProfile;

impl WindProfile for ConstantProfile {
    fn name(&self) -> &'static str {
        "constant"
    }
    fn mean_at(&self, s: &WindScenario, _t: f64) -> f64 {
        s.mean_speed
    }
}

/// Linear change from `mean_speed` to `ramp_end_speed` over `[ramp_start, ramp_stop]`.
pub struct RampProfile;

impl WindProfile for RampProfile {
    fn name(&self) -> &'static str {
        "ramp"
    }
    fn mean_at(&self, s: &WindScenario, t: f64) -> f64 {
        if t <= s.ramp_start || s.ramp_stop <= s.ramp_start {
            return if t <= s.ramp_start { s.mean_speed } else { s.ramp_end_speed };
        }
        let f = ((t - s.ramp_start) / (s.ramp_stop - s.ramp_start)).min(1.0);
        s.mean_speed + f * (s.ramp_end_speed - s.mean_speed)
    }
}

pub const WIND_PROFILES: &[&str] = &["constant", "ramp"];

pub fn wind_profile(name: &str) -> Result<Box<dyn WindProfile>> {
    match name {
        "constant" => Ok(Box::new(ConstantProfile)),
        "ramp" => Ok(Box::new(RampProfile)),
        other => Err(Error::Config(format!(
            "unknown wind profile '{other}' (available: {})",
            WIND_PROFILES.join(", ")
        ))),
    }
}

/// Wind speed on a uniform time grid.
///
/// `V(t) = m(t)(1 + TI·e(t)) + A sin(2πt/T)` where `e` is a unit-variance OU
/// process started from its stationary law; values below the floor are
/// reflected.
pub fn wind_sample(scenario: &WindScenario, t_grid: &[f64]) -> Result<Vec<f64>> {
    scenario.validate()?;
    let profile = wind_profile(&scenario.profile)?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut e: f64 = StandardNormal.sample(&mut rng);
    let mut out = Vec::with_capacity(t_grid.len());
    for (k, &t) in t_grid.iter().enumerate() {
        if k > 0 {
            let h = t - t_grid[k - 1];
            let a = (-h / scenario.correlation_time).exp();
            let n: f64 = StandardNormal.sample(&mut rng);
            e = a * e + (1.0 - a * a).sqrt() * n;
        }
        let mut v = profile.mean_at(scenario, t) * (1.0 + scenario.turbulence_intensity * e);
        if scenario.gust_amplitude != 0.0 {
            v += scenario.gust_amplitude * (2.0 * std::f64::consts::PI * t / scenario.gust_period).sin();
        }
        if v < WIND_FLOOR {
            v = 2.0 * WIND_FLOOR - v;
        }
        out.push(v.max(WIND_FLOOR));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|k| k as f64 * dt).collect()
    }

    #[test]
    fn zero_turbulence_is_constant() {
        let s = WindScenario { mean_speed: 9.0, ..Default::default() };
        let v = wind_sample(&s, &grid(1000, 0.1)).unwrap();
        assert!(v.iter().all(|&x| x == 9.0));
    }

    #[test]
    fn same_seed_same_series() {
        let s = WindScenario {
            turbulence_intensity: 0.1,
            seed: 42,
            ..Default::default()
        };
        let g = grid(5000, 0.05);
        assert_eq!(wind_sample(&s, &g).unwrap(), wind_sample(&s, &g).unwrap());
        let other = WindScenario { seed: 43, ..s.clone() };
        assert_ne!(wind_sample(&other, &g).unwrap(), wind_sample(&s, &g).unwrap());
    }

    #[test]
    fn floor_reflects() {
        let s = WindScenario {
            mean_speed: 1.0,
            turbulence_intensity: 2.0,
            seed: 3,
            ..Default::default()
        };
        let v = wind_sample(&s, &grid(20_000, 0.1)).unwrap();
        assert!(v.iter().all(|&x| x >= WIND_FLOOR));
    }

    #[test]
    fn ramp_profile_endpoints() {
        let s = WindScenario {
            profile: "ramp".into(),
            mean_speed: 11.0,
            ramp_end_speed: 7.0,
            ramp_start: 10.0,
            ramp_stop: 50.0,
            ..Default::default()
        };
        let v = wind_sample(&s, &[0.0, 10.0, 30.0, 50.0, 80.0]).unwrap();
        assert_eq!(v, vec![11.0, 11.0, 9.0, 7.0, 7.0]);
    }

    #[test]
    fn unknown_profile_rejected() {
        let s = WindScenario { profile: "gusty".into(), ..Default::default() };
        assert!(s.validate().unwrap_err().is_config());
    }
}
