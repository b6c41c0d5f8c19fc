//! Simulation scenario description.

use serde::{Deserialize, Serialize};

use crate::equilibrium::Region;
use crate::error::{Error, Result};
use crate::model::WindScenario;
use crate::switching::SwitchConfig;

/// Reference change taking effect at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefStep {
    pub t: f64,
    pub p_ref: f64,
}

/// How the inputs are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlLaw {
    /// Switched loop-shaping controllers.
    #[default]
    Switched,
    /// Inputs frozen at the initial equilibrium.
    Hold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Simulated time [s]; overrides `wind.duration`.
    pub duration: f64,
    pub dt: f64,
    /// Initial power reference [W].
    pub p_ref: f64,
    pub p_ref_steps: Vec<RefStep>,
    pub wind: WindScenario,
    pub switching: SwitchConfig,
    pub bumpless: bool,
    pub control: ControlLaw,
    /// Time constant of the wind filter feeding the equilibrium solver [s].
    pub v_filter_tau: f64,
    /// Forced initial mode; chosen by the switching rule when absent.
    pub initial_mode: Option<Region>,
    /// Relative offset of the initial rotor speed from equilibrium.
    pub omega_offset: f64,
    /// Lever arm of the tower load proxy [m].
    pub tower_lever: f64,
    pub woehler_m: f64,
    pub ref_cycles: f64,
    /// Lifetime the reference cycle count refers to [years].
    pub lifetime_years: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            duration: 300.0,
            dt: 0.004,
            p_ref: 2.0e6,
            p_ref_steps: Vec::new(),
            wind: WindScenario::default(),
            switching: SwitchConfig::default(),
            bumpless: true,
            control: ControlLaw::Switched,
            v_filter_tau: 1.0,
            initial_mode: None,
            omega_offset: 0.0,
            tower_lever: 110.0,
            woehler_m: 4.0,
            ref_cycles: 1.0e7,
            lifetime_years: 20.0,
        }
    }
}

const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("scenario '{}': {m}", self.name)));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        let steps = self.duration / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return bad(format!("dt = {} does not divide duration = {}", self.dt, self.duration));
        }
        if !(self.p_ref > 0.0 && self.p_ref.is_finite()) {
            return bad(format!("p_ref must be positive, got {}", self.p_ref));
        }
        for w in self.p_ref_steps.windows(2) {
            if w[1].t < w[0].t {
                return bad("p_ref_steps must be sorted by time".into());
            }
        }
        if self.p_ref_steps.iter().any(|s| !(s.p_ref > 0.0 && s.p_ref.is_finite())) {
            return bad("p_ref_steps must have positive references".into());
        }
        if !(self.v_filter_tau > 0.0) {
            return bad("v_filter_tau must be positive".into());
        }
        if !(self.omega_offset > -1.0 && self.omega_offset.is_finite()) {
            return bad("omega_offset must exceed -1".into());
        }
        if !(self.woehler_m > 0.0 && self.ref_cycles > 0.0 && self.lifetime_years > 0.0 && self.tower_lever >= 0.0) {
            return bad("fatigue settings must be positive".into());
        }
        self.switching.validate()?;
        self.wind_for_seed(self.wind.seed).validate()
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn p_ref_at(&self, t: f64) -> f64 {
        self.p_ref_steps
            .iter()
            .take_while(|s| s.t <= t)
            .last()
            .map_or(self.p_ref, |s| s.p_ref)
    }

    pub fn wind_for_seed(&self, seed: u64) -> WindScenario {
        WindScenario {
            seed,
            duration: self.duration,
            ..self.wind.clone()
        }
    }

    /// Reference cycle count scaled from the lifetime to the simulated span.
    pub fn scaled_ref_cycles(&self) -> f64 {
        self.ref_cycles * self.duration / (self.lifetime_years * SECONDS_PER_YEAR)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_reference() {
        let s = Scenario {
            p_ref: 2e6,
            p_ref_steps: vec![RefStep { t: 10.0, p_ref: 1.6e6 }, RefStep { t: 20.0, p_ref: 1.8e6 }],
            ..Default::default()
        };
        assert_eq!(s.p_ref_at(0.0), 2e6);
        assert_eq!(s.p_ref_at(10.0), 1.6e6);
        assert_eq!(s.p_ref_at(25.0), 1.8e6);
    }

    #[test]
    fn dt_must_divide_duration() {
        let s = Scenario { duration: 1.0, dt: 0.3, ..Default::default() };
        assert!(s.validate().unwrap_err().is_config());
        let s = Scenario { duration: 300.0, dt: 0.004, ..Default::default() };
        assert_eq!(s.steps(), 75_000);
        assert!(s.validate().is_ok());
    }
}
