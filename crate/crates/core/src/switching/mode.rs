//! Wind-power based choice between the power-maximizing and the tracking controller.

use serde::{Deserialize, Serialize};

use crate::equilibrium::Region;
use crate::error::{Error, Result};
use crate::model::TurbineParams;

/// Slack on dwell-time comparisons of sample instants `k·dt`.
const DWELL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwitchConfig {
    /// Required ratio between available power and the reference.
    pub beta_rel: f64,
    /// Minimum time between mode changes [s].
    pub hysteresis_hold: f64,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        Self {
            beta_rel: 1.05,
            hysteresis_hold: 1.0,
        }
    }
}

impl SwitchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_rel > 1.0 && self.beta_rel.is_finite()) {
            return Err(Error::Config(format!("beta_rel must exceed 1, got {}", self.beta_rel)));
        }
        if !(self.hysteresis_hold >= 0.0 && self.hysteresis_hold.is_finite()) {
            return Err(Error::Config(format!(
                "hysteresis_hold must be nonnegative, got {}",
                self.hysteresis_hold
            )));
        }
        Ok(())
    }
}

/// Memoryless rule: tracking mode iff the electrical power available at the
/// coefficient optimum strictly exceeds `beta_rel · p_ref`.
pub fn select_mode(v: f64, p_ref: f64, cfg: &SwitchConfig, params: &TurbineParams, cp_star: f64) -> Region {
    let available = params.eta * params.half_rho_area() * v.powi(3) * cp_star;
    if available > cfg.beta_rel * p_ref {
        Region::Three
    } else {
        Region::Two
    }
}

/// Applies [`select_mode`] with a dwell time; a change of `p_ref` lifts the dwell.
#[derive(Debug, Clone)]
pub struct ModeSelector {
    cfg: SwitchConfig,
    mode: Region,
    last_switch: Option<f64>,
    last_p_ref: f64,
}

impl ModeSelector {
    pub fn new(cfg: SwitchConfig, initial: Region, p_ref: f64) -> Self {
        Self {
            cfg,
            mode: initial,
            last_switch: None,
            last_p_ref: p_ref,
        }
    }

    pub fn mode(&self) -> Region {
        self.mode
    }

    pub fn last_switch(&self) -> Option<f64> {
        self.last_switch
    }

    /// Mode the rule asks for at time `t`, honouring the dwell time. Does not commit.
    pub fn proposal(&self, t: f64, v: f64, p_ref: f64, params: &TurbineParams, cp_star: f64) -> Option<Region> {
        let want = select_mode(v, p_ref, &self.cfg, params, cp_star);
        if want == self.mode {
            return None;
        }
        let reference_stepped = p_ref != self.last_p_ref;
        let dwelled = self
            .last_switch
            .is_none_or(|ts| t - ts >= self.cfg.hysteresis_hold - DWELL_SLACK);
        (dwelled || reference_stepped).then_some(want)
    }

    pub fn commit(&mut self, t: f64, mode: Region) {
        if mode != self.mode {
            self.mode = mode;
            self.last_switch = Some(t);
        }
    }

    /// Records the reference seen at this step; call once per step after deciding.
    pub fn observe_reference(&mut self, p_ref: f64) {
        self.last_p_ref = p_ref;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CP: f64 = 0.48;

    fn threshold_speed(p: &TurbineParams, cfg: &SwitchConfig, p_ref: f64) -> f64 {
        (cfg.beta_rel * p_ref / (p.eta * p.half_rho_area() * CP)).cbrt()
    }

    #[test]
    fn infinite_reference_never_tracks() {
        let p = TurbineParams::default();
        assert_eq!(select_mode(40.0, f64::INFINITY, &SwitchConfig::default(), &p, CP), Region::Two);
    }

    #[test]
    fn boundary_is_region_two() {
        let p = TurbineParams::default();
        let cfg = SwitchConfig::default();
        let v_star = threshold_speed(&p, &cfg, 2e6);
        let p_at = p.eta * p.half_rho_area() * v_star.powi(3) * CP / cfg.beta_rel;
        if p.eta * p.half_rho_area() * v_star.powi(3) * CP == cfg.beta_rel * p_at {
            assert_eq!(select_mode(v_star, p_at, &cfg, &p, CP), Region::Two);
        }
        assert_eq!(select_mode(v_star * (1.0 - 1e-12), 2e6, &cfg, &p, CP), Region::Two);
        assert_eq!(select_mode(v_star * (1.0 + 1e-12), 2e6, &cfg, &p, CP), Region::Three);
    }

    #[test]
    fn monotone_in_wind() {
        let p = TurbineParams::default();
        let cfg = SwitchConfig::default();
        for p_ref in [5e5, 2e6, 3.4e6] {
            let mut seen_three = false;
            for i in 0..2000 {
                let m = select_mode(0.5 + i as f64 * 0.01, p_ref, &cfg, &p, CP);
                if seen_three {
                    assert_eq!(m, Region::Three);
                }
                seen_three |= m == Region::Three;
            }
            assert!(seen_three);
        }
    }

    #[test]
    fn dwell_blocks_until_reference_steps() {
        let p = TurbineParams::default();
        let cfg = SwitchConfig { beta_rel: 1.05, hysteresis_hold: 1.0 };
        let mut sel = ModeSelector::new(cfg, Region::Two, 2e6);
        assert_eq!(sel.proposal(0.0, 12.0, 2e6, &p, CP), Some(Region::Three));
        sel.commit(0.0, Region::Three);
        sel.observe_reference(2e6);
        assert_eq!(sel.proposal(0.5, 5.0, 2e6, &p, CP), None);
        assert_eq!(sel.proposal(1.0, 5.0, 2e6, &p, CP), Some(Region::Two));
        assert_eq!(sel.proposal(0.5, 5.0, 1e5, &p, CP), None, "low reference keeps mode 3");
        assert_eq!(sel.proposal(0.5, 5.0, 3e6, &p, CP), Some(Region::Two), "reference step bypasses dwell");
    }

    #[test]
    fn config_validation() {
        assert!(SwitchConfig { beta_rel: 1.0, hysteresis_hold: 1.0 }.validate().is_err());
        assert!(SwitchConfig { beta_rel: 1.1, hysteresis_hold: -1.0 }.validate().is_err());
        assert!(SwitchConfig::default().validate().is_ok());
    }
}
