//! Scalar summaries of a simulation trace.

use serde::{Deserialize, Serialize};

use crate::equilibrium::Region;
use crate::error::{Error, Result};
use crate::model::TurbineParams;
use crate::sim::rainflow::del;
use crate::sim::run::SimTrace;
use crate::sim::scenario::Scenario;

/// RMS of `p − p_ref` over tracking-mode samples.
pub fn rms_error(trace: &SimTrace) -> Result<f64> {
    let errs: Vec<f64> = trace
        .records
        .iter()
        .filter(|r| r.mode == Region::Three)
        .map(|r| r.y.p - r.p_ref)
        .collect();
    if errs.is_empty() {
        return Err(Error::UndefinedMetric("no tracking-mode samples".into()));
    }
    Ok((errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt())
}

/// Trapezoidal integral of electrical power [J].
pub fn total_energy(trace: &SimTrace) -> f64 {
    trace
        .records
        .windows(2)
        .map(|w| 0.5 * (w[0].y.p + w[1].y.p) * (w[1].t - w[0].t))
        .sum()
}

/// Fractions of samples spent in modes 2 and 3.
pub fn mode_occupancy(trace: &SimTrace) -> [f64; 2] {
    let n = trace.records.len();
    if n == 0 {
        return [0.0, 0.0];
    }
    let three = trace.records.iter().filter(|r| r.mode == Region::Three).count();
    [(n - three) as f64 / n as f64, three as f64 / n as f64]
}

/// Largest `p − p_ref` over tracking-mode samples.
pub fn max_overshoot(trace: &SimTrace) -> Option<f64> {
    trace
        .records
        .iter()
        .filter(|r| r.mode == Region::Three)
        .map(|r| r.y.p - r.p_ref)
        .reduce(f64::max)
}

/// Tower-base fore-aft moment proxy `Kt · xt · lever`.
pub fn tower_moment_proxy(trace: &SimTrace, params: &TurbineParams, lever: f64) -> Vec<f64> {
    trace.records.iter().map(|r| params.kt * r.x.xt * lever).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `None` when the run never entered the tracking mode.
    pub rms_tracking_error: Option<f64>,
    pub total_energy: f64,
    pub occupancy_mode2: f64,
    pub occupancy_mode3: f64,
    pub del_tower: f64,
    pub max_overshoot: Option<f64>,
    pub switch_count: usize,
    pub max_switch_jump: Option<f64>,
    pub max_kkt_gradient: Option<f64>,
    pub samples: usize,
    pub fault: Option<String>,
}

pub fn compute_metrics(trace: &SimTrace, params: &TurbineParams, scenario: &Scenario) -> Metrics {
    let [o2, o3] = mode_occupancy(trace);
    let proxy = tower_moment_proxy(trace, params, scenario.tower_lever);
    let max_of = |f: &dyn Fn(&crate::sim::run::SwitchEvent) -> f64| trace.switches.iter().map(f).reduce(f64::max);
    Metrics {
        rms_tracking_error: rms_error(trace).ok(),
        total_energy: total_energy(trace),
        occupancy_mode2: o2,
        occupancy_mode3: o3,
        del_tower: del(&proxy, scenario.woehler_m, scenario.scaled_ref_cycles()),
        max_overshoot: max_overshoot(trace),
        switch_count: trace.switches.len(),
        max_switch_jump: max_of(&|s| s.jump),
        max_kkt_gradient: max_of(&|s| s.kkt_gradient),
        samples: trace.records.len(),
        fault: trace.fault.as_ref().map(|f| format!("t = {}: {}", f.t, f.message)),
    }
}
