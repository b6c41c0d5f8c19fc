//! Fixed-step closed-loop simulation of the nonlinear turbine.

use log::debug;
use serde::{Deserialize, Serialize};
use windshape_linalg::StateSpace;

use crate::equilibrium::{OperatingPoint, Region, Turbine};
use crate::error::{Error, Result};
use crate::model::{integrate_step, output_map, wind_sample, InputVec, OutputVec, StateVec};
use crate::sim::scenario::{ControlLaw, Scenario};
use crate::switching::{clamp_input, DiscreteController, InputLimits, ModeSelector};

/// Discrete realizations of both controllers, sampled at the scenario step.
#[derive(Debug, Clone)]
pub struct Controllers {
    pub k2: StateSpace,
    pub k3: StateSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub t: f64,
    pub v: f64,
    pub x: StateVec,
    pub u: InputVec,
    pub y: OutputVec,
    pub mode: Region,
    pub p_ref: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub t: f64,
    pub from: Region,
    pub to: Region,
    pub u_prev: InputVec,
    /// Unclamped command of the incoming controller at the switch instant.
    pub u_cmd: InputVec,
    pub u_applied: InputVec,
    /// Largest per-channel command jump, normalized by the input range.
    pub jump: f64,
    pub lsq_cost: f64,
    pub zero_state_cost: f64,
    /// Relative least-squares gradient at the returned state.
    pub kkt_gradient: f64,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fault {
    pub t: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub records: Vec<SimRecord>,
    pub switches: Vec<SwitchEvent>,
    pub fault: Option<Fault>,
    pub dt: f64,
}

struct PendingSwitch {
    t: f64,
    from: Region,
    to: Region,
    u_prev: InputVec,
    lsq_cost: f64,
    zero_state_cost: f64,
    kkt_gradient: f64,
    fallback: bool,
}

fn equilibrium(turbine: &Turbine, mode: Region, v: f64, p_ref: f64) -> Result<OperatingPoint> {
    turbine.operating_point(mode, v, p_ref)
}

/// Simulates `scenario` with wind seed `seed`. Leaving the model domain
/// truncates the trace and records a fault instead of failing.
pub fn run(turbine: &Turbine, scenario: &Scenario, controllers: &Controllers, seed: u64) -> Result<SimTrace> {
    scenario.validate()?;
    let params = &turbine.params;
    let dt = scenario.dt;
    let n = scenario.steps();
    let t_grid: Vec<f64> = (0..=n).map(|k| scenario.time(k)).collect();
    let wind = wind_sample(&scenario.wind_for_seed(seed), &t_grid)?;
    let limits = InputLimits::from_params(params);
    let cp_star = turbine.optimum.cp;

    let p_ref0 = scenario.p_ref_at(0.0);
    let mut v_filt = wind[0];
    let mode0 = scenario.initial_mode.unwrap_or_else(|| {
        crate::switching::select_mode(v_filt, p_ref0, &scenario.switching, params, cp_star)
    });
    let op0 = equilibrium(turbine, mode0, v_filt, p_ref0)
        .map_err(|e| Error::Config(format!("scenario '{}': no initial equilibrium: {e}", scenario.name)))?;

    let mut k2 = DiscreteController::new(Region::Two, controllers.k2.clone(), op0)?;
    let mut k3 = DiscreteController::new(Region::Three, controllers.k3.clone(), op0)?;
    for k in [&k2, &k3] {
        if (k.dt - dt).abs() > 1e-12 * dt {
            return Err(Error::Config(format!(
                "controller sample time {} differs from scenario dt {dt}",
                k.dt
            )));
        }
    }
    let mut selector = ModeSelector::new(scenario.switching, mode0, p_ref0);

    let mut x = op0.x0;
    x.omega *= 1.0 + scenario.omega_offset;
    let mut u_prev = op0.u0;
    let mut y_prev = output_map(params, x, u_prev, wind[0])?;

    let mut records = Vec::with_capacity(n + 1);
    let mut switches = Vec::new();
    let mut fault = None;

    for k in 0..n {
        let t = t_grid[k];
        let v = wind[k];
        v_filt += dt / scenario.v_filter_tau * (v - v_filt);
        let p_ref = scenario.p_ref_at(t);
        let mut pending = None;

        if scenario.control == ControlLaw::Switched {
            if let Some(want) = selector.proposal(t, v_filt, p_ref, params, cp_star) {
                if let Ok(op) = equilibrium(turbine, want, v_filt, p_ref) {
                    let from = selector.mode();
                    let incoming = if want == Region::Two { &mut k2 } else { &mut k3 };
                    incoming.op = op;
                    let sol = incoming.initialize_from(u_prev, y_prev);
                    if !scenario.bumpless {
                        incoming.reset();
                    }
                    selector.commit(t, want);
                    debug!("t = {t:.3}: mode {from} -> {want}");
                    pending = Some(PendingSwitch {
                        t,
                        from,
                        to: want,
                        u_prev,
                        lsq_cost: sol.cost,
                        zero_state_cost: sol.zero_state_cost,
                        kkt_gradient: sol.gradient_rel,
                        fallback: sol.fallback,
                    });
                }
            }
        }
        selector.observe_reference(p_ref);
        let mode = selector.mode();
        let active = if mode == Region::Two { &mut k2 } else { &mut k3 };
        if let Ok(op) = equilibrium(turbine, mode, v_filt, p_ref) {
            active.op = op;
        }

        let y_meas = match output_map(params, x, u_prev, v) {
            Ok(y) => y,
            Err(e) => {
                fault = Some(Fault { t, message: e.to_string() });
                break;
            }
        };
        let u = match scenario.control {
            ControlLaw::Switched => {
                let cmd = active.step(y_meas);
                let u = clamp_input(cmd, u_prev, &limits, dt);
                if let Some(p) = pending {
                    let d = limits.normalized(InputVec {
                        theta: cmd.theta - p.u_prev.theta,
                        mg: cmd.mg - p.u_prev.mg,
                    });
                    switches.push(SwitchEvent {
                        t: p.t,
                        from: p.from,
                        to: p.to,
                        u_prev: p.u_prev,
                        u_cmd: cmd,
                        u_applied: u,
                        jump: d[0].abs().max(d[1].abs()),
                        lsq_cost: p.lsq_cost,
                        zero_state_cost: p.zero_state_cost,
                        kkt_gradient: p.kkt_gradient,
                        fallback: p.fallback,
                    });
                }
                u
            }
            ControlLaw::Hold => u_prev,
        };
        let y = output_map(params, x, u, v)?;
        records.push(SimRecord { t, v, x, u, y, mode, p_ref });

        let next = integrate_step(params, x, u, v, dt).and_then(|xn| {
            if xn.to_array().iter().all(|s| s.is_finite()) {
                Ok(xn)
            } else {
                Err(Error::IntegrationFault { t, message: "non-finite state".into() })
            }
        });
        match next {
            Ok(xn) => x = xn,
            Err(e) => {
                fault = Some(Fault { t: t + dt, message: e.to_string() });
                break;
            }
        }
        u_prev = u;
        y_prev = y_meas;
    }

    if fault.is_none() {
        let t = t_grid[n];
        let p_ref = scenario.p_ref_at(t);
        let y = output_map(params, x, u_prev, wind[n])?;
        records.push(SimRecord {
            t,
            v: wind[n],
            x,
            u: u_prev,
            y,
            mode: selector.mode(),
            p_ref,
        });
    }
    Ok(SimTrace { records, switches, fault, dt })
}
