//! Nonlinear turbine model, aerodynamic surrogates and wind generation.

pub mod aero;
pub mod dynamics;
pub mod params;
pub mod wind;

pub use aero::{cp_eval, ct_eval, Surrogate};
pub use dynamics::{dynamics, integrate_step, output_map, InputVec, OutputVec, StateVec, OMEGA_FLOOR};
pub use params::TurbineParams;
pub use wind::{wind_sample, WindScenario};
