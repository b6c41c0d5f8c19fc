pub mod bumpless;
pub mod controller;
pub mod discretize;
pub mod mode;

pub use bumpless::{bumpless_init, BumplessSolution};
pub use controller::{clamp_input, DiscreteController, InputLimits};
pub use discretize::{discretizer, Discretizer, DISCRETIZERS};
pub use mode::{select_mode, ModeSelector, SwitchConfig};
