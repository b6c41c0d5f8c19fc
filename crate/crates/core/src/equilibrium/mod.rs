//! Operating points for both regions and the power-to-speed table.

pub mod lut;
pub mod maximizer;
pub mod op;

pub use lut::PowerSpeedLut;
pub use maximizer::{cp_maximizer, CpOptimum};
pub use op::{largest_pitch_root, scaled_residual, OperatingPoint, Region, Turbine};
