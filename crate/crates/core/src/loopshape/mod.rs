//! Loop-shaping design: weights, coprime factors, central controller and
//! coprime-uncertainty robustness analysis.

pub mod ncf;
pub mod robust;
pub mod synth;
pub mod weights;

pub use ncf::{gamma_min, nlcf, CoprimeFactors};
pub use robust::{coprime_margin, robustness_sweep, MarginPoint, SweepGrid};
pub use synth::{achieved_cost, central_controller, deaugment, shape_plant, synthesize, SynthesisOptions, SynthesisResult};
pub use weights::{WeightElement, WeightSpec};
