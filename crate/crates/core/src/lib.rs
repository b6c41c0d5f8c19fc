pub mod config;
pub mod equilibrium;
pub mod error;
pub mod linearize;
pub mod loopshape;
pub mod model;
pub mod parallel;
pub mod pipeline;
pub mod sim;
pub mod switching;

pub use error::{Error, Result};
pub use windshape_linalg as linalg;
