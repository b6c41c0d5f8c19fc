pub mod io;
pub mod metrics;
pub mod rainflow;
pub mod run;
pub mod scenario;

pub use metrics::{compute_metrics, rms_error, Metrics};
pub use rainflow::{del, rainflow, Cycle};
pub use run::{run, Controllers, Fault, SimRecord, SimTrace, SwitchEvent};
pub use scenario::{ControlLaw, RefStep, Scenario};
