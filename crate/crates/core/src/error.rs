use thiserror::Error;
use windshape_linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("outside operating envelope: {0}")]
    Envelope(String),
    #[error("infeasible power reference {p_ref:.1} W at wind speed {v:.3} m/s: {reason}")]
    InfeasibleReference { v: f64, p_ref: f64, reason: String },
    #[error("synthesis failed in step {step}: {message}")]
    Synthesis { step: SynthesisStep, message: String },
    #[error("integration fault at t = {t:.3} s: {message}")]
    IntegrationFault { t: f64, message: String },
    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Stages of the loop-shaping pipeline, used to name the failing step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisStep {
    /// (a) shaping and coprime factorization
    Factorize,
    /// (b) optimal cost
    GammaMin,
    /// (c) central controller
    Controller,
    /// (d) weights folded back and discretized
    Deaugment,
    /// (e) closed-loop and robustness checks
    Verify,
}

impl std::fmt::Display for SynthesisStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Factorize => "(a) shaped plant / normalized coprime factorization",
            Self::GammaMin => "(b) minimal cost gamma_min",
            Self::Controller => "(c) suboptimal central controller",
            Self::Deaugment => "(d) controller de-augmentation / discretization",
            Self::Verify => "(e) closed-loop verification",
        };
        f.write_str(s)
    }
}

impl Error {
    pub fn synthesis(step: SynthesisStep, err: impl std::fmt::Display) -> Self {
        Self::Synthesis {
            step,
            message: err.to_string(),
        }
    }

    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Self::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
