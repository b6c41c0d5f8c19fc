use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("matrix is not Hurwitz (spectral abscissa {abscissa:e})")]
    NotHurwitz { abscissa: f64 },
    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(String),
    #[error("frequency {omega} rad/s coincides with a system pole")]
    Resonance { omega: f64 },
    #[error("ill-posed feedback interconnection (I - D1 D2 singular)")]
    AlgebraicLoop,
    #[error("H-infinity norm unbounded: system not stable (spectral abscissa {abscissa:e})")]
    UnboundedNorm { abscissa: f64 },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("unknown {kind} '{name}' (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
}

pub type Result<T> = std::result::Result<T, LinalgError>;
