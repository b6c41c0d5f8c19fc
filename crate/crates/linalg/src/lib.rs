//! Dense numerical kernels for linear control design: real Schur with
//! eigenvalue reordering, Lyapunov and Riccati solvers, state-space algebra,
//! minimal realization and H∞ norm computation.

pub mod balance;
pub mod care;
pub mod dense;
pub mod error;
pub mod expm;
pub mod gramian;
pub mod hinf;
pub mod lyapunov;
pub mod minreal;
pub mod schur;
pub mod statespace;

pub use care::{care_solver, solve_care, CareSolution, CareSolver, CARE_SOLVERS};
pub use dense::Mat;
pub use error::{LinalgError, Result};
pub use hinf::{hinf_norm, HinfNorm};
pub use lyapunov::solve_lyapunov;
pub use minreal::minreal;
pub use schur::{eigenvalues, real_schur, spectral_abscissa};
pub use statespace::{StateSpace, StateSpaceRepr, TimeDomain};
