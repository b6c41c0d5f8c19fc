//! Gramians and Hankel singular values of stable systems.

use crate::dense::{symmetrize, Mat};
use crate::error::Result;
use crate::lyapunov::solve_lyapunov;
use crate::statespace::StateSpace;

/// `P` with `AP + PAᵀ + BBᵀ = 0`.
pub fn controllability_gramian(sys: &StateSpace) -> Result<Mat> {
    let q = &sys.b * sys.b.transpose();
    Ok(symmetrize(&solve_lyapunov(&sys.a.transpose(), &q)?))
}

/// `Q` with `AᵀQ + QA + CᵀC = 0`.
pub fn observability_gramian(sys: &StateSpace) -> Result<Mat> {
    let q = sys.c.transpose() * &sys.c;
    Ok(symmetrize(&solve_lyapunov(&sys.a, &q)?))
}

/// Hankel singular values in decreasing order.
pub fn hankel_singular_values(sys: &StateSpace) -> Result<Vec<f64>> {
    let p = controllability_gramian(sys)?;
    let q = observability_gramian(sys)?;
    let mut hsv: Vec<f64> = crate::schur::eigenvalues(&(p * q))?
        .iter()
        .map(|l| l.re.max(0.0).sqrt())
        .collect();
    hsv.sort_by(|a, b| b.total_cmp(a));
    Ok(hsv)
}

pub fn hankel_norm(sys: &StateSpace) -> Result<f64> {
    Ok(hankel_singular_values(sys)?.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order_hankel_norm() {
        // 1/(s+a) has a single Hankel singular value 1/(2a)
        let sys = StateSpace::new(
            Mat::from_element(1, 1, -4.0),
            Mat::from_element(1, 1, 1.0),
            Mat::from_element(1, 1, 1.0),
            Mat::zeros(1, 1),
        )
        .unwrap();
        assert!((hankel_norm(&sys).unwrap() - 0.125).abs() < 1e-15);
    }
}
