//! Controller state re-initialization that best reproduces the past input and output.

use log::warn;
use nalgebra::DVector;
use windshape_linalg::dense::{hstack, vstack, Mat};
use windshape_linalg::StateSpace;

/// Outcome of the least-squares initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct BumplessSolution {
    /// Controller state to use at the switch instant.
    pub state: DVector<f64>,
    /// Fitted previous state and previous controller input.
    pub xi_prev: DVector<f64>,
    pub nu_prev: DVector<f64>,
    /// `‖Φz − r‖²` at the solution.
    pub cost: f64,
    /// Cost of the zero previous-state, zero-input candidate, `‖r‖²`.
    pub zero_state_cost: f64,
    /// `‖Φᵀ(Φz − r)‖`.
    pub gradient_norm: f64,
    /// Gradient norm over `‖Φ‖(‖Φ‖‖z‖ + ‖r‖)`.
    pub gradient_rel: f64,
    pub fallback: bool,
}

/// Picks `(ξ(κ−1), ν(κ−1))` minimizing `‖[Ĉξ + D̂ν − du; ν − dy]‖²` with the
/// minimum-norm SVD solution and returns `ξ(κ) = Âξ + B̂ν`.
///
/// `du` and `dy` are the previous input and output relative to the incoming
/// controller's operating point. Falls back to the zero state if the solve
/// is not finite.
pub fn bumpless_init(k: &StateSpace, du: &DVector<f64>, dy: &DVector<f64>) -> BumplessSolution {
    let n = k.nstates();
    let (m, p) = (k.noutputs(), k.ninputs());
    assert_eq!(du.len(), m, "input offset length");
    assert_eq!(dy.len(), p, "output offset length");
    let phi = vstack(&hstack(&k.c, &k.d), &hstack(&Mat::zeros(p, n), &Mat::identity(p, p)));
    let mut r = DVector::zeros(m + p);
    r.rows_mut(0, m).copy_from(du);
    r.rows_mut(m, p).copy_from(dy);
    let zero_state_cost = r.norm_squared();

    let solved = solve_min_norm(&phi, &r);
    let (z, fallback) = match solved {
        Some(z) => (z, false),
        None => {
            warn!("bumpless initialization failed, using the zero controller state");
            (DVector::zeros(n + p), true)
        }
    };
    let resid = &phi * &z - &r;
    let grad = phi.transpose() * &resid;
    let phi_norm = phi.norm();
    let scale = phi_norm * (phi_norm * z.norm() + r.norm());
    let xi_prev = z.rows(0, n).clone_owned();
    let nu_prev = z.rows(n, p).clone_owned();
    let state = if fallback {
        DVector::zeros(n)
    } else {
        &k.a * &xi_prev + &k.b * &nu_prev
    };
    BumplessSolution {
        state,
        xi_prev,
        nu_prev,
        cost: resid.norm_squared(),
        zero_state_cost,
        gradient_norm: grad.norm(),
        gradient_rel: if scale > 0.0 { grad.norm() / scale } else { 0.0 },
        fallback,
    }
}

fn solve_min_norm(phi: &Mat, r: &DVector<f64>) -> Option<DVector<f64>> {
    if !phi.iter().chain(r.iter()).all(|v| v.is_finite()) {
        return None;
    }
    let svd = phi.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = (phi.nrows().max(phi.ncols()) as f64) * smax * f64::EPSILON;
    let z = svd.solve(r, tol).ok()?;
    z.iter().all(|v| v.is_finite()).then_some(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use windshape_linalg::TimeDomain;

    fn scalar() -> StateSpace {
        StateSpace::with_time(
            Mat::from_element(1, 1, 0.5),
            Mat::from_element(1, 1, 1.0),
            Mat::from_element(1, 1, 1.0),
            Mat::zeros(1, 1),
            TimeDomain::Discrete { dt: 0.004 },
        )
        .unwrap()
    }

    #[test]
    fn at_target_equilibrium_cost_is_zero() {
        let k = scalar();
        let s = bumpless_init(&k, &DVector::zeros(1), &DVector::zeros(1));
        assert_eq!(s.cost, 0.0);
        assert_eq!(s.state[0], 0.0);
    }

    #[test]
    fn scalar_solution_matches_closed_form() {
        // Φ = I, so ξ = du, ν = dy and ξ(κ) = 0.5 du + dy
        let k = scalar();
        let s = bumpless_init(&k, &DVector::from_element(1, 0.3), &DVector::from_element(1, -1.2));
        assert!((s.state[0] - (0.15 - 1.2)).abs() < 1e-14);
        assert!(s.cost < 1e-28 && s.gradient_norm < 1e-14);
    }

    #[test]
    fn rank_deficient_output_map_gives_min_norm() {
        // two states feeding one output: many minimizers, the min-norm one is balanced
        let k = StateSpace::with_time(
            Mat::identity(2, 2) * 0.9,
            Mat::from_row_slice(2, 1, &[1.0, 0.0]),
            Mat::from_row_slice(1, 2, &[1.0, 1.0]),
            Mat::zeros(1, 1),
            TimeDomain::Discrete { dt: 0.004 },
        )
        .unwrap();
        let s = bumpless_init(&k, &DVector::from_element(1, 2.0), &DVector::from_element(1, 0.0));
        assert!((s.xi_prev[0] - 1.0).abs() < 1e-12 && (s.xi_prev[1] - 1.0).abs() < 1e-12);
        assert!(s.cost < 1e-24);
    }

    #[test]
    fn non_finite_data_falls_back() {
        let k = scalar();
        let s = bumpless_init(&k, &DVector::from_element(1, f64::NAN), &DVector::zeros(1));
        assert!(s.fallback);
        assert_eq!(s.state[0], 0.0);
    }
}
