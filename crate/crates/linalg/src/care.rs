//! Continuous algebraic Riccati equation
//! `AᵀX + XA − X B R⁻¹ Bᵀ X + Q = 0`.
//!
//! Solvers are interchangeable behind [`CareSolver`] and looked up by name
//! through [`care_solver`]. The default `schur` strategy extracts the stable
//! invariant subspace of the symplectically balanced Hamiltonian and polishes
//! with Newton–Kleinman when the residual is loose; `newton` runs
//! Newton–Kleinman from a Bass stabilizing gain.

use crate::dense::{block_diag, ensure_finite, frob, inverse, solve, symmetrize, Mat};
use crate::error::{LinalgError, Result};
use crate::lyapunov::solve_lyapunov;
use crate::schur::{eigenvalues, real_schur, spectral_abscissa, HURWITZ_TOL};
use num_complex::Complex64;
use nalgebra::DVector;

/// Residual above which the Schur solution is refined.
pub const POLISH_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct CareSolution {
    pub x: Mat,
    /// Relative residual, see [`care_residual`].
    pub residual_norm: f64,
    /// Spectrum of `A − B R⁻¹ Bᵀ X`.
    pub closed_loop_spectrum: Vec<Complex64>,
}

impl CareSolution {
    pub fn gain(&self, b: &Mat, r: &Mat) -> Result<Mat> {
        solve(r, &(b.transpose() * &self.x), "CARE gain R⁻¹BᵀX")
    }
}

pub trait CareSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, a: &Mat, b: &Mat, q: &Mat, r: &Mat) -> Result<CareSolution>;
}

pub const CARE_SOLVERS: &[&str] = &["schur", "newton"];

pub fn care_solver(name: &str) -> Result<Box<dyn CareSolver>> {
    match name {
        "schur" => Ok(Box::new(SchurCare::default())),
        "newton" => Ok(Box::new(NewtonKleinmanCare::default())),
        other => Err(LinalgError::UnknownStrategy {
            kind: "CARE solver",
            name: other.to_string(),
            available: CARE_SOLVERS.join(", "),
        }),
    }
}

/// Solve with the default strategy.
pub fn solve_care(a: &Mat, b: &Mat, q: &Mat, r: &Mat) -> Result<CareSolution> {
    SchurCare::default().solve(a, b, q, r)
}

/// Relative residual ‖AᵀX + XA − XGX + Q‖ / (‖AᵀX‖ + ‖XA‖ + ‖XGX‖ + ‖Q‖), G = BR⁻¹Bᵀ.
pub fn care_residual(a: &Mat, g: &Mat, q: &Mat, x: &Mat) -> f64 {
    let atx = a.transpose() * x;
    let xa = x * a;
    let xgx = x * g * x;
    let r = &atx + &xa - &xgx + q;
    let scale = frob(&atx) + frob(&xa) + frob(&xgx) + frob(q);
    frob(&r) / scale.max(f64::MIN_POSITIVE)
}

fn check_dims(a: &Mat, b: &Mat, q: &Mat, r: &Mat) -> Result<()> {
    let n = a.nrows();
    let m = b.ncols();
    if a.ncols() != n || b.nrows() != n || q.shape() != (n, n) || r.shape() != (m, m) {
        return Err(LinalgError::Dimension(format!(
            "CARE: A {:?}, B {:?}, Q {:?}, R {:?}",
            a.shape(),
            b.shape(),
            q.shape(),
            r.shape()
        )));
    }
    ensure_finite(a, "CARE A")?;
    ensure_finite(b, "CARE B")?;
    ensure_finite(q, "CARE Q")?;
    ensure_finite(r, "CARE R")?;
    if r.nrows() > 0 && symmetrize(r).symmetric_eigenvalues().min() <= 0.0 {
        return Err(LinalgError::NoStabilizingSolution(
            "R is not positive definite".into(),
        ));
    }
    Ok(())
}

fn g_matrix(b: &Mat, r: &Mat) -> Result<Mat> {
    let rib = solve(r, &b.transpose(), "CARE R")?;
    Ok(symmetrize(&(b * rib)))
}

fn finish(a: &Mat, g: &Mat, q: &Mat, x: Mat) -> Result<CareSolution> {
    let x = symmetrize(&x);
    let residual_norm = care_residual(a, g, q, &x);
    let acl = a - g * &x;
    let closed_loop_spectrum = eigenvalues(&acl)?;
    let abscissa = closed_loop_spectrum
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if abscissa >= -HURWITZ_TOL && !closed_loop_spectrum.is_empty() {
        return Err(LinalgError::NoStabilizingSolution(format!(
            "closed loop not Hurwitz (abscissa {abscissa:e})"
        )));
    }
    Ok(CareSolution {
        x,
        residual_norm,
        closed_loop_spectrum,
    })
}

/// Stable invariant subspace of the Hamiltonian via ordered real Schur.
#[derive(Debug, Clone)]
pub struct SchurCare {
    pub balance: bool,
    pub polish_steps: usize,
}

impl Default for SchurCare {
    fn default() -> Self {
        Self {
            balance: true,
            polish_steps: 4,
        }
    }
}

impl CareSolver for SchurCare {
    fn name(&self) -> &'static str {
        "schur"
    }

    fn solve(&self, a: &Mat, b: &Mat, q: &Mat, r: &Mat) -> Result<CareSolution> {
        check_dims(a, b, q, r)?;
        let n = a.nrows();
        let g = g_matrix(b, r)?;
        let q = symmetrize(q);
        if n == 0 {
            return finish(a, &g, &q, Mat::zeros(0, 0));
        }
        let d = if self.balance {
            symplectic_scaling(a, &g, &q)
        } else {
            DVector::from_element(n, 1.0)
        };
        // Ã = D⁻¹AD, G̃ = D⁻¹GD⁻¹, Q̃ = DQD, X = D⁻¹X̃D⁻¹
        let ab = Mat::from_fn(n, n, |i, j| a[(i, j)] * d[j] / d[i]);
        let gb = Mat::from_fn(n, n, |i, j| g[(i, j)] / (d[i] * d[j]));
        let qb = Mat::from_fn(n, n, |i, j| q[(i, j)] * d[i] * d[j]);
        let mut h = block_diag(&ab, &(-ab.transpose()));
        h.view_mut((0, n), (n, n)).copy_from(&(-&gb));
        h.view_mut((n, 0), (n, n)).copy_from(&(-&qb));

        let mut schur = real_schur(&h)?;
        let hnorm = frob(&h);
        let on_axis = schur
            .eigenvalues()
            .iter()
            .any(|l| l.re.abs() <= 1e-13 * hnorm.max(1.0));
        if on_axis {
            return Err(LinalgError::NoStabilizingSolution(
                "Hamiltonian has eigenvalues on the imaginary axis".into(),
            ));
        }
        let k = schur.reorder(|l| l.re < 0.0)?;
        if k != n {
            return Err(LinalgError::NoStabilizingSolution(format!(
                "stable subspace has dimension {k}, expected {n}"
            )));
        }
        let u1 = schur.q.view((0, 0), (n, n)).clone_owned();
        let u2 = schur.q.view((n, 0), (n, n)).clone_owned();
        // X̃ = U2 U1⁻¹, i.e. X̃ᵀ solves U1ᵀ X̃ᵀ = U2ᵀ
        let xbt = solve(&u1.transpose(), &u2.transpose(), "stable subspace basis U1")?;
        let xb = xbt.transpose();
        let x = Mat::from_fn(n, n, |i, j| xb[(i, j)] / (d[i] * d[j]));

        let mut x = symmetrize(&x);
        let mut res = care_residual(a, &g, &q, &x);
        for _ in 0..self.polish_steps {
            if res <= POLISH_THRESHOLD * 1e-4 {
                break;
            }
            let Ok(next) = newton_step(a, &g, &q, &x) else {
                break;
            };
            let next_res = care_residual(a, &g, &q, &next);
            if next_res >= res {
                break;
            }
            x = next;
            res = next_res;
        }
        finish(a, &g, &q, x)
    }
}

/// One Newton–Kleinman step from a stabilizing `x`.
fn newton_step(a: &Mat, g: &Mat, q: &Mat, x: &Mat) -> Result<Mat> {
    // (A − GX)ᵀ X⁺ + X⁺(A − GX) + Q + XGX = 0
    let acl = a - g * x;
    let rhs = q + x * g * x;
    Ok(symmetrize(&solve_lyapunov(&acl, &rhs)?))
}

/// Diagonal `D` for the similarity `diag(D, D⁻¹)` applied to the Hamiltonian.
fn symplectic_scaling(a: &Mat, g: &Mat, q: &Mat) -> DVector<f64> {
    let n = a.nrows();
    let mut d = DVector::from_element(n, 1.0);
    let mut ab = a.clone();
    let mut gb = g.clone();
    let mut qb = q.clone();
    for _ in 0..60 {
        let mut changed = false;
        for k in 0..n {
            // entries growing with d_k: column k of A, row/col k of Q
            // entries shrinking with d_k: row k of A, row/col k of G
            let mut up = 0.0;
            let mut down = 0.0;
            for i in 0..n {
                if i != k {
                    up += ab[(i, k)].abs();
                    down += ab[(k, i)].abs();
                }
                up += qb[(i, k)].abs();
                down += gb[(i, k)].abs();
            }
            if up == 0.0 || down == 0.0 {
                continue;
            }
            let f = crate::balance::pow2_factor(up, down);
            if f != 1.0 {
                changed = true;
                d[k] *= f;
                for i in 0..n {
                    ab[(k, i)] /= f;
                    ab[(i, k)] *= f;
                    gb[(k, i)] /= f;
                    gb[(i, k)] /= f;
                    qb[(k, i)] *= f;
                    qb[(i, k)] *= f;
                }
            }
        }
        if !changed {
            break;
        }
    }
    d
}

/// Newton–Kleinman iteration seeded with a Bass stabilizing gain.
#[derive(Debug, Clone)]
pub struct NewtonKleinmanCare {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NewtonKleinmanCare {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-14,
        }
    }
}

impl NewtonKleinmanCare {
    /// Bass' construction: with −(A+βI) Hurwitz, solve
    /// −(A+βI)P − P(A+βI)ᵀ + 2BBᵀ = 0 and take K = BᵀP⁻¹, which places
    /// every closed-loop pole on Re s = −β.
    fn bass_gain(a: &Mat, b: &Mat) -> Result<Mat> {
        let n = a.nrows();
        let eig = eigenvalues(a)?;
        let leftmost = eig.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
        let radius = eig.iter().map(|l| l.norm()).fold(0.0, f64::max);
        // a large shift makes P nearly singular, so stay just past the spectrum
        let beta = (-leftmost).max(0.0) + 0.5 * radius.max(1e-3);
        let shifted = -(a + Mat::identity(n, n) * beta);
        let p = solve_lyapunov(&shifted.transpose(), &(b * b.transpose() * 2.0))?;
        let pinv = inverse(&p, "Bass gramian (pair not controllable?)")?;
        Ok(b.transpose() * pinv)
    }

    /// Stabilizing gain acting only on the unstable and marginal modes, found
    /// from an ordered real Schur form so the stable modes stay untouched.
    fn initial_gain(a: &Mat, b: &Mat) -> Result<Mat> {
        let n = a.nrows();
        if spectral_abscissa(a)? < -HURWITZ_TOL {
            return Ok(Mat::zeros(b.ncols(), n));
        }
        let mut schur = real_schur(a)?;
        let radius = schur.eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max);
        let cut = -1e-9 * radius.max(1.0);
        let k = schur.reorder(|l| l.re < cut)?;
        let uu = schur.q.columns(k, n - k).clone_owned();
        let au = schur.t.view((k, k), (n - k, n - k)).clone_owned();
        let bu = uu.transpose() * b;
        Ok(Self::bass_gain(&au, &bu)? * uu.transpose())
    }
}

impl CareSolver for NewtonKleinmanCare {
    fn name(&self) -> &'static str {
        "newton"
    }

    fn solve(&self, a: &Mat, b: &Mat, q: &Mat, r: &Mat) -> Result<CareSolution> {
        check_dims(a, b, q, r)?;
        let g = g_matrix(b, r)?;
        let q0 = symmetrize(q);
        let a0 = a;
        let n = a.nrows();
        if n == 0 {
            return finish(a, &g, &q0, Mat::zeros(0, 0));
        }
        // iterate on the diagonally scaled problem, X = D⁻¹X̃D⁻¹
        let dsc = symplectic_scaling(a, &g, &q0);
        let unscale = |xs: &Mat| Mat::from_fn(n, n, |i, j| xs[(i, j)] / (dsc[i] * dsc[j]));
        let a_s = Mat::from_fn(n, n, |i, j| a[(i, j)] * dsc[j] / dsc[i]);
        let b_s = Mat::from_fn(n, b.ncols(), |i, j| b[(i, j)] / dsc[i]);
        let q_s = Mat::from_fn(n, n, |i, j| q0[(i, j)] * dsc[i] * dsc[j]);
        let (a, b, q) = (&a_s, &b_s, &q_s);
        let mut k = Self::initial_gain(a, b)?;
        let mut x_prev: Option<Mat> = None;
        for _ in 0..self.max_iter {
            let acl = a - b * &k;
            let rhs = q + k.transpose() * r * &k;
            let x = symmetrize(&solve_lyapunov(&acl, &rhs).map_err(|e| match e {
                LinalgError::NotHurwitz { abscissa } => LinalgError::NoStabilizingSolution(
                    format!("Newton iterate lost stability (abscissa {abscissa:e})"),
                ),
                other => other,
            })?);
            k = solve(r, &(b.transpose() * &x), "CARE R")?;
            if let Some(prev) = &x_prev {
                if frob(&(&x - prev)) <= self.tol * frob(&x).max(1.0) {
                    return finish(a0, &g, &q0, unscale(&x));
                }
            }
            x_prev = Some(x);
        }
        let x = unscale(&x_prev.expect("at least one iteration"));
        let res = care_residual(a0, &g, &q0, &x);
        if res < POLISH_THRESHOLD {
            finish(a0, &g, &q0, x)
        } else {
            Err(LinalgError::NoConvergence {
                what: "Newton–Kleinman",
                iterations: self.max_iter,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Mat {
        Mat::from_element(1, 1, v)
    }

    #[test]
    fn unknown_solver_is_reported() {
        let err = care_solver("qz").err().unwrap();
        assert!(err.to_string().contains("schur, newton"));
    }

    #[test]
    fn marginal_hamiltonian_rejected() {
        // a = 0, b = 0: Hamiltonian eigenvalues at 0
        let e = solve_care(&scalar(0.0), &scalar(0.0), &scalar(1.0), &scalar(1.0));
        assert!(matches!(e, Err(LinalgError::NoStabilizingSolution(_))));
    }

    #[test]
    fn both_strategies_agree_on_scalar() {
        for name in CARE_SOLVERS {
            let s = care_solver(name).unwrap();
            let sol = s.solve(&scalar(1.0), &scalar(1.0), &scalar(1.0), &scalar(1.0)).unwrap();
            assert!((sol.x[(0, 0)] - (1.0 + 2f64.sqrt())).abs() < 1e-12, "{name}");
        }
    }
}
