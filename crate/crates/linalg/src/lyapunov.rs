//! Continuous Lyapunov equation `AᵀX + XA + Q = 0` by Bartels–Stewart.

use crate::dense::{ensure_finite, frob, is_square, symmetrize, sylvester_small, Mat};
use crate::error::{LinalgError, Result};
use crate::schur::{real_schur, spectral_abscissa, HURWITZ_TOL};

/// Solves `AᵀX + XA + Q = 0` for Hurwitz `A`.
pub fn solve_lyapunov(a: &Mat, q: &Mat) -> Result<Mat> {
    if !is_square(a) || q.shape() != a.shape() {
        return Err(LinalgError::Dimension(format!(
            "lyapunov: A is {:?}, Q is {:?}",
            a.shape(),
            q.shape()
        )));
    }
    ensure_finite(q, "lyapunov Q")?;
    let abscissa = spectral_abscissa(a)?;
    if abscissa >= -HURWITZ_TOL {
        return Err(LinalgError::NotHurwitz { abscissa });
    }
    let x = solve_transformed(a, q)?;
    Ok(if symmetric(q) { symmetrize(&x) } else { x })
}

fn symmetric(q: &Mat) -> bool {
    frob(&(q - q.transpose())) <= 1e-14 * frob(q).max(f64::MIN_POSITIVE)
}

/// Bartels–Stewart without the stability precheck; requires λi + λj ≠ 0.
pub(crate) fn solve_transformed(a: &Mat, q: &Mat) -> Result<Mat> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let s = real_schur(a)?;
    let u = &s.q;
    let t = &s.t;
    let qt = u.transpose() * q * u;
    let mut starts = Vec::with_capacity(s.blocks.len());
    let mut acc = 0;
    for &b in &s.blocks {
        starts.push(acc);
        acc += b;
    }
    let nb = s.blocks.len();
    let mut y = Mat::zeros(n, n);
    // Tᵀ Y + Y T = -Q̃, blockwise in increasing (i, j)
    for bi in 0..nb {
        let (ri, si) = (starts[bi], s.blocks[bi]);
        for bj in 0..nb {
            let (rj, sj) = (starts[bj], s.blocks[bj]);
            let mut rhs = -qt.view((ri, rj), (si, sj)).clone_owned();
            for bk in 0..bi {
                let (rk, sk) = (starts[bk], s.blocks[bk]);
                rhs -= t.view((rk, ri), (sk, si)).transpose() * y.view((rk, rj), (sk, sj));
            }
            for bk in 0..bj {
                let (rk, sk) = (starts[bk], s.blocks[bk]);
                rhs -= y.view((ri, rk), (si, sk)) * t.view((rk, rj), (sk, sj));
            }
            let tii_t = t.view((ri, ri), (si, si)).transpose();
            let tjj = t.view((rj, rj), (sj, sj)).clone_owned();
            let blk = sylvester_small(&tii_t, &tjj, &rhs)?;
            y.view_mut((ri, rj), (si, sj)).copy_from(&blk);
        }
    }
    Ok(u * y * u.transpose())
}

/// Relative residual ‖AᵀX + XA + Q‖ / (2‖A‖‖X‖ + ‖Q‖).
pub fn lyapunov_residual(a: &Mat, x: &Mat, q: &Mat) -> f64 {
    let r = a.transpose() * x + x * a + q;
    frob(&r) / (2.0 * frob(a) * frob(x) + frob(q)).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case() {
        let a = Mat::from_element(1, 1, -1.0);
        let q = Mat::from_element(1, 1, 2.0);
        let x = solve_lyapunov(&a, &q).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unstable() {
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let q = Mat::identity(2, 2);
        assert!(matches!(solve_lyapunov(&a, &q), Err(LinalgError::NotHurwitz { .. })));
    }

    #[test]
    fn oscillatory_stable_matrix() {
        let a = Mat::from_row_slice(3, 3, &[-0.1, 2.0, 0.0, -2.0, -0.1, 1.0, 0.0, 0.0, -3.0]);
        let q = Mat::identity(3, 3);
        let x = solve_lyapunov(&a, &q).unwrap();
        assert!(lyapunov_residual(&a, &x, &q) < 1e-14);
    }
}
