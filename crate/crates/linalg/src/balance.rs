//! Diagonal similarity scaling (Parlett–Reinsch style, powers of two).

use nalgebra::DVector;

use crate::dense::Mat;

const RADIX: f64 = 2.0;

/// Returns `d` such that `diag(d)^{-1} a diag(d)` has comparable row and column norms.
pub fn balance_scaling(a: &Mat) -> DVector<f64> {
    let n = a.nrows();
    let mut d = DVector::from_element(n, 1.0);
    if n < 2 {
        return d;
    }
    let mut m = a.clone();
    for _sweep in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let f = pow2_factor(c, r);
            if (f - 1.0).abs() > f64::EPSILON {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
    d
}

/// Power-of-two factor `f` that pushes `c·f` and `r/f` towards each other,
/// only applied when it reduces `c + r` by at least 5%.
pub(crate) fn pow2_factor(c: f64, r: f64) -> f64 {
    let s = c + r;
    let mut f = 1.0;
    let mut cc = c;
    let mut rr = r;
    while cc < rr / RADIX {
        cc *= RADIX;
        rr /= RADIX;
        f *= RADIX;
    }
    while cc >= rr * RADIX {
        cc /= RADIX;
        rr *= RADIX;
        f /= RADIX;
    }
    if cc + rr < 0.95 * s {
        f
    } else {
        1.0
    }
}

pub fn apply_similarity(a: &Mat, d: &DVector<f64>) -> Mat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * d[j] / d[i])
}
