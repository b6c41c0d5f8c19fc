//! Small dense helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{LinalgError, Result};

pub type Mat = DMatrix<f64>;

pub fn frob(m: &Mat) -> f64 {
    m.norm()
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn is_square(m: &Mat) -> bool {
    m.nrows() == m.ncols()
}

pub fn all_finite(m: &Mat) -> bool {
    m.iter().all(|v| v.is_finite())
}

pub fn ensure_finite(m: &Mat, what: &'static str) -> Result<()> {
    if all_finite(m) {
        Ok(())
    } else {
        Err(LinalgError::NonFinite(what))
    }
}

/// Solve `a x = b` by partial-pivot LU, rejecting numerically singular `a`.
pub fn solve(a: &Mat, b: &Mat, what: &'static str) -> Result<Mat> {
    if a.nrows() == 0 {
        return Ok(Mat::zeros(0, b.ncols()));
    }
    let lu = a.clone().lu();
    let x = lu.solve(b).ok_or(LinalgError::Singular(what))?;
    if !all_finite(&x) {
        return Err(LinalgError::Singular(what));
    }
    Ok(x)
}

pub fn inverse(a: &Mat, what: &'static str) -> Result<Mat> {
    solve(a, &Mat::identity(a.nrows(), a.nrows()), what)
}

/// Solve the small Sylvester equation `a x + x b = c` through its Kronecker form.
/// Intended for blocks of size at most a few rows.
pub fn sylvester_small(a: &Mat, b: &Mat, c: &Mat) -> Result<Mat> {
    let p = a.nrows();
    let q = b.nrows();
    let n = p * q;
    let mut k = Mat::zeros(n, n);
    // column-major vec: vec(A X) = (I ⊗ A) vec X, vec(X B) = (Bᵀ ⊗ I) vec X
    for j in 0..q {
        for i in 0..p {
            let row = j * p + i;
            for l in 0..p {
                k[(row, j * p + l)] += a[(i, l)];
            }
            for l in 0..q {
                k[(row, l * p + i)] += b[(l, j)];
            }
        }
    }
    let rhs = DVector::from_iterator(n, c.iter().copied());
    let lu = k.lu();
    let x = lu.solve(&rhs).ok_or(LinalgError::Singular("small Sylvester block"))?;
    Ok(Mat::from_column_slice(p, q, x.as_slice()))
}

/// Largest eigenvalue of a symmetric matrix.
pub fn sym_max_eig(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    symmetrize(m).symmetric_eigenvalues().max()
}

/// Symmetric positive-definite inverse square root `m^{-1/2}`.
pub fn spd_inv_sqrt(m: &Mat) -> Result<Mat> {
    let eig = symmetrize(m).symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(LinalgError::Singular("inverse square root of non-SPD matrix"));
    }
    let d = Mat::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let mut m = Mat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    m.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(b);
    m
}

pub fn hstack(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.nrows(), b.nrows());
    let mut m = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    m.view_mut((0, a.ncols()), (b.nrows(), b.ncols())).copy_from(b);
    m
}

pub fn vstack(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.ncols(), b.ncols());
    let mut m = Mat::zeros(a.nrows() + b.nrows(), a.ncols());
    m.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    m.view_mut((a.nrows(), 0), (b.nrows(), b.ncols())).copy_from(b);
    m
}

/// Build a matrix from row-major nested rows.
pub fn from_rows(rows: &[Vec<f64>]) -> Mat {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    Mat::from_fn(r, c, |i, j| rows[i][j])
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
