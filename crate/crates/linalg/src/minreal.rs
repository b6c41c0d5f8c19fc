//! Minimal realization by orthogonal staircase reduction.
//!
//! Works for systems with poles on the imaginary axis (integrators in loop
//! weights), where Gramian-based truncation is undefined.

use nalgebra::DVector;

use crate::balance::pow2_factor;
use crate::dense::Mat;
use crate::error::Result;
use crate::statespace::StateSpace;

/// Default relative rank tolerance.
pub const MINREAL_TOL: f64 = 1e-10;

/// Removes uncontrollable, then unobservable, states.
pub fn minreal(sys: &StateSpace, tol: f64) -> Result<StateSpace> {
    if sys.nstates() == 0 {
        return Ok(sys.clone());
    }
    let scaled = balance_states(sys)?;
    let (a, b, c) = controllable_part(&scaled.a, &scaled.b, &scaled.c, tol);
    // observability of (A, C) is controllability of (Aᵀ, Cᵀ)
    let (at, ct, bt) = controllable_part(&a.transpose(), &c.transpose(), &b.transpose(), tol);
    StateSpace::with_time(at.transpose(), bt.transpose(), ct.transpose(), sys.d.clone(), sys.time)
}

/// Diagonal state scaling equalizing the rows and columns of `[A B; C 0]`.
fn balance_states(sys: &StateSpace) -> Result<StateSpace> {
    let n = sys.nstates();
    let mut d = DVector::from_element(n, 1.0);
    let mut a = sys.a.clone();
    let mut b = sys.b.clone();
    let mut c = sys.c.clone();
    for _ in 0..100 {
        let mut changed = false;
        for k in 0..n {
            let col: f64 = (0..n).filter(|&i| i != k).map(|i| a[(i, k)].abs()).sum::<f64>()
                + c.column(k).abs().sum();
            let row: f64 = (0..n).filter(|&j| j != k).map(|j| a[(k, j)].abs()).sum::<f64>()
                + b.row(k).abs().sum();
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let f = pow2_factor(col, row);
            if f != 1.0 {
                changed = true;
                d[k] *= f;
                a.column_mut(k).scale_mut(f);
                a.row_mut(k).scale_mut(1.0 / f);
                c.column_mut(k).scale_mut(f);
                b.row_mut(k).scale_mut(1.0 / f);
            }
        }
        if !changed {
            break;
        }
    }
    StateSpace::with_time(a, b, c, sys.d.clone(), sys.time)
}

/// Staircase form of `(A, B)`; returns the controllable block of `(A, B, C)`.
fn controllable_part(a: &Mat, b: &Mat, c: &Mat, tol: f64) -> (Mat, Mat, Mat) {
    let n = a.nrows();
    let m = b.ncols();
    let scale = a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    let mut a = a.clone();
    let mut b = b.clone();
    let mut c = c.clone();
    let mut done = 0;
    // the block whose range extends the controllable subspace
    let mut block = b.clone();
    let mut block_cols = m;
    loop {
        let rest = n - done;
        if rest == 0 || block_cols == 0 {
            break;
        }
        let svd = block.clone().svd(true, false);
        let u_small = svd.u.expect("requested U");
        let sv = &svd.singular_values;
        let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > tol * scale).collect();
        let rank = keep.len();
        if rank == 0 {
            break;
        }
        let range = u_small.select_columns(keep.iter());
        // complete to a square orthogonal basis of the remaining subspace
        let u = complete_basis(&range, rest);
        let mut t = Mat::identity(n, n);
        t.view_mut((done, done), (rest, rest)).copy_from(&u);
        a = t.transpose() * &a * &t;
        b = t.transpose() * &b;
        c = &c * &t;
        let next = done + rank;
        block = a.view((next, done), (n - next, rank)).clone_owned();
        block_cols = rank;
        done = next;
    }
    (
        a.view((0, 0), (done, done)).clone_owned(),
        b.view((0, 0), (done, m)).clone_owned(),
        c.view((0, 0), (c.nrows(), done)).clone_owned(),
    )
}

/// Orthogonal `rest × rest` matrix whose leading columns span those of `u`.
fn complete_basis(u: &Mat, rest: usize) -> Mat {
    let mut full = Mat::zeros(rest, rest + u.ncols());
    full.view_mut((0, 0), (rest, u.ncols())).copy_from(u);
    full.view_mut((0, u.ncols()), (rest, rest)).copy_from(&Mat::identity(rest, rest));
    let qr = full.qr();
    let q = qr.q();
    // nalgebra returns a thin Q (rest × rest here since rest ≤ columns)
    q.view((0, 0), (rest, rest)).clone_owned()
}
