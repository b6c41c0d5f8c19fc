//! Real Schur decomposition `A = Q T Qᵀ` and invariant-subspace reordering.
//!
//! The QR sweep is the classic Francis double-shift iteration on a Hessenberg
//! matrix (EISPACK `hqr2` lineage), accumulating every transformation so the
//! full quasi-triangular form and the orthogonal basis are both available.
//! Reordering swaps adjacent diagonal blocks by solving a small Sylvester
//! equation and applying the orthogonal factor of `[-X; I]`.

use nalgebra::linalg::Hessenberg;
use num_complex::Complex64;

use crate::balance::{apply_similarity, balance_scaling};
use crate::dense::{ensure_finite, is_square, sylvester_small, Mat};
use crate::error::{LinalgError, Result};

const MAX_ITER_PER_EIGENVALUE: usize = 400;

#[derive(Debug, Clone)]
pub struct RealSchur {
    pub q: Mat,
    pub t: Mat,
    /// Size (1 or 2) of each diagonal block, top to bottom.
    pub blocks: Vec<usize>,
}

impl RealSchur {
    /// Eigenvalues in diagonal-block order.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.t.nrows());
        let mut i = 0;
        for &size in &self.blocks {
            if size == 1 {
                out.push(Complex64::new(self.t[(i, i)], 0.0));
            } else {
                let (l1, l2) = block_eigenvalues(&self.t, i);
                out.push(l1);
                out.push(l2);
            }
            i += size;
        }
        out
    }

    fn block_starts(&self) -> Vec<usize> {
        let mut starts = Vec::with_capacity(self.blocks.len());
        let mut i = 0;
        for &s in &self.blocks {
            starts.push(i);
            i += s;
        }
        starts
    }

    /// Reorder so that every block whose eigenvalues satisfy `select` comes
    /// first. Returns the dimension of the leading selected subspace.
    pub fn reorder<F>(&mut self, select: F) -> Result<usize>
    where
        F: Fn(Complex64) -> bool,
    {
        let flags: Vec<bool> = {
            let starts = self.block_starts();
            starts
                .iter()
                .zip(&self.blocks)
                .map(|(&s, &size)| {
                    let ev = if size == 1 {
                        Complex64::new(self.t[(s, s)], 0.0)
                    } else {
                        block_eigenvalues(&self.t, s).0
                    };
                    select(ev)
                })
                .collect()
        };
        let mut flags = flags;
        // bubble each selected block up past the unselected ones before it
        let mut placed = 0;
        for k in 0..self.blocks.len() {
            if !flags[k] {
                continue;
            }
            let mut pos = k;
            while pos > placed {
                let start: usize = self.blocks[..pos - 1].iter().sum();
                let p = self.blocks[pos - 1];
                let q = self.blocks[pos];
                swap_adjacent(&mut self.t, &mut self.q, start, p, q)?;
                self.blocks.swap(pos - 1, pos);
                flags.swap(pos - 1, pos);
                pos -= 1;
            }
            placed += 1;
        }
        Ok(self.blocks[..placed].iter().sum())
    }
}

fn block_eigenvalues(t: &Mat, i: usize) -> (Complex64, Complex64) {
    let a = t[(i, i)];
    let b = t[(i, i + 1)];
    let c = t[(i + 1, i)];
    let d = t[(i + 1, i + 1)];
    let p = 0.5 * (a - d);
    let disc = p * p + b * c;
    let mid = 0.5 * (a + d);
    if disc >= 0.0 {
        let s = disc.sqrt();
        (Complex64::new(mid + s, 0.0), Complex64::new(mid - s, 0.0))
    } else {
        let s = (-disc).sqrt();
        (Complex64::new(mid, s), Complex64::new(mid, -s))
    }
}

/// Real Schur decomposition of a square matrix.
pub fn real_schur(a: &Mat) -> Result<RealSchur> {
    if !is_square(a) {
        return Err(LinalgError::Dimension(format!(
            "real_schur needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(a, "real_schur input")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(RealSchur {
            q: Mat::zeros(0, 0),
            t: Mat::zeros(0, 0),
            blocks: vec![],
        });
    }
    if n == 1 {
        return Ok(RealSchur {
            q: Mat::identity(1, 1),
            t: a.clone(),
            blocks: vec![1],
        });
    }
    let (mut v, mut h) = Hessenberg::new(a.clone()).unpack();
    for j in 0..n {
        for i in (j + 2)..n {
            h[(i, j)] = 0.0;
        }
    }
    francis_qr(&mut h, &mut v)?;
    // the sweep leaves stale bulge entries below the subdiagonal
    for j in 0..n {
        for i in (j + 2)..n {
            h[(i, j)] = 0.0;
        }
    }
    let blocks = detect_blocks(&mut h, &mut v);
    Ok(RealSchur { q: v, t: h, blocks })
}

/// Schur form of the Parlett–Reinsch balanced matrix; only the spectrum is
/// meaningful to callers, so the basis refers to balanced coordinates.
pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex64>> {
    let d = balance_scaling(a);
    let balanced = apply_similarity(a, &d);
    Ok(real_schur(&balanced)?.eigenvalues())
}

/// Largest real part of the spectrum.
pub fn spectral_abscissa(a: &Mat) -> Result<f64> {
    if a.nrows() == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(eigenvalues(a)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Boundary tolerance for stability verdicts.
pub const HURWITZ_TOL: f64 = 1e-9;

pub fn is_hurwitz(a: &Mat) -> Result<bool> {
    Ok(spectral_abscissa(a)? < -HURWITZ_TOL)
}

fn detect_blocks(h: &mut Mat, v: &mut Mat) -> Vec<usize> {
    let n = h.nrows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && h[(i + 1, i)] != 0.0 {
            let (l1, _) = block_eigenvalues(h, i);
            if l1.im == 0.0 {
                // a 2x2 block must carry a complex pair; split real ones
                split_real_pair(h, v, i, l1.re);
                blocks.push(1);
                i += 1;
                continue;
            }
            blocks.push(2);
            i += 2;
        } else {
            blocks.push(1);
            i += 1;
        }
    }
    blocks
}

fn split_real_pair(h: &mut Mat, v: &mut Mat, i: usize, lambda: f64) {
    let a = h[(i, i)];
    let b = h[(i, i + 1)];
    let c = h[(i + 1, i)];
    let d = h[(i + 1, i + 1)];
    // eigenvector of the block for `lambda`
    let (mut e0, mut e1) = if (lambda - a).abs() + b.abs() > (lambda - d).abs() + c.abs() {
        (b, lambda - a)
    } else {
        (lambda - d, c)
    };
    let nrm = e0.hypot(e1);
    if nrm == 0.0 {
        h[(i + 1, i)] = 0.0;
        return;
    }
    e0 /= nrm;
    e1 /= nrm;
    let n = h.nrows();
    for r in 0..n {
        let x0 = h[(r, i)];
        let x1 = h[(r, i + 1)];
        h[(r, i)] = e0 * x0 + e1 * x1;
        h[(r, i + 1)] = -e1 * x0 + e0 * x1;
    }
    for col in 0..n {
        let x0 = h[(i, col)];
        let x1 = h[(i + 1, col)];
        h[(i, col)] = e0 * x0 + e1 * x1;
        h[(i + 1, col)] = -e1 * x0 + e0 * x1;
    }
    for r in 0..v.nrows() {
        let x0 = v[(r, i)];
        let x1 = v[(r, i + 1)];
        v[(r, i)] = e0 * x0 + e1 * x1;
        v[(r, i + 1)] = -e1 * x0 + e0 * x1;
    }
    h[(i + 1, i)] = 0.0;
}

fn francis_qr(h: &mut Mat, v: &mut Mat) -> Result<()> {
    let nn = h.nrows();
    let low = 0usize;
    let high = nn - 1;
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    while n >= low as isize {
        let nu = n as usize;
        // look for a single small sub-diagonal element
        let mut l = nu;
        while l > low {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            // one root
            h[(nu, nu)] += exshift;
            if nu > low {
                h[(nu, nu - 1)] = 0.0;
            }
            n -= 1;
            iter = 0;
        } else if l == nu - 1 {
            // two roots
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            if l > low {
                h[(l, l - 1)] = 0.0;
            }
            if q >= 0.0 {
                // real pair: rotate to upper triangular
                z = if p >= 0.0 { p + z } else { p - z };
                x = h[(nu, nu - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in (nu - 1)..nn {
                    z = h[(nu - 1, j)];
                    h[(nu - 1, j)] = q * z + p * h[(nu, j)];
                    h[(nu, j)] = q * h[(nu, j)] - p * z;
                }
                for i in 0..=nu {
                    z = h[(i, nu - 1)];
                    h[(i, nu - 1)] = q * z + p * h[(i, nu)];
                    h[(i, nu)] = q * h[(i, nu)] - p * z;
                }
                for i in low..=high {
                    z = v[(i, nu - 1)];
                    v[(i, nu - 1)] = q * z + p * v[(i, nu)];
                    v[(i, nu)] = q * v[(i, nu)] - p * z;
                }
                h[(nu, nu - 1)] = 0.0;
            }
            n -= 2;
            iter = 0;
        } else {
            // form shift
            x = h[(nu, nu)];
            y = 0.0;
            w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            if iter % 20 == 10 {
                exshift += x;
                for i in low..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter > 0 && iter % 20 == 0 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > MAX_ITER_PER_EIGENVALUE {
                return Err(LinalgError::NoConvergence {
                    what: "Francis QR iteration",
                    iterations: iter,
                });
            }

            // look for two consecutive small sub-diagonal elements
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // double QR step on rows l..=n, columns m..=n
            let mut k = m;
            while k < nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                    for i in low..=high {
                        p = x * v[(i, k)] + y * v[(i, k + 1)];
                        if notlast {
                            p += z * v[(i, k + 2)];
                            v[(i, k + 2)] -= p * r;
                        }
                        v[(i, k)] -= p;
                        v[(i, k + 1)] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(())
}

/// Swap the adjacent diagonal blocks of sizes `p` (at `start`) and `q`.
fn swap_adjacent(t: &mut Mat, z: &mut Mat, start: usize, p: usize, q: usize) -> Result<()> {
    let n = t.nrows();
    let k = p + q;
    let t11 = t.view((start, start), (p, p)).clone_owned();
    let t12 = t.view((start, start + p), (p, q)).clone_owned();
    let t22 = t.view((start + p, start + p), (q, q)).clone_owned();
    // T11 X - X T22 = T12
    let x = sylvester_small(&t11, &(-t22), &t12)?;
    // columns [-X; I] then a complement so the square QR gives a full basis
    let mut m = Mat::zeros(k, k);
    for i in 0..p {
        for j in 0..q {
            m[(i, j)] = -x[(i, j)];
        }
        m[(i, q + i)] = 1.0;
    }
    for j in 0..q {
        m[(p + j, j)] = 1.0;
    }
    let qr = m.qr();
    let qm = qr.q();

    let cols = t.columns(start, k).clone_owned() * &qm;
    t.columns_mut(start, k).copy_from(&cols);
    let rows = qm.transpose() * t.rows(start, k).clone_owned();
    t.rows_mut(start, k).copy_from(&rows);
    let zc = z.columns(start, k).clone_owned() * &qm;
    z.columns_mut(start, k).copy_from(&zc);

    // clear the fill below the new leading block and below the diagonal
    for i in (start + q)..(start + k) {
        for j in start..(start + q) {
            t[(i, j)] = 0.0;
        }
    }
    if q == 1 {
        for i in (start + 1)..n.min(start + k) {
            t[(i, start)] = 0.0;
        }
    }
    if p == 1 {
        let s = start + q;
        for i in (s + 1)..n.min(start + k) {
            t[(i, s)] = 0.0;
        }
    }
    for j in start..(start + k) {
        for i in (start + k)..n {
            t[(i, j)] = 0.0;
        }
    }
    Ok(())
}
