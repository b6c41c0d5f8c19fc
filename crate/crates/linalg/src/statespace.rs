//! Linear time-invariant systems in state-space form and their interconnections.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{block_diag, ensure_finite, from_rows, hstack, solve, to_rows, vstack, Mat};
use crate::error::{LinalgError, Result};
use crate::schur::{eigenvalues, spectral_abscissa};

pub type CMat = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeDomain {
    Continuous,
    Discrete { dt: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub time: TimeDomain,
}

impl StateSpace {
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        Self::with_time(a, b, c, d, TimeDomain::Continuous)
    }

    pub fn with_time(a: Mat, b: Mat, c: Mat, d: Mat, time: TimeDomain) -> Result<Self> {
        let n = a.nrows();
        let (p, m) = d.shape();
        if a.ncols() != n || b.shape() != (n, m) || c.shape() != (p, n) {
            return Err(LinalgError::Dimension(format!(
                "state space: A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        for (m, what) in [(&a, "A"), (&b, "B"), (&c, "C"), (&d, "D")] {
            ensure_finite(m, what)?;
        }
        if let TimeDomain::Discrete { dt } = time {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(LinalgError::Dimension(format!("sample time {dt} must be positive")));
            }
        }
        Ok(Self { a, b, c, d, time })
    }

    /// Memoryless gain.
    pub fn gain(d: Mat) -> Self {
        let (p, m) = d.shape();
        Self {
            a: Mat::zeros(0, 0),
            b: Mat::zeros(0, m),
            c: Mat::zeros(p, 0),
            d,
            time: TimeDomain::Continuous,
        }
    }

    pub fn nstates(&self) -> usize {
        self.a.nrows()
    }
    pub fn ninputs(&self) -> usize {
        self.d.ncols()
    }
    pub fn noutputs(&self) -> usize {
        self.d.nrows()
    }
    pub fn is_continuous(&self) -> bool {
        matches!(self.time, TimeDomain::Continuous)
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        eigenvalues(&self.a)
    }

    /// Largest real part of the poles (continuous) or spectral radius (discrete).
    pub fn stability_measure(&self) -> Result<f64> {
        match self.time {
            TimeDomain::Continuous => spectral_abscissa(&self.a),
            TimeDomain::Discrete { .. } => Ok(self
                .poles()?
                .iter()
                .map(|l| l.norm())
                .fold(0.0, f64::max)),
        }
    }

    pub fn is_stable(&self) -> Result<bool> {
        let s = self.stability_measure()?;
        Ok(match self.time {
            TimeDomain::Continuous => s < -crate::schur::HURWITZ_TOL,
            TimeDomain::Discrete { .. } => s < 1.0 - crate::schur::HURWITZ_TOL,
        })
    }

    /// Transfer matrix `C (sI − A)⁻¹ B + D` at a complex point.
    pub fn eval(&self, s: Complex64) -> Result<CMat> {
        let n = self.nstates();
        let d = self.d.map(Complex64::from);
        if n == 0 {
            return Ok(d);
        }
        let mut m = self.a.map(|v| Complex64::from(-v));
        for i in 0..n {
            m[(i, i)] += s;
        }
        let b = self.b.map(Complex64::from);
        let lu = m.lu();
        let x = lu.solve(&b).ok_or(LinalgError::Resonance { omega: s.im })?;
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(LinalgError::Resonance { omega: s.im });
        }
        Ok(self.c.map(Complex64::from) * x + d)
    }

    /// Frequency response at `omega` rad/s.
    pub fn freq_response(&self, omega: f64) -> Result<CMat> {
        let s = match self.time {
            TimeDomain::Continuous => Complex64::new(0.0, omega),
            TimeDomain::Discrete { dt } => Complex64::from_polar(1.0, omega * dt),
        };
        self.eval(s).map_err(|e| match e {
            LinalgError::Resonance { .. } => LinalgError::Resonance { omega },
            other => other,
        })
    }

    /// Largest singular value of the frequency response.
    pub fn sigma_max(&self, omega: f64) -> Result<f64> {
        Ok(sigma_max_c(&self.freq_response(omega)?))
    }

    pub fn dc_gain(&self) -> Result<Mat> {
        let s = match self.time {
            TimeDomain::Continuous => Complex64::new(0.0, 0.0),
            TimeDomain::Discrete { .. } => Complex64::new(1.0, 0.0),
        };
        Ok(self.eval(s)?.map(|v| v.re))
    }

    fn same_time(&self, other: &Self) -> Result<TimeDomain> {
        // memoryless systems adopt the time domain of their partner
        if self.nstates() == 0 {
            return Ok(other.time);
        }
        if other.nstates() == 0 || self.time == other.time {
            return Ok(self.time);
        }
        Err(LinalgError::Dimension("mixing continuous and discrete systems".into()))
    }

    /// `next ∘ self`: feed the outputs of `self` into `next`.
    pub fn series(&self, next: &Self) -> Result<Self> {
        if self.noutputs() != next.ninputs() {
            return Err(LinalgError::Dimension(format!(
                "series: {} outputs into {} inputs",
                self.noutputs(),
                next.ninputs()
            )));
        }
        let time = self.same_time(next)?;
        let (n1, n2) = (self.nstates(), next.nstates());
        let mut a = Mat::zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, 0), (n2, n1)).copy_from(&(&next.b * &self.c));
        a.view_mut((n1, n1), (n2, n2)).copy_from(&next.a);
        let b = vstack(&self.b, &(&next.b * &self.d));
        let c = hstack(&(&next.d * &self.c), &next.c);
        let d = &next.d * &self.d;
        Self::with_time(a, b, c, d, time)
    }

    /// `self + other` with shared inputs and summed outputs.
    pub fn parallel(&self, other: &Self) -> Result<Self> {
        if self.d.shape() != other.d.shape() {
            return Err(LinalgError::Dimension("parallel: io sizes differ".into()));
        }
        let time = self.same_time(other)?;
        Self::with_time(
            block_diag(&self.a, &other.a),
            vstack(&self.b, &other.b),
            hstack(&self.c, &other.c),
            &self.d + &other.d,
            time,
        )
    }

    pub fn negate(&self) -> Self {
        Self {
            c: -&self.c,
            d: -&self.d,
            ..self.clone()
        }
    }

    /// Block-diagonal stacking: independent inputs and outputs.
    pub fn append(&self, other: &Self) -> Result<Self> {
        let time = self.same_time(other)?;
        Self::with_time(
            block_diag(&self.a, &other.a),
            block_diag(&self.b, &other.b),
            block_diag(&self.c, &other.c),
            block_diag(&self.d, &other.d),
            time,
        )
    }

    /// `[self other]`: separate inputs, summed outputs.
    pub fn hconcat(&self, other: &Self) -> Result<Self> {
        if self.noutputs() != other.noutputs() {
            return Err(LinalgError::Dimension("hconcat: output counts differ".into()));
        }
        let time = self.same_time(other)?;
        Self::with_time(
            block_diag(&self.a, &other.a),
            block_diag(&self.b, &other.b),
            hstack(&self.c, &other.c),
            hstack(&self.d, &other.d),
            time,
        )
    }

    /// `[self; other]`: shared inputs, stacked outputs.
    pub fn vconcat(&self, other: &Self) -> Result<Self> {
        if self.ninputs() != other.ninputs() {
            return Err(LinalgError::Dimension("vconcat: input counts differ".into()));
        }
        let time = self.same_time(other)?;
        Self::with_time(
            block_diag(&self.a, &other.a),
            vstack(&self.b, &other.b),
            block_diag(&self.c, &other.c),
            vstack(&self.d, &other.d),
            time,
        )
    }

    /// `L · self · R` for constant matrices.
    pub fn scaled(&self, left: &Mat, right: &Mat) -> Result<Self> {
        Self::with_time(
            self.a.clone(),
            &self.b * right,
            left * &self.c,
            left * &self.d * right,
            self.time,
        )
    }

    /// State coordinate change `x = T z`.
    pub fn similarity(&self, t: &Mat) -> Result<Self> {
        let ti_a = solve(t, &(&self.a * t), "similarity transform")?;
        let ti_b = solve(t, &self.b, "similarity transform")?;
        Self::with_time(ti_a, ti_b, &self.c * t, self.d.clone(), self.time)
    }

    /// Loop of `self` (plant G) and `k` under positive feedback `u = K y`.
    ///
    /// Inputs are `[d_y; d_u]`, added to the plant output and input; outputs are
    /// `[u; y]` with `y = G(u + d_u) + d_y`. States are ordered plant first.
    pub fn positive_feedback_loop(&self, k: &Self) -> Result<Self> {
        let (p, m) = (self.noutputs(), self.ninputs());
        if k.ninputs() != p || k.noutputs() != m {
            return Err(LinalgError::Dimension(format!(
                "feedback: plant {p}x{m}, controller {}x{}",
                k.noutputs(),
                k.ninputs()
            )));
        }
        let time = self.same_time(k)?;
        let (n, nk) = (self.nstates(), k.nstates());
        let e_inv = Mat::identity(p, p) - &self.d * &k.d;
        if e_inv.nrows() > 0 {
            let s = e_inv.clone().svd(false, false).singular_values;
            if s.min() <= 1e-12 * s.max().max(1.0) {
                return Err(LinalgError::AlgebraicLoop);
            }
        }
        let e = solve(&e_inv, &Mat::identity(p, p), "feedback loop").map_err(|_| LinalgError::AlgebraicLoop)?;
        // y = Yx x + Yk xk + Ydy d_y + Ydu d_u
        let yx = &e * &self.c;
        let yk = &e * &self.d * &k.c;
        let ydy = e.clone();
        let ydu = &e * &self.d;
        // u = Ck xk + Dk y
        let ux = &k.d * &yx;
        let uk = &k.c + &k.d * &yk;
        let udy = &k.d * &ydy;
        let udu = &k.d * &ydu;

        let mut a = Mat::zeros(n + nk, n + nk);
        a.view_mut((0, 0), (n, n)).copy_from(&(&self.a + &self.b * &ux));
        a.view_mut((0, n), (n, nk)).copy_from(&(&self.b * &uk));
        a.view_mut((n, 0), (nk, n)).copy_from(&(&k.b * &yx));
        a.view_mut((n, n), (nk, nk)).copy_from(&(&k.a + &k.b * &yk));

        let mut b = Mat::zeros(n + nk, p + m);
        b.view_mut((0, 0), (n, p)).copy_from(&(&self.b * &udy));
        b.view_mut((0, p), (n, m)).copy_from(&(&self.b * (&udu + Mat::identity(m, m))));
        b.view_mut((n, 0), (nk, p)).copy_from(&(&k.b * &ydy));
        b.view_mut((n, p), (nk, m)).copy_from(&(&k.b * &ydu));

        let c = vstack(&hstack(&ux, &uk), &hstack(&yx, &yk));
        let d = vstack(&hstack(&udy, &udu), &hstack(&ydy, &ydu));
        Self::with_time(a, b, c, d, time)
    }

    pub fn to_repr(&self) -> StateSpaceRepr {
        StateSpaceRepr {
            a: to_rows(&self.a),
            b: to_rows(&self.b),
            c: to_rows(&self.c),
            d: to_rows(&self.d),
            nstates: self.nstates(),
            ninputs: self.ninputs(),
            noutputs: self.noutputs(),
            time: self.time,
        }
    }

    pub fn from_repr(r: &StateSpaceRepr) -> Result<Self> {
        let shaped = |rows: &[Vec<f64>], nr: usize, nc: usize, what: &str| -> Result<Mat> {
            if rows.len() != nr || rows.iter().any(|row| row.len() != nc) {
                return Err(LinalgError::Dimension(format!("{what} must be {nr}x{nc}")));
            }
            Ok(if nr == 0 { Mat::zeros(0, nc) } else { from_rows(rows) })
        };
        let (n, m, p) = (r.nstates, r.ninputs, r.noutputs);
        Self::with_time(
            shaped(&r.a, n, n, "A")?,
            shaped(&r.b, n, m, "B")?,
            shaped(&r.c, p, n, "C")?,
            shaped(&r.d, p, m, "D")?,
            r.time,
        )
    }
}

/// Serializable row-major form.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateSpaceRepr {
    pub nstates: usize,
    pub ninputs: usize,
    pub noutputs: usize,
    pub time: TimeDomain,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

pub fn sigma_max_c(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}
