//! Normalized left coprime factorization `G = M̃⁻¹Ñ` and the optimal
//! robust-stabilization cost.

use windshape_linalg::dense::{solve, spd_inv_sqrt};
use windshape_linalg::{eigenvalues, CareSolver, Mat, StateSpace};

use crate::error::{Error, Result, SynthesisStep};

#[derive(Debug, Clone)]
pub struct CoprimeFactors {
    /// Joint realization of `[Ñ M̃]`, inputs ordered plant inputs first.
    pub nm: StateSpace,
    /// Control Riccati solution.
    pub x: Mat,
    /// Filter Riccati solution.
    pub z: Mat,
    /// Output injection `H = −(ZCᵀ + BDᵀ)R⁻¹`.
    pub h: Mat,
    /// Worst relative residual of the two Riccati equations.
    pub care_residual: f64,
    pub ninputs: usize,
}

impl CoprimeFactors {
    pub fn n(&self) -> StateSpace {
        self.column_block(0, self.ninputs)
    }

    pub fn m(&self) -> StateSpace {
        self.column_block(self.ninputs, self.nm.ninputs() - self.ninputs)
    }

    fn column_block(&self, start: usize, width: usize) -> StateSpace {
        StateSpace {
            a: self.nm.a.clone(),
            b: self.nm.b.columns(start, width).clone_owned(),
            c: self.nm.c.clone(),
            d: self.nm.d.columns(start, width).clone_owned(),
            time: self.nm.time,
        }
    }

    /// `sup ‖Ñ Ñ* + M̃ M̃* − I‖` over the given frequencies.
    pub fn normalization_error(&self, omegas: &[f64]) -> Result<f64> {
        let p = self.nm.noutputs();
        let mut worst: f64 = 0.0;
        for &w in omegas {
            let g = self.nm.freq_response(w)?;
            let e = &g * g.adjoint() - windshape_linalg::statespace::CMat::identity(p, p);
            worst = worst.max(windshape_linalg::statespace::sigma_max_c(&e));
        }
        Ok(worst)
    }
}

/// Normalized left coprime factors of `g` from the filter and control Riccati equations.
pub fn nlcf(g: &StateSpace, solver: &dyn CareSolver) -> Result<CoprimeFactors> {
    let fail = |e: &dyn std::fmt::Display| Error::synthesis(SynthesisStep::Factorize, e);
    if !g.is_continuous() {
        return Err(fail(&"coprime factorization needs a continuous-time plant"));
    }
    let (a, b, c, d) = (&g.a, &g.b, &g.c, &g.d);
    let (p, m) = (g.noutputs(), g.ninputs());
    let r = Mat::identity(p, p) + d * d.transpose();
    let s = Mat::identity(m, m) + d.transpose() * d;
    let s_inv_dtc = solve(&s, &(d.transpose() * c), "I + DᵀD").map_err(|e| fail(&e))?;
    let s_inv_bt = solve(&s, &b.transpose(), "I + DᵀD").map_err(|e| fail(&e))?;
    let r_inv_c = solve(&r, c, "I + DDᵀ").map_err(|e| fail(&e))?;
    let ar = a - b * &s_inv_dtc;

    let zs = solver
        .solve(&ar.transpose(), &c.transpose(), &(b * &s_inv_bt), &r)
        .map_err(|e| fail(&format!("filter Riccati equation: {e}")))?;
    let xs = solver
        .solve(&ar, b, &(c.transpose() * &r_inv_c), &s)
        .map_err(|e| fail(&format!("control Riccati equation: {e}")))?;

    let zc = &zs.x * c.transpose() + b * d.transpose();
    let h = -solve(&r, &zc.transpose(), "I + DDᵀ").map_err(|e| fail(&e))?.transpose();
    let r_isqrt = spd_inv_sqrt(&r).map_err(|e| fail(&e))?;
    let af = a + &h * c;
    let mut bf = Mat::zeros(a.nrows(), m + p);
    bf.columns_mut(0, m).copy_from(&(b + &h * d));
    bf.columns_mut(m, p).copy_from(&h);
    let mut df = Mat::zeros(p, m + p);
    df.columns_mut(0, m).copy_from(&(&r_isqrt * d));
    df.columns_mut(m, p).copy_from(&r_isqrt);
    let nm = StateSpace::new(af, bf, &r_isqrt * c, df).map_err(|e| fail(&e))?;
    if !nm.is_stable().map_err(|e| fail(&e))? {
        return Err(fail(&"coprime factors are not stable"));
    }
    Ok(CoprimeFactors {
        nm,
        x: xs.x,
        z: zs.x,
        h,
        care_residual: xs.residual_norm.max(zs.residual_norm),
        ninputs: m,
    })
}

/// `γ_min = √(1 + λmax(XZ))`.
pub fn gamma_min(f: &CoprimeFactors) -> Result<f64> {
    let xz = &f.x * &f.z;
    let lmax = if xz.nrows() == 0 {
        0.0
    } else {
        eigenvalues(&xz)?
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    // XZ is similar to Z^{1/2} X Z^{1/2} ⪰ 0, so only roundoff can make it negative
    let lmax = lmax.max(0.0);
    let g = (1.0 + lmax).sqrt();
    if !g.is_finite() {
        return Err(Error::synthesis(SynthesisStep::GammaMin, "non-finite gamma_min"));
    }
    Ok(g)
}

/// Same quantity through the Hankel norm of `[Ñ M̃]`: `γ_min = (1 − ‖[Ñ M̃]‖_H²)^{-1/2}`.
pub fn gamma_min_hankel(f: &CoprimeFactors) -> Result<f64> {
    let h = windshape_linalg::gramian::hankel_norm(&f.nm)?;
    if h >= 1.0 {
        return Err(Error::synthesis(SynthesisStep::GammaMin, "Hankel norm of [N M] not below one"));
    }
    Ok((1.0 - h * h).sqrt().recip())
}
