//! H∞ norm of stable continuous-time systems.
//!
//! Two-step level-set iteration: a lower bound is raised by evaluating the
//! frequency response between the imaginary-axis eigenvalues of the
//! Hamiltonian at a level slightly above it, until that Hamiltonian has none.

use num_complex::Complex64;

use crate::dense::{frob, solve, Mat};
use crate::error::{LinalgError, Result};
use crate::schur::{eigenvalues, spectral_abscissa, HURWITZ_TOL};
use crate::statespace::{sigma_max_c, StateSpace};

pub const HINF_RTOL: f64 = 1e-10;
const MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HinfNorm {
    pub norm: f64,
    /// Frequency (rad/s) where the peak was observed; `f64::INFINITY` when the
    /// supremum is only approached at high frequency.
    pub peak_frequency: f64,
}

pub fn hinf_norm(sys: &StateSpace) -> Result<HinfNorm> {
    hinf_norm_tol(sys, HINF_RTOL)
}

pub fn hinf_norm_tol(sys: &StateSpace, rtol: f64) -> Result<HinfNorm> {
    if !sys.is_continuous() && sys.nstates() > 0 {
        return Err(LinalgError::Dimension(
            "H-infinity norm is implemented for continuous-time systems".into(),
        ));
    }
    let dnorm = sigma_max_real(&sys.d);
    let static_norm = HinfNorm {
        norm: dnorm,
        peak_frequency: f64::INFINITY,
    };
    if sys.nstates() == 0 || sys.ninputs() == 0 || sys.noutputs() == 0 {
        return Ok(static_norm);
    }
    let abscissa = spectral_abscissa(&sys.a)?;
    if abscissa >= -HURWITZ_TOL {
        return Err(LinalgError::UnboundedNorm { abscissa });
    }
    if frob(&sys.b) == 0.0 || frob(&sys.c) == 0.0 {
        return Ok(static_norm);
    }

    let mut lb = dnorm;
    let mut peak = f64::INFINITY;
    let probe = |w: f64, lb: &mut f64, peak: &mut f64| -> Result<()> {
        let s = sigma_max_c(&sys.freq_response(w)?);
        if s > *lb {
            *lb = s;
            *peak = w;
        }
        Ok(())
    };
    for w in initial_frequencies(&sys.poles()?) {
        probe(w, &mut lb, &mut peak)?;
    }
    if lb == 0.0 {
        return Ok(static_norm);
    }

    for _ in 0..MAX_ITER {
        let gamma = lb * (1.0 + 2.0 * rtol);
        let mut freqs = imaginary_crossings(sys, gamma)?;
        if freqs.is_empty() {
            break;
        }
        freqs.sort_by(f64::total_cmp);
        freqs.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
        let before = lb;
        let mut candidates = freqs.clone();
        for pair in freqs.windows(2) {
            candidates.push(0.5 * (pair[0] + pair[1]));
        }
        for w in candidates {
            probe(w, &mut lb, &mut peak)?;
        }
        if lb <= before * (1.0 + rtol) {
            // crossings are numerical noise at the current level
            break;
        }
    }
    Ok(HinfNorm {
        norm: lb,
        peak_frequency: peak,
    })
}

fn sigma_max_real(m: &Mat) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.clone().svd(false, false).singular_values.max()
    }
}

fn initial_frequencies(poles: &[Complex64]) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for p in poles {
        let r = p.norm();
        if r > 0.0 {
            lo = lo.min(r);
            hi = hi.max(r);
        }
        out.push(p.im.abs());
        out.push(r);
        // resonance peak of a lightly damped pair sits near √(|p|² − 2 Re²)
        let d = r * r - 2.0 * p.re * p.re;
        if d > 0.0 {
            out.push(d.sqrt());
        }
    }
    if lo.is_finite() {
        let (a, b) = ((lo / 10.0).log10(), (hi * 10.0).log10());
        let k = 60;
        for i in 0..=k {
            out.push(10f64.powf(a + (b - a) * i as f64 / k as f64));
        }
    }
    out
}

/// Nonnegative frequencies of (near) imaginary eigenvalues of the level-γ Hamiltonian.
fn imaginary_crossings(sys: &StateSpace, gamma: f64) -> Result<Vec<f64>> {
    let h = hamiltonian(sys, gamma)?;
    let scale = frob(&h);
    let eigs = eigenvalues(&h)?;
    Ok(eigs
        .iter()
        .filter(|l| l.im >= 0.0 && l.re.abs() <= 1e-6 * l.norm() + 1e-10 * scale)
        .map(|l| l.im)
        .collect())
}

fn hamiltonian(sys: &StateSpace, gamma: f64) -> Result<Mat> {
    let (a, b, c, d) = (&sys.a, &sys.b, &sys.c, &sys.d);
    let n = a.nrows();
    let m = b.ncols();
    let p = c.nrows();
    let r = Mat::identity(m, m) * (gamma * gamma) - d.transpose() * d;
    let ri_dt_c = solve(&r, &(d.transpose() * c), "γ²I − DᵀD")?;
    let ri_bt = solve(&r, &b.transpose(), "γ²I − DᵀD")?;
    let a_h = a + b * &ri_dt_c;
    let g = b * ri_bt;
    let q = c.transpose() * (Mat::identity(p, p) + d * solve(&r, &d.transpose(), "γ²I − DᵀD")?) * c;
    let mut h = Mat::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&a_h);
    h.view_mut((0, n), (n, n)).copy_from(&g);
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a_h.transpose()));
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn siso(a: &[f64], b: &[f64], c: &[f64], d: f64) -> StateSpace {
        let n = b.len();
        StateSpace::new(
            Mat::from_row_slice(n, n, a),
            Mat::from_row_slice(n, 1, b),
            Mat::from_row_slice(1, n, c),
            Mat::from_element(1, 1, d),
        )
        .unwrap()
    }

    #[test]
    fn first_order_lag() {
        let h = hinf_norm(&siso(&[-1.0], &[1.0], &[1.0], 0.0)).unwrap();
        assert!((h.norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feedthrough_dominated() {
        // (s + 3)/(s + 1) peaks at DC with value 3
        let h = hinf_norm(&siso(&[-1.0], &[1.0], &[2.0], 1.0)).unwrap();
        assert!((h.norm - 3.0).abs() < 1e-9);
    }

    #[test]
    fn lightly_damped_resonance() {
        let h = hinf_norm(&siso(&[0.0, 1.0, -1.0, -0.1], &[0.0, 1.0], &[1.0, 0.0], 0.0)).unwrap();
        let exact = 1.0 / (0.1 * (1.0f64 - 0.0025).sqrt());
        assert!((h.norm - exact).abs() / exact < 1e-9, "{}", h.norm);
        assert!((h.peak_frequency - (1.0f64 - 0.005).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn unstable_rejected() {
        let e = hinf_norm(&siso(&[0.5], &[1.0], &[1.0], 0.0));
        assert!(matches!(e, Err(LinalgError::UnboundedNorm { .. })));
    }
}
