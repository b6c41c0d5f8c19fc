//! Shaped plant, suboptimal central controller and de-augmentation.

use serde::{Deserialize, Serialize};
use windshape_linalg::dense::{solve, Mat};
use windshape_linalg::minreal::{minreal, MINREAL_TOL};
use windshape_linalg::{care_solver, hinf_norm, StateSpace};

use crate::error::{Error, Result, SynthesisStep};
use crate::loopshape::ncf::{gamma_min, nlcf, CoprimeFactors};
use crate::loopshape::weights::WeightSpec;
use crate::switching::discretize::discretizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisOptions {
    /// γ_sub / γ_min.
    pub gamma_factor: f64,
    pub care_solver: String,
    pub discretizer: String,
    /// Controller sample time [s].
    pub dt: f64,
    /// Relative rank tolerance of the minimal-realization pass.
    pub minreal_tol: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            gamma_factor: 1.05,
            care_solver: "schur".into(),
            discretizer: "bilinear".into(),
            dt: 0.004,
            minreal_tol: MINREAL_TOL,
        }
    }
}

impl SynthesisOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_factor > 1.0 && self.gamma_factor.is_finite()) {
            return Err(Error::Config(format!("gamma_factor must exceed 1, got {}", self.gamma_factor)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.minreal_tol > 0.0 && self.minreal_tol < 1.0) {
            return Err(Error::Config("minreal_tol must lie in (0, 1)".into()));
        }
        care_solver(&self.care_solver).map_err(|e| Error::Config(e.to_string()))?;
        discretizer(&self.discretizer)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub g_nominal: StateSpace,
    pub g_shaped: StateSpace,
    pub factors: CoprimeFactors,
    pub gamma_min: f64,
    pub gamma_sub: f64,
    pub k_aug: StateSpace,
    /// Controller from measured outputs to plant inputs, weights folded in.
    pub k: StateSpace,
    pub k_discrete: StateSpace,
    /// `1/γ_sub`.
    pub margin: f64,
    /// ‖[K; I](I − G K)⁻¹ M̃⁻¹‖∞ on the shaped loop.
    pub achieved_cost: f64,
    pub closed_loop_abscissa: f64,
}

/// `W_post · G · W_pre`, reduced to a minimal realization.
pub fn shape_plant(gn: &StateSpace, w: &WeightSpec, tol: f64) -> Result<StateSpace> {
    let pre = w.pre_system()?;
    let post = w.post_system()?;
    if pre.noutputs() != gn.ninputs() || post.ninputs() != gn.noutputs() {
        return Err(Error::Config(format!(
            "weights are {}x{} (pre) and {}x{} (post) for a plant with {} inputs and {} outputs",
            pre.noutputs(),
            pre.ninputs(),
            post.noutputs(),
            post.ninputs(),
            gn.ninputs(),
            gn.noutputs()
        )));
    }
    let shaped = pre.series(gn)?.series(&post)?;
    Ok(minreal(&shaped, tol)?)
}

/// `W_pre · K_aug · W_post`, reduced to a minimal realization.
pub fn deaugment(k_aug: &StateSpace, w: &WeightSpec, tol: f64) -> Result<StateSpace> {
    let k = w.post_system()?.series(k_aug)?.series(&w.pre_system()?)?;
    Ok(minreal(&k, tol)?)
}

/// McFarlane–Glover central controller at `γ`, for positive feedback `u = K y`.
pub fn central_controller(g: &StateSpace, f: &CoprimeFactors, gamma: f64) -> Result<StateSpace> {
    let fail = |e: &dyn std::fmt::Display| Error::synthesis(SynthesisStep::Controller, e);
    let (a, b, c, d) = (&g.a, &g.b, &g.c, &g.d);
    let (n, m) = (g.nstates(), g.ninputs());
    let s = Mat::identity(m, m) + d.transpose() * d;
    let f_gain = -solve(&s, &(d.transpose() * c + b.transpose() * &f.x), "I + DᵀD").map_err(|e| fail(&e))?;
    let g2 = gamma * gamma;
    let l = Mat::identity(n, n) * (1.0 - g2) + &f.x * &f.z;
    // L⁻ᵀ Z Cᵀ
    let lt_zc = solve(&l.transpose(), &(&f.z * c.transpose()), "(1 − γ²)I + XZ").map_err(|e| fail(&e))?;
    let bk = &lt_zc * g2;
    let ak = a + b * &f_gain + &bk * (c + d * &f_gain);
    let ck = b.transpose() * &f.x;
    let dk = -d.transpose();
    StateSpace::new(ak, bk, ck, dk).map_err(|e| fail(&e))
}

/// H∞ norm of `[K; I](I − G K)⁻¹[I G]`, which equals the cost with `M̃⁻¹`
/// on the right because `[M̃ Ñ]` is co-inner.
pub fn achieved_cost(g: &StateSpace, k: &StateSpace) -> Result<f64> {
    let cl = g.positive_feedback_loop(k)?;
    Ok(hinf_norm(&cl)?.norm)
}

/// Full design: shape, factorize, synthesize, fold the weights back and discretize.
pub fn synthesize(gn: &StateSpace, w: &WeightSpec, opts: &SynthesisOptions) -> Result<SynthesisResult> {
    opts.validate()?;
    let solver = care_solver(&opts.care_solver).map_err(|e| Error::Config(e.to_string()))?;
    let g_shaped = shape_plant(gn, w, opts.minreal_tol)
        .map_err(|e| Error::synthesis(SynthesisStep::Factorize, e))?;
    let factors = nlcf(&g_shaped, solver.as_ref())?;
    let gmin = gamma_min(&factors)?;
    let gamma_sub = opts.gamma_factor * gmin;
    let k_aug = central_controller(&g_shaped, &factors, gamma_sub)?;

    let verify = |e: &dyn std::fmt::Display| Error::synthesis(SynthesisStep::Verify, e);
    let cl = g_shaped.positive_feedback_loop(&k_aug).map_err(|e| verify(&e))?;
    let closed_loop_abscissa = cl.stability_measure().map_err(|e| verify(&e))?;
    if !cl.is_stable().map_err(|e| verify(&e))? {
        return Err(verify(&format!(
            "shaped closed loop is not stable (abscissa {closed_loop_abscissa:e})"
        )));
    }
    let achieved = hinf_norm(&cl).map_err(|e| verify(&e))?.norm;
    if achieved > gamma_sub + 1e-4 {
        return Err(verify(&format!("achieved cost {achieved} exceeds gamma_sub {gamma_sub}")));
    }

    let deaug = |e: &dyn std::fmt::Display| Error::synthesis(SynthesisStep::Deaugment, e);
    let k = deaugment(&k_aug, w, opts.minreal_tol).map_err(|e| deaug(&e))?;
    let nominal_cl = gn.positive_feedback_loop(&k).map_err(|e| verify(&e))?;
    if !nominal_cl.is_stable().map_err(|e| verify(&e))? {
        return Err(verify(&"closed loop of the unweighted plant and controller is not stable"));
    }
    let k_discrete = discretizer(&opts.discretizer)?
        .discretize(&k, opts.dt)
        .map_err(|e| deaug(&e))?;

    Ok(SynthesisResult {
        g_nominal: gn.clone(),
        g_shaped,
        factors,
        gamma_min: gmin,
        gamma_sub,
        k_aug,
        k,
        k_discrete,
        margin: 1.0 / gamma_sub,
        achieved_cost: achieved,
        closed_loop_abscissa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights_leave_plant_unchanged() {
        let g = StateSpace::new(
            Mat::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, -3.0]),
            Mat::from_row_slice(2, 1, &[0.0, 1.0]),
            Mat::from_row_slice(1, 2, &[1.0, 0.0]),
            Mat::zeros(1, 1),
        )
        .unwrap();
        let shaped = shape_plant(&g, &WeightSpec::identity(1, 1), MINREAL_TOL).unwrap();
        for w in [0.0, 0.5, 7.0] {
            let e = (shaped.freq_response(w).unwrap() - g.freq_response(w).unwrap()).norm();
            assert!(e < 1e-10);
        }
    }

    #[test]
    fn scalar_lag_design_meets_bound() {
        let g = StateSpace::new(
            Mat::from_element(1, 1, -1.0),
            Mat::from_element(1, 1, 1.0),
            Mat::from_element(1, 1, 1.0),
            Mat::zeros(1, 1),
        )
        .unwrap();
        for factor in [1.05, 10.0] {
            let opts = SynthesisOptions { gamma_factor: factor, ..Default::default() };
            let r = synthesize(&g, &WeightSpec::identity(1, 1), &opts).unwrap();
            assert!(r.achieved_cost <= r.gamma_sub + 1e-4);
            assert!(r.closed_loop_abscissa < 0.0);
        }
    }

    #[test]
    fn gamma_factor_must_exceed_one() {
        let g = StateSpace::gain(Mat::from_element(1, 1, 1.0));
        let opts = SynthesisOptions { gamma_factor: 1.0, ..Default::default() };
        assert!(synthesize(&g, &WeightSpec::identity(1, 1), &opts).unwrap_err().is_config());
    }
}
