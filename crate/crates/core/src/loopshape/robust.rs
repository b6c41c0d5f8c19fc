//! Coprime-factor perturbation margins over a grid of operating points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use windshape_linalg::{care_solver, hinf_norm, CareSolver, StateSpace};

use crate::equilibrium::Turbine;
use crate::error::{Error, Result};
use crate::linearize::linearize_at;
use crate::loopshape::ncf::{nlcf, CoprimeFactors};
use crate::loopshape::synth::{shape_plant, SynthesisOptions, SynthesisResult};
use crate::loopshape::weights::WeightSpec;
use crate::parallel::with_thread_pool;

/// `‖[Ñp − Ñ, M̃p − M̃]‖∞` between the nominal factors and those of a perturbed
/// shaped plant; `+∞` when the difference is not stable.
pub fn coprime_margin(nominal: &CoprimeFactors, perturbed: &StateSpace, solver: &dyn CareSolver) -> Result<f64> {
    let fp = nlcf(perturbed, solver)?;
    if fp.nm.d.shape() != nominal.nm.d.shape() {
        return Err(Error::Domain("perturbed plant has different input/output sizes".into()));
    }
    let diff = fp.nm.parallel(&nominal.nm.negate())?;
    if !diff.is_stable()? {
        return Ok(f64::INFINITY);
    }
    Ok(hinf_norm(&diff)?.norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub v_min: f64,
    pub v_max: f64,
    pub nv: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            v_min: 4.0,
            v_max: 16.0,
            nv: 20,
            p_min: 2.0e5,
            p_max: 3.4e6,
            np: 20,
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.nv == 0 || self.np == 0 || !(self.v_min > 0.0 && self.v_max >= self.v_min) || !(self.p_min > 0.0 && self.p_max >= self.p_min) {
            return Err(Error::Config("sweep grid needs positive, ordered bounds and nonzero counts".into()));
        }
        Ok(())
    }

    pub fn speeds(&self) -> Vec<f64> {
        linspace(self.v_min, self.v_max, self.nv)
    }

    pub fn powers(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginPoint {
    pub v: f64,
    pub p: f64,
    /// `None` when no equilibrium exists at this grid point.
    pub margin: Option<f64>,
    /// Margin strictly below `1/γ_sub`.
    pub certified: bool,
    /// Independent closed-loop eigenvalue verdict for the unweighted plant.
    pub stable: Option<bool>,
}

impl MarginPoint {
    pub fn feasible(&self) -> bool {
        self.margin.is_some()
    }
}

fn evaluate_point(
    turbine: &Turbine,
    design: &SynthesisResult,
    weights: &WeightSpec,
    opts: &SynthesisOptions,
    solver: &dyn CareSolver,
    v: f64,
    p: f64,
) -> Result<MarginPoint> {
    let infeasible = MarginPoint { v, p, margin: None, certified: false, stable: None };
    if p > turbine.available_power(v) || p > turbine.params.p_rated {
        return Ok(infeasible);
    }
    let op = match turbine.region3(v, p) {
        Ok(op) => op,
        Err(Error::InfeasibleReference { .. } | Error::Envelope(_)) => return Ok(infeasible),
        Err(e) => return Err(e),
    };
    let gp = linearize_at(&turbine.params, &op)?;
    let stable = gp.positive_feedback_loop(&design.k)?.is_stable()?;
    let margin = match shape_plant(&gp, weights, opts.minreal_tol).and_then(|ga| coprime_margin(&design.factors, &ga, solver)) {
        Ok(m) => m,
        // a perturbed plant that cannot be factorized cannot be certified
        Err(Error::Synthesis { .. }) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    Ok(MarginPoint {
        v,
        p,
        margin: Some(margin),
        certified: margin < design.margin,
        stable: Some(stable),
    })
}

/// Margins and stability verdicts of one design over the grid, row-major in
/// wind speed. Runs on the shared thread pool.
pub fn robustness_sweep(
    turbine: &Turbine,
    design: &SynthesisResult,
    weights: &WeightSpec,
    grid: &SweepGrid,
    opts: &SynthesisOptions,
) -> Result<Vec<MarginPoint>> {
    grid.validate()?;
    let points: Vec<(f64, f64)> = grid
        .speeds()
        .into_iter()
        .flat_map(|v| grid.powers().into_iter().map(move |p| (v, p)))
        .collect();
    let solver_name = opts.care_solver.clone();
    with_thread_pool(|| {
        points
            .par_iter()
            .map(|&(v, p)| {
                let solver = care_solver(&solver_name).map_err(|e| Error::Config(e.to_string()))?;
                evaluate_point(turbine, design, weights, opts, solver.as_ref(), v, p)
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub grid_points: usize,
    pub feasible: usize,
    pub certified_k2: usize,
    pub certified_k3: usize,
    pub stable_k2: usize,
    pub stable_k3: usize,
    pub overlap: usize,
    /// Overlap count over feasible grid points.
    pub overlap_fraction: f64,
    pub counterexamples: usize,
}

pub fn summarize(k2: &[MarginPoint], k3: &[MarginPoint]) -> SweepSummary {
    let count = |pts: &[MarginPoint], f: &dyn Fn(&MarginPoint) -> bool| pts.iter().filter(|p| f(p)).count();
    let feasible = count(k2, &|p| p.feasible());
    let overlap = k2.iter().zip(k3).filter(|(a, b)| a.certified && b.certified).count();
    let counterexamples = count(k2, &|p| p.certified && p.stable == Some(false))
        + count(k3, &|p| p.certified && p.stable == Some(false));
    SweepSummary {
        grid_points: k2.len(),
        feasible,
        certified_k2: count(k2, &|p| p.certified),
        certified_k3: count(k3, &|p| p.certified),
        stable_k2: count(k2, &|p| p.stable == Some(true)),
        stable_k3: count(k3, &|p| p.stable == Some(true)),
        overlap,
        overlap_fraction: if feasible == 0 { 0.0 } else { overlap as f64 / feasible as f64 },
        counterexamples,
    }
}
