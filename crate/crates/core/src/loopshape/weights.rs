//! Diagonal pre- and post-compensators built from scalar transfer functions.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use windshape_linalg::{eigenvalues, Mat, StateSpace};

use crate::error::{Error, Result};

/// `gain · num(s)/den(s)`, coefficients in descending powers of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightElement {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
    #[serde(default = "unit_gain")]
    pub gain: f64,
}

fn unit_gain() -> f64 {
    1.0
}

impl WeightElement {
    pub fn new(num: &[f64], den: &[f64]) -> Self {
        Self {
            num: num.to_vec(),
            den: den.to_vec(),
            gain: 1.0,
        }
    }

    pub fn unit() -> Self {
        Self::new(&[1.0], &[1.0])
    }

    /// Controllable canonical realization; rejects improper or unstable elements.
    /// Poles exactly at the origin (integrators) are admitted.
    pub fn to_state_space(&self) -> Result<StateSpace> {
        let strip = |c: &[f64]| -> Vec<f64> {
            let first = c.iter().position(|&v| v != 0.0).unwrap_or(c.len());
            c[first..].to_vec()
        };
        if self.num.iter().chain(&self.den).chain([&self.gain]).any(|v| !v.is_finite()) {
            return Err(Error::Config("weight coefficients must be finite".into()));
        }
        let den = strip(&self.den);
        let num: Vec<f64> = strip(&self.num).iter().map(|v| v * self.gain).collect();
        if den.is_empty() {
            return Err(Error::Config("weight denominator is identically zero".into()));
        }
        let n = den.len() - 1;
        if num.len() > den.len() {
            return Err(Error::Config(format!(
                "weight is improper: numerator degree {} exceeds denominator degree {n}",
                num.len() - 1
            )));
        }
        let lead = den[0];
        let a_coef: Vec<f64> = den[1..].iter().map(|v| v / lead).collect();
        let mut b_coef = vec![0.0; n + 1 - num.len()];
        b_coef.extend(num.iter().map(|v| v / lead));
        let d = b_coef[0];
        if n == 0 {
            return Ok(StateSpace::gain(Mat::from_element(1, 1, d)));
        }
        let mut a = Mat::zeros(n, n);
        for j in 0..n {
            a[(0, j)] = -a_coef[j];
        }
        for i in 1..n {
            a[(i, i - 1)] = 1.0;
        }
        let mut b = Mat::zeros(n, 1);
        b[(0, 0)] = 1.0;
        let c = Mat::from_fn(1, n, |_, j| b_coef[j + 1] - d * a_coef[j]);
        self.check_poles(&a_coef)?;
        Ok(StateSpace::new(a, b, c, Mat::from_element(1, 1, d))?)
    }

    fn check_poles(&self, a_coef: &[f64]) -> Result<()> {
        // strip trailing zero coefficients: those are integrators
        let k = a_coef.iter().rposition(|&v| v != 0.0).map_or(0, |i| i + 1);
        if k == 0 {
            return Ok(());
        }
        let mut comp = Mat::zeros(k, k);
        for j in 0..k {
            comp[(0, j)] = -a_coef[j];
        }
        for i in 1..k {
            comp[(i, i - 1)] = 1.0;
        }
        let poles = eigenvalues(&comp)?;
        if let Some(p) = poles.iter().find(|p| p.re >= 0.0) {
            return Err(Error::Config(format!(
                "weight {:?}/{:?} has a pole at {:.4}{:+.4}i; only stable poles and integrators are allowed",
                self.num, self.den, p.re, p.im
            )));
        }
        Ok(())
    }
}

/// Per-channel pre-compensator (plant inputs) and post-compensator (plant outputs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub pre: Vec<WeightElement>,
    pub post: Vec<WeightElement>,
}

impl WeightSpec {
    pub fn identity(m: usize, p: usize) -> Self {
        Self {
            pre: vec![WeightElement::unit(); m],
            post: vec![WeightElement::unit(); p],
        }
    }

    pub fn pre_system(&self) -> Result<StateSpace> {
        diagonal(&self.pre)
    }

    pub fn post_system(&self) -> Result<StateSpace> {
        diagonal(&self.post)
    }

    /// Static per-channel gains scaling the numerators.
    pub fn with_channel_gains(mut self, pre: &[f64], post: &[f64]) -> Self {
        for (w, g) in self.pre.iter_mut().zip(pre) {
            w.gain *= g;
        }
        for (w, g) in self.post.iter_mut().zip(post) {
            w.gain *= g;
        }
        self
    }

    /// Default region-2 weights: first-order actuator roll-off on the inputs,
    /// PI action on the tip-speed ratio.
    pub fn default_k2() -> Self {
        Self {
            pre: vec![
                WeightElement::new(&[5.2], &[1.0, 2.0]),
                WeightElement::new(&[1579.0], &[1.0, 50.0]),
            ],
            post: vec![
                WeightElement::new(&[7.6e-5], &[1.0]),
                WeightElement::new(&[0.5, 0.25], &[0.01, 1.0, 0.0]),
                WeightElement::new(&[2.9e-12], &[100.0, 1.0]),
                WeightElement::new(&[0.01], &[10.0, 1.0]),
            ],
        }
    }

    /// Default region-3 weights: PI action on speed and power.
    pub fn default_k3() -> Self {
        Self {
            pre: vec![
                WeightElement::new(&[10.4], &[1.0, 2.0]),
                WeightElement::new(&[6.315], &[1.0, 2.0]),
            ],
            post: vec![
                WeightElement::new(&[6.1, 0.76], &[1000.0, 0.0]),
                WeightElement::new(&[5e-11], &[1.0]),
                WeightElement::new(&[1.18, 2.37], &[2e5, 0.0]),
                WeightElement::new(&[1e-4], &[100.0, 1.0]),
            ],
        }
        .with_channel_gains(&[1.0, 100.0], &[10.0, 1.0, 100.0, 1.0])
    }
}

fn diagonal(elements: &[WeightElement]) -> Result<StateSpace> {
    let mut sys: Option<StateSpace> = None;
    for (i, w) in elements.iter().enumerate() {
        let s = w
            .to_state_space()
            .map_err(|e| Error::Config(format!("weight channel {}: {e}", i + 1)))?;
        sys = Some(match sys {
            None => s,
            Some(acc) => acc.append(&s)?,
        });
    }
    sys.ok_or_else(|| Error::Config("weight list is empty".into()))
}

/// Gains of each diagonal element at a frequency.
pub fn element_gains(elements: &[WeightElement], omega: f64) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(elements.len());
    for (i, w) in elements.iter().enumerate() {
        out[i] = w.to_state_space()?.sigma_max(omega)?;
    }
    Ok(out)
}
