#![allow(dead_code)]

use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use windshape::config::{DesignFile, LoadedConfig, RunConfig};
use windshape::equilibrium::{Region, Turbine};
use windshape::linalg::{Mat, StateSpace};
use windshape::model::TurbineParams;
use windshape::pipeline::{design_controllers, Designs};

pub fn turbine() -> &'static Turbine {
    static T: OnceLock<Turbine> = OnceLock::new();
    T.get_or_init(|| Turbine::new(TurbineParams::default()).unwrap())
}

pub fn default_config() -> LoadedConfig {
    LoadedConfig {
        run: RunConfig::default(),
        out: "out".into(),
        turbine: TurbineParams::default(),
        designs: DesignFile::default(),
        scenarios: Vec::new(),
    }
}

pub fn designs() -> &'static Designs {
    static D: OnceLock<Designs> = OnceLock::new();
    D.get_or_init(|| design_controllers(turbine(), &default_config()).unwrap())
}

/// Random stable plant with a shifted spectrum and a random feedthrough.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> StateSpace {
    let mut a = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let abscissa = windshape::linalg::spectral_abscissa(&a).unwrap();
    for i in 0..n {
        a[(i, i)] -= abscissa + rng.random_range(0.1..1.0);
    }
    let b = Mat::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
    let c = Mat::from_fn(p, n, |_, _| rng.random_range(-1.0..1.0));
    let d = Mat::from_fn(p, m, |_, _| rng.random_range(-0.5..0.5));
    StateSpace::new(a, b, c, d).unwrap()
}

/// Random plant that may be unstable.
pub fn random_plant(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> StateSpace {
    let a = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let b = Mat::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
    let c = Mat::from_fn(p, n, |_, _| rng.random_range(-1.0..1.0));
    let d = Mat::from_fn(p, m, |_, _| rng.random_range(-0.5..0.5));
    StateSpace::new(a, b, c, d).unwrap()
}

/// Random feasible operating point, alternating between regions.
pub fn random_operating_point(rng: &mut ChaCha8Rng, i: usize) -> windshape::equilibrium::OperatingPoint {
    let t = turbine();
    loop {
        if i % 2 == 0 {
            let v = rng.random_range(4.0..11.0);
            if let Ok(op) = t.region2(v) {
                return op;
            }
        } else {
            let v = rng.random_range(9.0..16.0);
            let p_max = t.available_power(v).min(t.params.p_rated) * 0.95;
            let p = rng.random_range(0.3e6..p_max);
            if let Ok(op) = t.operating_point(Region::Three, v, p) {
                return op;
            }
        }
    }
}

pub fn log_frequencies(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (n - 1) as f64))
        .collect()
}

/// The configuration shipped in the repository's `configs/` directory.
pub fn repo_config() -> LoadedConfig {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/run.toml");
    windshape::config::load(&path).unwrap()
}

pub fn repo_scenario(name: &str) -> windshape::sim::Scenario {
    repo_config()
        .scenarios
        .into_iter()
        .find(|s| s.name == name)
        .unwrap_or_else(|| panic!("no scenario '{name}'"))
}
