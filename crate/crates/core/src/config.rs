//! TOML configuration files: run settings, turbine, controller designs, scenarios.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::equilibrium::Region;
use crate::error::{Error, Result};
use crate::loopshape::synth::SynthesisOptions;
use crate::loopshape::weights::{WeightElement, WeightSpec};
use crate::loopshape::SweepGrid;
use crate::model::TurbineParams;
use crate::sim::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Synthesize,
    Sweep,
    Simulate,
    #[default]
    All,
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synthesize" => Ok(Self::Synthesize),
            "sweep" => Ok(Self::Sweep),
            "simulate" => Ok(Self::Simulate),
            "all" => Ok(Self::All),
            other => Err(Error::Config(format!(
                "unknown command '{other}' (expected synthesize, sweep, simulate or all)"
            ))),
        }
    }
}

/// Top-level run file. Relative paths resolve against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub out: PathBuf,
    pub seeds: Vec<u64>,
    pub turbine: PathBuf,
    pub weights: PathBuf,
    pub scenarios: Vec<PathBuf>,
    pub synthesis: SynthesisOptions,
    pub sweep: SweepGrid,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::All,
            out: "out".into(),
            seeds: vec![0, 1, 2, 3, 4],
            turbine: "turbine.toml".into(),
            weights: "weights.toml".into(),
            scenarios: Vec::new(),
            synthesis: SynthesisOptions::default(),
            sweep: SweepGrid::default(),
        }
    }
}

/// Weights and linearization point of one controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub design_speed: f64,
    /// Power reference of the linearization point; required for region 3.
    #[serde(default)]
    pub design_power: Option<f64>,
    pub pre: Vec<WeightElement>,
    pub post: Vec<WeightElement>,
}

impl DesignSpec {
    pub fn weights(&self) -> WeightSpec {
        WeightSpec {
            pre: self.pre.clone(),
            post: self.post.clone(),
        }
    }

    fn validate(&self, region: Region) -> Result<()> {
        if !(self.design_speed > 0.0) {
            return Err(Error::Config(format!("k{region}.design_speed must be positive")));
        }
        if region == Region::Three && !self.design_power.is_some_and(|p| p > 0.0) {
            return Err(Error::Config("k3.design_power must be given and positive".into()));
        }
        if self.pre.len() != 2 || self.post.len() != 4 {
            return Err(Error::Config(format!(
                "k{region} needs 2 pre and 4 post weight elements, got {} and {}",
                self.pre.len(),
                self.post.len()
            )));
        }
        self.weights().pre_system()?;
        self.weights().post_system()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub k2: DesignSpec,
    pub k3: DesignSpec,
}

impl Default for DesignFile {
    fn default() -> Self {
        let w2 = WeightSpec::default_k2();
        let w3 = WeightSpec::default_k3();
        Self {
            k2: DesignSpec { design_speed: 7.5, design_power: None, pre: w2.pre, post: w2.post },
            k3: DesignSpec { design_speed: 13.0, design_power: Some(2.0e6), pre: w3.pre, post: w3.post },
        }
    }
}

impl DesignFile {
    pub fn validate(&self) -> Result<()> {
        self.k2.validate(Region::Two)?;
        self.k3.validate(Region::Three)
    }
}

/// Everything a pipeline run needs, with files already parsed.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub run: RunConfig,
    /// Output directory, resolved.
    pub out: PathBuf,
    pub turbine: TurbineParams,
    pub designs: DesignFile,
    pub scenarios: Vec<Scenario>,
}

impl LoadedConfig {
    pub fn validate(&self) -> Result<()> {
        self.run.synthesis.validate()?;
        self.run.sweep.validate()?;
        self.turbine.validate()?;
        self.designs.validate()?;
        if self.run.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut names: Vec<&str> = self.scenarios.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("scenario names must be unique".into()));
        }
        for s in &self.scenarios {
            s.validate()?;
            if (s.dt - self.run.synthesis.dt).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "scenario '{}' uses dt = {} but controllers are sampled at {}",
                    s.name, s.dt, self.run.synthesis.dt
                )));
            }
        }
        Ok(())
    }

    /// Applies a switching margin and dwell to every scenario.
    pub fn override_switching(&mut self, beta_rel: Option<f64>, dwell: Option<f64>) {
        for s in &mut self.scenarios {
            if let Some(b) = beta_rel {
                s.switching.beta_rel = b;
            }
            if let Some(d) = dwell {
                s.switching.hysteresis_hold = d;
            }
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
    (line, col)
}

/// Parses TOML text; errors carry `path:line:col`.
pub fn parse_toml<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let loc = e.span().map(|s| line_col(text, s.start));
        let msg = e.message().trim().to_string();
        match loc {
            Some((l, c)) => Error::Config(format!("{}:{l}:{c}: {msg}", path.display())),
            None => Error::Config(format!("{}: {msg}", path.display())),
        }
    })
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_toml(&text, path)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Loads the run file and everything it references.
pub fn load(path: &Path) -> Result<LoadedConfig> {
    let run: RunConfig = read_toml(path)?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let turbine = read_toml(&resolve(&base, &run.turbine))?;
    let designs = read_toml(&resolve(&base, &run.weights))?;
    let scenarios = run
        .scenarios
        .iter()
        .map(|p| read_toml(&resolve(&base, p)))
        .collect::<Result<Vec<Scenario>>>()?;
    let cfg = LoadedConfig {
        out: resolve(&base, &run.out),
        run,
        turbine,
        designs,
        scenarios,
    };
    cfg.validate()?;
    Ok(cfg)
}
