//! Batch commands: synthesis, robustness sweep and scenario simulation,
//! each writing deterministic artifacts below the output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use windshape_linalg::StateSpaceRepr;

use crate::config::{Command, DesignSpec, LoadedConfig};
use crate::equilibrium::{OperatingPoint, Region, Turbine};
use crate::error::{Error, Result};
use crate::linearize::linearize_at;
use crate::loopshape::robust::{robustness_sweep, summarize, MarginPoint, SweepSummary};
use crate::loopshape::synth::{synthesize, SynthesisResult};
use crate::loopshape::weights::WeightElement;
use crate::parallel::with_thread_pool;
use crate::sim::io::{write_json, write_switches, write_trace};
use crate::sim::{compute_metrics, run, Controllers, Metrics, Scenario};

pub const MARGIN_HEADER: &str = "V,P,feasible,margin_K2,certified_K2,stable_K2,margin_K3,certified_K3,stable_K3";

/// A synthesized controller together with its design point.
#[derive(Debug, Clone)]
pub struct Design {
    pub region: Region,
    pub op: OperatingPoint,
    pub spec: DesignSpec,
    pub result: SynthesisResult,
}

#[derive(Debug, Clone)]
pub struct Designs {
    pub k2: Design,
    pub k3: Design,
}

impl Designs {
    pub fn controllers(&self) -> Controllers {
        Controllers {
            k2: self.k2.result.k_discrete.clone(),
            k3: self.k3.result.k_discrete.clone(),
        }
    }
}

fn design_one(turbine: &Turbine, cfg: &LoadedConfig, region: Region) -> Result<Design> {
    let spec = match region {
        Region::Two => &cfg.designs.k2,
        Region::Three => &cfg.designs.k3,
    };
    let op = turbine.operating_point(region, spec.design_speed, spec.design_power.unwrap_or(0.0))?;
    let g = linearize_at(&turbine.params, &op)?;
    let result = synthesize(&g, &spec.weights(), &cfg.run.synthesis)?;
    info!(
        "K{region}: gamma_min = {:.4}, gamma_sub = {:.4}, margin = {:.4}",
        result.gamma_min, result.gamma_sub, result.margin
    );
    Ok(Design { region, op, spec: spec.clone(), result })
}

pub fn design_controllers(turbine: &Turbine, cfg: &LoadedConfig) -> Result<Designs> {
    Ok(Designs {
        k2: design_one(turbine, cfg, Region::Two)?,
        k3: design_one(turbine, cfg, Region::Three)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerFile {
    pub region: Region,
    pub design_speed: f64,
    pub design_power: Option<f64>,
    pub gamma_min: f64,
    pub gamma_sub: f64,
    pub margin: f64,
    /// Output-feedback controller `u = K y` around the design point.
    pub continuous: StateSpaceRepr,
    pub discrete: StateSpaceRepr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub design_speed: f64,
    pub design_power: Option<f64>,
    pub pre_weights: Vec<WeightElement>,
    pub post_weights: Vec<WeightElement>,
    pub equilibrium: OperatingPoint,
    pub shaped_states: usize,
    pub controller_states: usize,
    pub gamma_min: f64,
    pub gamma_sub: f64,
    pub margin: f64,
    pub achieved_cost: f64,
    pub closed_loop_abscissa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub care_solver: String,
    pub discretizer: String,
    pub gamma_factor: f64,
    pub dt: f64,
    pub k2: DesignReport,
    pub k3: DesignReport,
}

fn report(d: &Design) -> DesignReport {
    let r = &d.result;
    DesignReport {
        design_speed: d.spec.design_speed,
        design_power: d.spec.design_power,
        pre_weights: d.spec.pre.clone(),
        post_weights: d.spec.post.clone(),
        equilibrium: d.op,
        shaped_states: r.g_shaped.nstates(),
        controller_states: r.k.nstates(),
        gamma_min: r.gamma_min,
        gamma_sub: r.gamma_sub,
        margin: r.margin,
        achieved_cost: r.achieved_cost,
        closed_loop_abscissa: r.closed_loop_abscissa,
    }
}

fn controller_file(d: &Design) -> ControllerFile {
    ControllerFile {
        region: d.region,
        design_speed: d.spec.design_speed,
        design_power: d.spec.design_power,
        gamma_min: d.result.gamma_min,
        gamma_sub: d.result.gamma_sub,
        margin: d.result.margin,
        continuous: d.result.k.to_repr(),
        discrete: d.result.k_discrete.to_repr(),
    }
}

pub fn cmd_synthesize(cfg: &LoadedConfig, turbine: &Turbine) -> Result<(Designs, SynthesisReport)> {
    let designs = design_controllers(turbine, cfg)?;
    let out = &cfg.out;
    write_json(&out.join("controllers").join("k2.json"), &controller_file(&designs.k2))?;
    write_json(&out.join("controllers").join("k3.json"), &controller_file(&designs.k3))?;
    let s = &cfg.run.synthesis;
    let rep = SynthesisReport {
        care_solver: s.care_solver.clone(),
        discretizer: s.discretizer.clone(),
        gamma_factor: s.gamma_factor,
        dt: s.dt,
        k2: report(&designs.k2),
        k3: report(&designs.k3),
    };
    write_json(&out.join("synthesis_report.json"), &rep)?;
    Ok((designs, rep))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub margin_threshold_k2: f64,
    pub margin_threshold_k3: f64,
    #[serde(flatten)]
    pub summary: SweepSummary,
}

fn fmt_margin(p: &MarginPoint) -> String {
    match p.margin {
        None => String::new(),
        Some(m) if m.is_infinite() => "inf".into(),
        Some(m) => format!("{m}"),
    }
}

fn fmt_flag(b: Option<bool>) -> String {
    b.map_or(String::new(), |b| b.to_string())
}

/// Writes the margin map with one row per grid point.
pub fn write_margin_map(path: &Path, k2: &[MarginPoint], k3: &[MarginPoint]) -> Result<()> {
    let mut text = String::from(MARGIN_HEADER);
    text.push('\n');
    for (a, b) in k2.iter().zip(k3) {
        let feasible = a.feasible() && b.feasible();
        let certified = |p: &MarginPoint| fmt_flag(p.feasible().then_some(p.certified));
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            a.v,
            a.p,
            feasible,
            fmt_margin(a),
            certified(a),
            fmt_flag(a.stable),
            fmt_margin(b),
            certified(b),
            fmt_flag(b.stable)
        ));
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// One row of the margin map as read back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginRow {
    pub v: f64,
    pub p: f64,
    pub k2: MarginPoint,
    pub k3: MarginPoint,
}

pub fn read_margin_map(path: &Path) -> Result<Vec<MarginRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(MARGIN_HEADER) {
        return Err(Error::io(path, "unexpected margin map header"));
    }
    let bad = |n: usize| Error::io(path, format!("malformed row {n}"));
    lines
        .enumerate()
        .map(|(n, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(bad(n + 2));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(n + 2));
            let opt_num = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
            let opt_bool = |s: &str| match s {
                "" => Ok(None),
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                _ => Err(bad(n + 2)),
            };
            let (v, p) = (num(f[0])?, num(f[1])?);
            let point = |m: &str, c: &str, s: &str| -> Result<MarginPoint> {
                Ok(MarginPoint {
                    v,
                    p,
                    margin: opt_num(m)?,
                    certified: opt_bool(c)?.unwrap_or(false),
                    stable: opt_bool(s)?,
                })
            };
            Ok(MarginRow {
                v,
                p,
                k2: point(f[3], f[4], f[5])?,
                k3: point(f[6], f[7], f[8])?,
            })
        })
        .collect()
}

pub fn cmd_sweep(cfg: &LoadedConfig, turbine: &Turbine, designs: &Designs) -> Result<SweepReport> {
    let grid = &cfg.run.sweep;
    let opts = &cfg.run.synthesis;
    let k2 = robustness_sweep(turbine, &designs.k2.result, &designs.k2.spec.weights(), grid, opts)?;
    let k3 = robustness_sweep(turbine, &designs.k3.result, &designs.k3.spec.weights(), grid, opts)?;
    write_margin_map(&cfg.out.join("margin_map.csv"), &k2, &k3)?;
    let rep = SweepReport {
        margin_threshold_k2: designs.k2.result.margin,
        margin_threshold_k3: designs.k3.result.margin,
        summary: summarize(&k2, &k3),
    };
    info!(
        "sweep: {} feasible points, overlap fraction {:.3}, {} counterexamples",
        rep.summary.feasible, rep.summary.overlap_fraction, rep.summary.counterexamples
    );
    write_json(&cfg.out.join("sweep_summary.json"), &rep)?;
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Stat {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            count: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFault {
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scenario: String,
    pub seeds: Vec<u64>,
    pub succeeded: usize,
    pub faults: Vec<SeedFault>,
    /// Statistics over successful seeds; metrics undefined for a seed are skipped.
    pub stats: BTreeMap<String, Stat>,
}

fn aggregate(scenario: &Scenario, results: &[(u64, std::result::Result<Metrics, String>)]) -> Aggregate {
    let ok: Vec<&Metrics> = results
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok())
        .filter(|m| m.fault.is_none())
        .collect();
    let faults = results
        .iter()
        .filter_map(|(seed, r)| match r {
            Err(e) => Some(SeedFault { seed: *seed, message: e.clone() }),
            Ok(m) => m.fault.clone().map(|message| SeedFault { seed: *seed, message }),
        })
        .collect();
    type Getter = fn(&Metrics) -> Option<f64>;
    let fields: [(&str, Getter); 9] = [
        ("rms_tracking_error", |m| m.rms_tracking_error),
        ("total_energy", |m| Some(m.total_energy)),
        ("occupancy_mode2", |m| Some(m.occupancy_mode2)),
        ("occupancy_mode3", |m| Some(m.occupancy_mode3)),
        ("del_tower", |m| Some(m.del_tower)),
        ("max_overshoot", |m| m.max_overshoot),
        ("switch_count", |m| Some(m.switch_count as f64)),
        ("max_switch_jump", |m| m.max_switch_jump),
        ("max_kkt_gradient", |m| m.max_kkt_gradient),
    ];
    let stats = fields
        .iter()
        .filter_map(|(name, get)| {
            let vals: Vec<f64> = ok.iter().filter_map(|m| get(m)).collect();
            Stat::of(&vals).map(|s| (name.to_string(), s))
        })
        .collect();
    Aggregate {
        scenario: scenario.name.clone(),
        seeds: results.iter().map(|(s, _)| *s).collect(),
        succeeded: ok.len(),
        faults,
        stats,
    }
}

pub fn scenario_dir(out: &Path, scenario: &Scenario) -> PathBuf {
    out.join("sim").join(&scenario.name)
}

fn simulate_seed(
    turbine: &Turbine,
    scenario: &Scenario,
    controllers: &Controllers,
    seed: u64,
    dir: &Path,
) -> Result<Metrics> {
    let trace = run(turbine, scenario, controllers, seed)?;
    let metrics = compute_metrics(&trace, &turbine.params, scenario);
    let seed_dir = dir.join(format!("seed_{seed}"));
    write_trace(&seed_dir.join("trace.csv"), &trace)?;
    write_switches(&seed_dir.join("switches.csv"), &trace.switches)?;
    write_json(&seed_dir.join("metrics.json"), &metrics)?;
    Ok(metrics)
}

/// Runs every scenario for every seed. A scenario with no successful seed is
/// an error; individual faults only appear in its aggregate.
pub fn cmd_simulate(cfg: &LoadedConfig, turbine: &Turbine, designs: &Designs) -> Result<Vec<Aggregate>> {
    let controllers = designs.controllers();
    let jobs: Vec<(usize, u64)> = (0..cfg.scenarios.len())
        .flat_map(|i| cfg.run.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let results: Vec<std::result::Result<Metrics, Error>> = with_thread_pool(|| {
        jobs.par_iter()
            .map(|&(i, seed)| {
                let sc = &cfg.scenarios[i];
                simulate_seed(turbine, sc, &controllers, seed, &scenario_dir(&cfg.out, sc))
            })
            .collect()
    });
    let mut aggregates = Vec::with_capacity(cfg.scenarios.len());
    for (i, sc) in cfg.scenarios.iter().enumerate() {
        let per_seed: Vec<(u64, std::result::Result<Metrics, String>)> = jobs
            .iter()
            .zip(&results)
            .filter(|((j, _), _)| *j == i)
            .map(|((_, seed), r)| match r {
                Ok(m) => Ok((*seed, Ok(m.clone()))),
                Err(e) if e.is_config() => Err(e.clone()),
                Err(e) => Ok((*seed, Err(e.to_string()))),
            })
            .collect::<Result<_>>()?;
        let agg = aggregate(sc, &per_seed);
        for f in &agg.faults {
            warn!("scenario '{}' seed {}: {}", sc.name, f.seed, f.message);
        }
        write_json(&scenario_dir(&cfg.out, sc).join("aggregate_metrics.json"), &agg)?;
        if agg.succeeded == 0 {
            return Err(Error::IntegrationFault {
                t: 0.0,
                message: format!("every seed of scenario '{}' failed", sc.name),
            });
        }
        aggregates.push(agg);
    }
    Ok(aggregates)
}

/// Runs the configured command.
pub fn execute(cfg: &LoadedConfig) -> Result<()> {
    let turbine = Turbine::new(cfg.turbine.clone())?;
    let (designs, _) = cmd_synthesize(cfg, &turbine)?;
    match cfg.run.command {
        Command::Synthesize => {}
        Command::Sweep => {
            cmd_sweep(cfg, &turbine, &designs)?;
        }
        Command::Simulate => {
            cmd_simulate(cfg, &turbine, &designs)?;
        }
        Command::All => {
            cmd_sweep(cfg, &turbine, &designs)?;
            cmd_simulate(cfg, &turbine, &designs)?;
        }
    }
    Ok(())
}
