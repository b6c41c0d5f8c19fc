use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use windshape::config::{self, Command};
use windshape::pipeline;
use windshape::Error;

/// Loop-shaping controller synthesis, robustness sweeps and switched
/// closed-loop simulation for a wind turbine model.
#[derive(Debug, Parser)]
#[command(name = "windshape", version)]
struct Cli {
    /// Run configuration file.
    #[arg(long, default_value = "configs/run.toml")]
    config: PathBuf,
    /// Output directory, overriding the run file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated wind seeds, overriding the run file.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// synthesize, sweep, simulate or all.
    #[arg(long)]
    command: Option<String>,
    /// Ratio gamma_sub / gamma_min.
    #[arg(long)]
    gamma_factor: Option<f64>,
    /// Switching margin applied to every scenario.
    #[arg(long)]
    beta_rel: Option<f64>,
    /// Minimum dwell between mode changes [s], applied to every scenario.
    #[arg(long)]
    dwell: Option<f64>,
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        2
    } else {
        1
    }
}

fn prepare(cli: &Cli) -> windshape::Result<config::LoadedConfig> {
    let mut cfg = config::load(&cli.config)?;
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seeds) = &cli.seeds {
        cfg.run.seeds = seeds.clone();
    }
    if let Some(c) = &cli.command {
        cfg.run.command = c.parse::<Command>()?;
    }
    if let Some(g) = cli.gamma_factor {
        cfg.run.synthesis.gamma_factor = g;
    }
    cfg.override_switching(cli.beta_rel, cli.dwell);
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match prepare(&cli).and_then(|cfg| pipeline::execute(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
