pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::Parser;

use commands::{CliError, Command, Context};
use config::{ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "conflict-dyn", version, about = "Civil war model: simulation, basins, victory sets and optimal control")]
pub struct Cli {
    pub command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV output path; SVG output, where produced, goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid resolution as `NX,NY`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub tmax: Option<f64>,
    /// `key=value` overrides, applied after the file and flags.
    pub overrides: Vec<String>,
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("seed", &seed.to_string());
    }
    if let Some(t) = cli.tmax {
        cfg.set("t_max", &t.to_string());
    }
    if let Some(g) = &cli.grid {
        let (nx, ny) = g
            .split_once(',')
            .ok_or_else(|| ConfigError::Invalid(format!("--grid expects NX,NY, got {g:?}")))?;
        cfg.set("nx", nx);
        cfg.set("ny", ny);
    }
    for o in &cli.overrides {
        cfg.apply_override(o)?;
    }
    Ok(cfg)
}

/// Runs one invocation and returns `(stdout, exit code)`; errors go to
/// the returned text prefixed by `error:`.
pub fn run(cli: &Cli) -> (String, i32) {
    let result = build_config(cli).and_then(|cfg| {
        let ctx = Context {
            cfg,
            out: cli.out.clone(),
        };
        commands::run(cli.command, &ctx)
    });
    match result {
        Ok(s) => (s, 0),
        Err(e) => {
            let code = e.exit_code();
            (format!("error: {e}\n"), code)
        }
    }
}

/// Caps the global worker pool from `CONFLICT_DYN_THREADS`.
pub fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("CONFLICT_DYN_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("CONFLICT_DYN_THREADS={v:?} is not a positive integer"))?;
    if n == 0 {
        return Err("CONFLICT_DYN_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}
