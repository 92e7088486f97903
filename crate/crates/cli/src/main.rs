use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use subsol_core::geometry::validate_params;

mod commands;
mod config;
mod output;

use config::{parse_overrides, ConfigError, RunConfig};

/// Builds rotational Euler subsolutions on an annulus and checks their
/// properties numerically.
#[derive(Parser)]
#[command(name = "subsol", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config with flat dotted keys (`"geometry.rho": 1`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-key overrides, e.g. `--params.lambda 0.1 --sweep.nu 1e-2,1e-3`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the admissible parameter bounds.
    Validate(Common),
    /// Sample the subsolution and check the energy constraint.
    Subsolution(Common),
    /// Total energy over time and across an epsilon sweep.
    Energy(Common),
    /// Godunov scheme against the exact rarefaction.
    Burgers(Common),
    /// Weak-form, divergence and radial-system residuals.
    Residual(Common),
    /// Vanishing-viscosity sweep and manufactured-solution orders.
    Viscosity(Common),
    /// Boundary cutoff integrals and their scaling in eps.
    Boundary(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Validate(c) => ("validate", c),
            Command::Subsolution(c) => ("subsolution", c),
            Command::Energy(c) => ("energy", c),
            Command::Burgers(c) => ("burgers", c),
            Command::Residual(c) => ("residual", c),
            Command::Viscosity(c) => ("viscosity", c),
            Command::Boundary(c) => ("boundary", c),
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, ConfigError> {
    let mut config = common.config.clone();
    let mut out = common.out.clone();
    let mut seed = common.seed;
    let mut rest = Vec::new();
    // The built-in flags may also appear after the first override.
    for (k, v) in parse_overrides(&common.overrides)? {
        match k.as_str() {
            "config" => config = Some(PathBuf::from(v)),
            "out" => out = Some(PathBuf::from(v)),
            "seed" => {
                seed = Some(v.parse().map_err(|_| ConfigError::Value {
                    key: "seed".into(),
                    msg: format!("not a non-negative integer: `{v}`"),
                })?)
            }
            _ => rest.push((k, v)),
        }
    }
    RunConfig::load(config.as_deref(), &rest, out.as_deref(), seed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = cli.command.parts();
    let cfg = match load(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("subsol: config error: {e}");
            return ExitCode::from(2);
        }
    };
    if name != "validate" {
        match validate_params(&cfg.geometry, &cfg.params) {
            Ok(r) if r.is_valid() => {}
            Ok(r) => {
                for v in &r.violations {
                    eprintln!("subsol: config error: {} = {} violates {}", v.parameter, v.value, v.inequality);
                }
                return ExitCode::from(2);
            }
            Err(e) => {
                eprintln!("subsol: config error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    if let Err(e) = output::ensure_dir(&cfg.out_dir) {
        eprintln!("subsol: cannot create {}: {e}", cfg.out_dir.display());
        return ExitCode::from(2);
    }

    let start = Instant::now();
    let result = match &cli.command {
        Command::Validate(_) => commands::validate(&cfg),
        Command::Subsolution(_) => commands::subsolution(&cfg),
        Command::Energy(_) => commands::energy(&cfg),
        Command::Burgers(_) => commands::burgers(&cfg),
        Command::Residual(_) => commands::residual(&cfg),
        Command::Viscosity(_) => commands::viscosity(&cfg),
        Command::Boundary(_) => commands::boundary(&cfg),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("subsol {name}: {e}");
            return ExitCode::from(1);
        }
    };
    let wall = start.elapsed().as_secs_f64();
    let report = json!({
        "passed": outcome.passed,
        "checks": outcome.checks,
        "results": outcome.results,
        "files": outcome.files,
        "provenance": output::provenance(&cfg, name, wall),
    });
    let path = cfg.out_dir.join(format!("{name}.json"));
    if let Err(e) = output::write_json(&path, &report) {
        eprintln!("subsol: cannot write {}: {e}", path.display());
        return ExitCode::from(1);
    }
    println!(
        "{name}: {} ({})",
        if outcome.passed { "PASS" } else { "FAIL" },
        path.display()
    );
    if let Some(m) = outcome.checks.as_object() {
        for (k, v) in m {
            println!("  {k}: {v}");
        }
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
