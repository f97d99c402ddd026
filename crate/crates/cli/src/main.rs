use std::path::PathBuf;
use std::process::ExitCode;

use bo_core::harness::{run, RunOverrides, Scenario, ScenarioConfig};
use bo_core::{Error, Result};
use clap::{Args, Parser, Subcommand};

/// Damped Benjamin-Ono experiments on the torus.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Open-loop evolution with the configured damping.
    Simulate(Common),
    /// Closed-loop feedback and decay-rate fit.
    Stabilize(Common),
    /// Exact control of the linear damped flow.
    ControlLinear(ControlArgs),
    /// Exact control of the nonlinear flow by Picard iteration.
    ControlNonlinear(ControlArgs),
    /// Sampled observability ratios.
    Observability(Common),
    /// Vanishing-viscosity sweep.
    ViscositySweep(Common),
    /// Commutator growth study.
    CommutatorTest(Common),
}

#[derive(Args)]
struct Common {
    /// JSON scenario config; defaults apply on a 128-point grid when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `initial.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ControlArgs {
    #[command(flatten)]
    common: Common,
    /// Re-integrate the stored control and report the terminal error.
    #[arg(long)]
    verify: bool,
}

const DEFAULT_POINTS: usize = 128;

fn execute(cli: Cli) -> Result<serde_json::Value> {
    let (scenario, common, verify) = match cli.command {
        Command::Simulate(c) => (Scenario::Simulate, c, false),
        Command::Stabilize(c) => (Scenario::Stabilize, c, false),
        Command::ControlLinear(c) => (Scenario::ControlLinear, c.common, c.verify),
        Command::ControlNonlinear(c) => (Scenario::ControlNonlinear, c.common, c.verify),
        Command::Observability(c) => (Scenario::Observability, c, false),
        Command::ViscositySweep(c) => (Scenario::ViscositySweep, c, false),
        Command::CommutatorTest(c) => (Scenario::CommutatorTest, c, false),
    };
    let config = match &common.config {
        Some(path) => {
            let cfg = ScenarioConfig::from_file(path)?;
            if cfg.scenario != scenario {
                return Err(Error::config(
                    "scenario",
                    format!("config is for `{}`, not `{}`", cfg.scenario.name(), scenario.name()),
                ));
            }
            cfg
        }
        None => ScenarioConfig::new(scenario, DEFAULT_POINTS),
    };
    let overrides = RunOverrides {
        seed: common.seed,
        out: common.out,
        verify,
    };
    let record = run(&config, &overrides)?;
    for w in &record.warnings {
        log::warn!("{w}");
    }
    Ok(serde_json::json!({
        "scenario": record.scenario,
        "outputs": record.outputs,
        "summary": record.summary,
        "wall_clock_seconds": record.wall_clock_seconds,
    }))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Divergence { last_state, .. } = &e {
                eprintln!("last valid state: max |coefficient| = {:e}", last_state.max_abs_coefficient());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
