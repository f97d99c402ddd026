use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::control::{
    closed_loop_feedback, control_forcing, solve_linear_control, solve_nonlinear_control, ControlProblem, ControlSolution,
    Gramian,
};
use crate::diagnostics::{
    admissible_ratio_study, fit_decay, observability_ratio, odd_progression_ratios, viscosity_sweep, DecayFit,
};
use crate::dynamics::{energy_residual, evolve, EvolutionParams, FeedbackLaw, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{FourierSeries, Grid, SpectralField};

use super::config::{Format, Scenario, ScenarioConfig, TimeStep};
use super::output::{
    coefficient_pairs, field_from_pairs, read_control_csv, trajectory_rows, write_control_csv, write_json,
    write_trajectory_csv, StateRecord,
};
use super::random_initial;

pub const RUN_RECORD: &str = "run.json";
pub const CONTROL_CSV: &str = "control_k.csv";

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Re-integrate the stored control and compare terminal states.
    pub verify: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub scenario: Scenario,
    pub version: &'static str,
    pub config: ScenarioConfig,
    pub wall_clock_seconds: f64,
    /// Output name to file path; every listed file exists.
    pub outputs: BTreeMap<String, PathBuf>,
    pub summary: Value,
    pub warnings: Vec<String>,
}

/// Reference to the stored control, or the control inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ControlData {
    File(String),
    Inline(Vec<Vec<[f64; 2]>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSolutionRecord {
    #[serde(rename = "vT_seed")]
    pub v_terminal: Vec<[f64; 2]>,
    pub k: ControlData,
    pub cg_iterations: usize,
    pub cg_residual: f64,
    pub picard_iterations: usize,
    pub terminal_error: f64,
    pub control_energy: f64,
    pub cg_history: Vec<f64>,
    pub picard_increments: Vec<f64>,
    pub s: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub steps: usize,
}

struct Context {
    cfg: ScenarioConfig,
    dir: PathBuf,
    grid: Arc<Grid>,
    outputs: BTreeMap<String, PathBuf>,
    warnings: Vec<String>,
}

impl Context {
    fn path(&mut self, key: &str, file: &str) -> PathBuf {
        let p = self.dir.join(file);
        self.outputs.insert(key.to_string(), p.clone());
        p
    }

    fn report(&mut self, key: &str, file: &str, value: &impl Serialize) -> Result<()> {
        let p = self.path(key, file);
        write_json(&p, value)
    }

    fn trajectory(&mut self, key: &str, stem: &str, traj: &Trajectory) -> Result<()> {
        let rows = trajectory_rows(traj, self.cfg.output.hs_index);
        for format in self.cfg.output.formats.clone() {
            match format {
                Format::Csv => {
                    let p = self.path(&format!("{key}_csv"), &format!("{stem}.csv"));
                    write_trajectory_csv(&p, &rows)?;
                }
                Format::Json => self.report(&format!("{key}_json"), &format!("{stem}.json"), &rows)?,
            }
        }
        self.warnings.extend(traj.warnings().iter().cloned());
        Ok(())
    }

    /// Evolution parameters for the configured physics, with `dt = "auto"`
    /// resolved against the advective limit of the given states.
    fn params(&mut self, states: &[&SpectralField]) -> Result<EvolutionParams> {
        let cfg = &self.cfg;
        let feedback = if cfg.damping.is_on() { FeedbackLaw::Gdg } else { FeedbackLaw::Off };
        let mut p = EvolutionParams::new(cfg.profile(&self.grid)?, cfg.physics.horizon, 1.0)
            .with_epsilon(cfg.physics.epsilon)
            .with_alpha(cfg.alpha())
            .with_feedback(feedback)
            .with_stride(cfg.output.stride);
        let mut limit = f64::INFINITY;
        for u in states {
            limit = limit.min(p.cfl_limit(u)?);
        }
        p.dt = match cfg.physics.dt {
            TimeStep::Auto(_) => limit.min(cfg.physics.horizon),
            TimeStep::Fixed(dt) => {
                if cfg.alpha() != 0.0 && dt > limit {
                    let msg = format!("explicit dt = {dt} overrides the advective limit {limit:.3e}");
                    log::warn!("{msg}");
                    self.warnings.push(msg);
                }
                dt
            }
        };
        p.validate()?;
        Ok(p)
    }
}

/// Runs one scenario and writes its outputs plus `run.json` into the output
/// directory. All files except `run.json` are bit-identical across runs of the
/// same config and seed.
pub fn run(config: &ScenarioConfig, overrides: &RunOverrides) -> Result<RunRecord> {
    let started = Instant::now();
    let mut cfg = config.clone();
    if let Some(seed) = overrides.seed {
        cfg.initial.seed = Some(seed);
    }
    if let Some(out) = &overrides.out {
        cfg.output.directory = out.clone();
    }
    cfg.validate()?;
    let dir = cfg.output.directory.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut ctx = Context {
        grid: cfg.grid()?,
        cfg,
        dir,
        outputs: BTreeMap::new(),
        warnings: Vec::new(),
    };
    log::info!("running {} on M = {}", ctx.cfg.scenario.name(), ctx.grid.points());
    let summary = match ctx.cfg.scenario {
        Scenario::Simulate => simulate(&mut ctx)?,
        Scenario::Stabilize => stabilize(&mut ctx)?,
        Scenario::ControlLinear | Scenario::ControlNonlinear => control(&mut ctx, overrides.verify)?,
        Scenario::Observability => observability(&mut ctx)?,
        Scenario::ViscositySweep => sweep(&mut ctx)?,
        Scenario::CommutatorTest => commutator(&mut ctx)?,
    };
    let record_path = ctx.dir.join(RUN_RECORD);
    ctx.outputs.insert("run".into(), record_path.clone());
    let record = RunRecord {
        scenario: ctx.cfg.scenario,
        version: env!("CARGO_PKG_VERSION"),
        config: ctx.cfg,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        outputs: ctx.outputs,
        summary,
        warnings: ctx.warnings,
    };
    write_json(&record_path, &record)?;
    Ok(record)
}

fn simulate(ctx: &mut Context) -> Result<Value> {
    let u0 = ctx.cfg.state(&ctx.grid, false)?;
    let p = ctx.params(&[&u0])?;
    let traj = evolve(&u0, &p, None)?;
    ctx.trajectory("trajectory", "trajectory", &traj)?;
    let last = traj.final_state();
    let state = StateRecord::new(p.horizon, last)?;
    ctx.report("final_state", "final_state.json", &state)?;
    let summary = json!({
        "dt": traj.dt(),
        "steps": traj.step_times().len() - 1,
        "final_l2_norm": last.norm(),
        "energy_residual": energy_residual(&traj)?,
    });
    ctx.report("summary", "summary.json", &summary)?;
    Ok(summary)
}

fn stabilize(ctx: &mut Context) -> Result<Value> {
    let u0 = ctx.cfg.state(&ctx.grid, false)?;
    let p = ctx.params(&[&u0])?;
    let traj = closed_loop_feedback(&u0, ctx.cfg.stabilize.law, &p)?;
    ctx.trajectory("trajectory", "trajectory", &traj)?;
    let window = ctx.cfg.stabilize.window.unwrap_or_else(|| DecayFit::default_window(p.horizon));
    let fit = fit_decay(&traj, window)?;
    let report = json!({
        "law": ctx.cfg.stabilize.law,
        "dt": traj.dt(),
        "initial_norm": traj.initial_norm(),
        "final_norm": traj.final_state().norm(),
        "norm_nonincreasing": traj.norm_nonincreasing(0.0),
        "energy_residual": energy_residual(&traj)?,
        "decay": fit,
    });
    ctx.report("decay", "decay.json", &report)?;
    Ok(report)
}

fn control(ctx: &mut Context, verify: bool) -> Result<Value> {
    let u0 = ctx.cfg.state(&ctx.grid, false)?;
    let u1 = ctx.cfg.state(&ctx.grid, true)?;
    let p = ctx.params(&[&u0, &u1])?;
    let s = ctx.cfg.control_s();
    let prob = ControlProblem::new(u0.clone(), u1.clone(), p.horizon, s, p.clone()).with_settings(ctx.cfg.control.settings());
    let sol = match ctx.cfg.scenario {
        Scenario::ControlLinear => solve_linear_control(&prob)?,
        _ => solve_nonlinear_control(&prob)?,
    };
    let k = if ctx.cfg.output.formats.contains(&Format::Csv) {
        let path = ctx.path("control_k", CONTROL_CSV);
        write_control_csv(&path, &sol.control, p.horizon)?;
        ControlData::File(CONTROL_CSV.into())
    } else {
        ControlData::Inline(sol.control.samples().iter().map(coefficient_pairs).collect())
    };
    let record = solution_record(&sol, k, s, p.horizon);
    ctx.report("control_solution", "control_solution.json", &record)?;

    let forced = evolve(&u0, &p, Some(&control_forcing(&sol.control, &p)))?;
    ctx.trajectory("trajectory", "trajectory", &forced)?;

    let mut summary = json!({
        "cg_iterations": sol.cg_iterations,
        "picard_iterations": sol.picard_iterations,
        "terminal_error": sol.terminal_error,
        "control_energy": sol.control_energy,
    });
    if verify {
        let replay = load_control(&ctx.dir, &ctx.grid, &record.k)?;
        let verified = terminal_error(&u0, &u1, s, &p, &replay)?;
        let report = json!({
            "reported_terminal_error": sol.terminal_error,
            "verified_terminal_error": verified,
            "discrepancy": (verified - sol.terminal_error).abs(),
        });
        ctx.report("verification", "verification.json", &report)?;
        summary["verified_terminal_error"] = json!(verified);
    }
    Ok(summary)
}

fn solution_record(sol: &ControlSolution, k: ControlData, s: f64, horizon: f64) -> ControlSolutionRecord {
    ControlSolutionRecord {
        v_terminal: coefficient_pairs(&sol.v_terminal),
        k,
        cg_iterations: sol.cg_iterations,
        cg_residual: sol.cg_residual,
        picard_iterations: sol.picard_iterations,
        terminal_error: sol.terminal_error,
        control_energy: sol.control_energy,
        cg_history: sol.cg_history.clone(),
        picard_increments: sol.picard_increments.clone(),
        s,
        horizon,
        steps: sol.control.steps(),
    }
}

/// Reads a stored control back from `dir`.
pub fn load_control(dir: &Path, grid: &Arc<Grid>, k: &ControlData) -> Result<crate::dynamics::ForcingRecord> {
    match k {
        ControlData::File(name) => read_control_csv(&dir.join(name), grid),
        ControlData::Inline(samples) => crate::dynamics::ForcingRecord::new(
            samples.iter().map(|c| field_from_pairs(grid, c)).collect::<Result<_>>()?,
        ),
    }
}

/// `‖u(T) − u1‖_s / max(‖u1‖_s, 1e−14)` for the full equation driven by `G D^{1/2} k`.
pub fn terminal_error(
    u0: &SpectralField,
    u1: &SpectralField,
    s: f64,
    params: &EvolutionParams,
    control: &crate::dynamics::ForcingRecord,
) -> Result<f64> {
    let p = params.clone().with_stride(usize::MAX);
    let reached = evolve(&u0.clone().without_mean(), &p, Some(&control_forcing(control, &p)))?;
    let target = u1.clone().without_mean();
    Ok((reached.final_state() - &target).sobolev_norm(s) / target.sobolev_norm(s).max(1e-14))
}

#[derive(Serialize)]
struct ObservabilitySummary {
    samples: usize,
    max_ratio: f64,
    min_ratio: f64,
    mean_ratio: f64,
    /// Maximum over the first half of the samples.
    max_ratio_half: f64,
    /// `(max − max_half) / max`.
    doubling_change: f64,
    degenerate: usize,
    ratios: Vec<f64>,
    gramian_rayleigh: Option<Value>,
}

fn observability(ctx: &mut Context) -> Result<Value> {
    let init = &ctx.cfg.initial;
    let seed = init.seed.unwrap_or(0);
    let norm = init.target_norm.unwrap_or(1.0);
    let n = ctx.cfg.observability.samples;
    let probe = random_initial(&ctx.grid, seed, norm, 0.0)?;
    let p = ctx.params(&[&probe])?;
    let grid = Arc::clone(&ctx.grid);
    let reports = (0..n as u64)
        .into_par_iter()
        .map(|i| observability_ratio(&random_initial(&grid, seed.wrapping_add(i), norm, 0.0)?, &p))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = reports.iter().map(|r| r.ratio).collect();
    let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
    let max_ratio = fold(&ratios, f64::max, 0.0);
    let max_ratio_half = fold(&ratios[..n / 2], f64::max, 0.0);
    let gramian_rayleigh = match ctx.cfg.observability.gramian_samples {
        0 => None,
        m => {
            let gram = Gramian::new(&p.clone().with_alpha(0.0), p.horizon, 0.0)?;
            let quotients = (0..m as u64)
                .into_par_iter()
                .map(|i| {
                    let v = random_initial(&grid, seed.wrapping_add(n as u64 + i), 1.0, 0.0)?;
                    Ok(gram.inner(&v, &gram.apply(&v)?) / gram.inner(&v, &v))
                })
                .collect::<Result<Vec<f64>>>()?;
            Some(json!({
                "samples": m,
                "min": fold(&quotients, f64::min, f64::INFINITY),
                "max": fold(&quotients, f64::max, 0.0),
            }))
        }
    };
    let summary = ObservabilitySummary {
        samples: n,
        max_ratio,
        min_ratio: fold(&ratios, f64::min, f64::INFINITY),
        mean_ratio: ratios.iter().sum::<f64>() / n as f64,
        max_ratio_half,
        doubling_change: (max_ratio - max_ratio_half) / max_ratio,
        degenerate: reports.iter().filter(|r| r.degenerate).count(),
        ratios,
        gramian_rayleigh,
    };
    ctx.report("observability", "observability.json", &summary)?;
    let mut value = serde_json::to_value(&summary)?;
    value.as_object_mut().expect("object").remove("ratios");
    Ok(value)
}

fn sweep(ctx: &mut Context) -> Result<Value> {
    let u0 = ctx.cfg.state(&ctx.grid, false)?;
    let p = ctx.params(&[&u0])?;
    let result = viscosity_sweep(&u0, &ctx.cfg.sweep.eps_list, &p)?;
    let report = json!({
        "entries": result.entries,
        "distances": result.distances,
        "distances_decreasing": result.distances.windows(2).all(|w| w[1] < w[0]),
        "budget_spread": result.budget_spread(),
    });
    ctx.report("sweep", "sweep.json", &report)?;
    Ok(report)
}

fn commutator(ctx: &mut Context) -> Result<Value> {
    let profile = ctx.cfg.profile(&ctx.grid)?;
    let symbol = FourierSeries::from_field(&SpectralField::from_samples(&ctx.grid, profile.samples())?);
    let c = ctx.cfg.commutator.clone();
    let study = admissible_ratio_study(&symbol, &c.projector, c.p, c.q, &c.modes, c.samples, ctx.cfg.initial.seed.unwrap_or(0))?;
    let odd = odd_progression_ratios(&c.probes)?;
    let per_probe: Vec<f64> = odd.iter().zip(&c.probes).map(|(r, m)| r / *m as f64).collect();
    let report = json!({
        "projector": c.projector,
        "separated": c.projector.is_separated(),
        "p": c.p,
        "q": c.q,
        "study": study,
        "max_growth": study.max_growth(),
        "probes": c.probes,
        "odd_progression_ratios": odd,
        "odd_ratio_per_probe": per_probe,
    });
    ctx.report("commutator", "commutator.json", &report)?;
    Ok(report)
}
