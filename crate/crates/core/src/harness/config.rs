use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::control::ControlSettings;
use crate::dynamics::FeedbackLaw;
use crate::error::{Error, Result};
use crate::spectral::{DampingProfile, Grid, ProjectorSpec, SpectralField};

use super::random_initial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Simulate,
    Stabilize,
    ControlLinear,
    ControlNonlinear,
    Observability,
    ViscositySweep,
    CommutatorTest,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Simulate => "simulate",
            Scenario::Stabilize => "stabilize",
            Scenario::ControlLinear => "control-linear",
            Scenario::ControlNonlinear => "control-nonlinear",
            Scenario::Observability => "observability",
            Scenario::ViscositySweep => "viscosity-sweep",
            Scenario::CommutatorTest => "commutator-test",
        }
    }

    pub fn is_control(self) -> bool {
        matches!(self, Scenario::ControlLinear | Scenario::ControlNonlinear)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "M")]
    pub m: usize,
    /// Retained modes; defaults to `⌊M/3⌋`.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

/// `dt` as a number or the string `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeStep {
    Fixed(f64),
    Auto(Auto),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default)]
    pub epsilon: f64,
    /// Defaults to 0 for `control-linear` and 1 elsewhere.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(rename = "T", default = "one")]
    pub horizon: f64,
    #[serde(default = "auto_step")]
    pub dt: TimeStep,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            epsilon: 0.0,
            alpha: None,
            horizon: 1.0,
            dt: TimeStep::Auto(Auto::Auto),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Off {
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DampingConfig {
    Off(Off),
    Bump {
        #[serde(default = "pi")]
        center: f64,
        #[serde(default = "pi")]
        width: f64,
    },
}

impl Default for DampingConfig {
    fn default() -> Self {
        DampingConfig::Bump { center: PI, width: PI }
    }
}

impl DampingConfig {
    pub fn is_on(&self) -> bool {
        matches!(self, DampingConfig::Bump { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    Random,
    Modes,
    File,
}

/// `cos · cos(kx) + sin · sin(kx)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: usize,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub kind: InitialKind,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Required norm for `random` (default 1); optional rescaling otherwise.
    #[serde(default)]
    pub target_norm: Option<f64>,
    #[serde(default)]
    pub sobolev_s: f64,
    #[serde(default)]
    pub mode_list: Vec<ModeSpec>,
    /// JSON array of the `M` physical samples, relative to the config file.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            kind: InitialKind::Random,
            seed: Some(0),
            target_norm: None,
            sobolev_s: 0.0,
            mode_list: Vec::new(),
            path: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    /// Defaults to 0 for `control-linear` and 1 for `control-nonlinear`.
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default = "defaults::cg_tol")]
    pub cg_tol: f64,
    #[serde(default = "defaults::max_iter")]
    pub max_iter: usize,
    #[serde(default = "defaults::picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "defaults::max_picard")]
    pub max_picard: usize,
    #[serde(default = "defaults::delta")]
    pub delta: f64,
    #[serde(default)]
    pub experimental_s: bool,
}

impl Default for ControlConfig {
    fn default() -> Self {
        let d = ControlSettings::default();
        ControlConfig {
            s: None,
            cg_tol: d.cg_tol,
            max_iter: d.max_iter,
            picard_tol: d.picard_tol,
            max_picard: d.max_picard,
            delta: d.delta,
            experimental_s: d.experimental_s,
        }
    }
}

impl ControlConfig {
    pub fn settings(&self) -> ControlSettings {
        ControlSettings {
            cg_tol: self.cg_tol,
            max_iter: self.max_iter,
            picard_tol: self.picard_tol,
            max_picard: self.max_picard,
            delta: self.delta,
            experimental_s: self.experimental_s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "defaults::directory")]
    pub directory: PathBuf,
    /// Trajectory file formats; reports are always JSON.
    #[serde(default = "defaults::formats")]
    pub formats: Vec<Format>,
    /// Keep every `stride`-th step in the trajectory files.
    #[serde(default = "defaults::stride")]
    pub stride: usize,
    /// Sobolev index of the `hs_norm` column.
    #[serde(default = "one")]
    pub hs_index: f64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: defaults::directory(),
            formats: defaults::formats(),
            stride: defaults::stride(),
            hs_index: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizeConfig {
    #[serde(default = "defaults::law")]
    pub law: FeedbackLaw,
    /// Decay-fit window; defaults to `(T/4, T)`.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
}

impl Default for StabilizeConfig {
    fn default() -> Self {
        StabilizeConfig {
            law: FeedbackLaw::Gdg,
            window: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "defaults::eps_list")]
    pub eps_list: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            eps_list: defaults::eps_list(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservabilityConfig {
    #[serde(default = "defaults::samples")]
    pub samples: usize,
    /// Random unit terminal data for the Rayleigh quotient of the Gramian.
    #[serde(default)]
    pub gramian_samples: usize,
}

impl Default for ObservabilityConfig {
    fn default() -> Self {
        ObservabilityConfig {
            samples: defaults::samples(),
            gramian_samples: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorConfig {
    #[serde(default = "defaults::projector")]
    pub projector: ProjectorSpec,
    #[serde(default = "defaults::order")]
    pub p: u32,
    #[serde(default = "defaults::order")]
    pub q: u32,
    #[serde(default = "defaults::band_limits")]
    pub modes: Vec<usize>,
    #[serde(default = "defaults::commutator_samples")]
    pub samples: usize,
    #[serde(default = "defaults::probes")]
    pub probes: Vec<i64>,
}

impl Default for CommutatorConfig {
    fn default() -> Self {
        CommutatorConfig {
            projector: defaults::projector(),
            p: 1,
            q: 1,
            modes: defaults::band_limits(),
            samples: defaults::commutator_samples(),
            probes: defaults::probes(),
        }
    }
}

/// One experiment, as read from a JSON config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub grid: GridConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub damping: DampingConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    /// Terminal state of the control scenarios.
    #[serde(default)]
    pub target: Option<InitialConfig>,
    #[serde(default)]
    pub control: ControlConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub stabilize: StabilizeConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub observability: ObservabilityConfig,
    #[serde(default)]
    pub commutator: CommutatorConfig,
    /// Directory that relative input paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    /// Defaults for `scenario` on an `M`-point grid.
    pub fn new(scenario: Scenario, points: usize) -> Self {
        ScenarioConfig {
            scenario,
            grid: GridConfig { m: points, k: None },
            physics: PhysicsConfig::default(),
            damping: DampingConfig::default(),
            initial: InitialConfig::default(),
            target: None,
            control: ControlConfig::default(),
            output: OutputConfig::default(),
            stabilize: StabilizeConfig::default(),
            sweep: SweepConfig::default(),
            observability: ObservabilityConfig::default(),
            commutator: CommutatorConfig::default(),
            base_dir: None,
        }
    }

    /// Parses JSON; errors carry the path of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path.is_empty() { ".".to_string() } else { path }, e.into_inner().to_string())
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn alpha(&self) -> f64 {
        self.physics.alpha.unwrap_or(match self.scenario {
            Scenario::ControlLinear => 0.0,
            _ => 1.0,
        })
    }

    pub fn control_s(&self) -> f64 {
        self.control.s.unwrap_or(match self.scenario {
            Scenario::ControlNonlinear => 1.0,
            _ => 0.0,
        })
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        match self.grid.k {
            Some(k) => Grid::with_modes(self.grid.m, k).map_err(|e| Error::config("grid.K", e.to_string())),
            None => Grid::new(self.grid.m).map_err(|e| Error::config("grid.M", e.to_string())),
        }
    }

    /// Damping profile; the default bump stands in when damping is off so
    /// that parameter sets stay uniform.
    pub fn profile(&self, grid: &Arc<Grid>) -> Result<DampingProfile> {
        let (center, width) = match self.damping {
            DampingConfig::Off(_) => (PI, PI),
            DampingConfig::Bump { center, width } => (center, width),
        };
        DampingProfile::bump(grid, center, width).map_err(|e| Error::config("damping", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.grid.m;
        if m < 4 || !m.is_power_of_two() {
            return Err(Error::config("grid.M", format!("must be a power of two of at least 4, got {m}")));
        }
        if let Some(k) = self.grid.k {
            if k == 0 || 3 * k + 1 > m {
                return Err(Error::config("grid.K", format!("must lie in 1..={}, got {k}", (m - 1) / 3)));
            }
        }
        let p = &self.physics;
        if !(0.0..=1.0).contains(&p.epsilon) {
            return Err(Error::config("physics.epsilon", format!("must lie in [0, 1], got {}", p.epsilon)));
        }
        if !self.alpha().is_finite() {
            return Err(Error::config("physics.alpha", "must be finite"));
        }
        if self.scenario == Scenario::ControlLinear && self.alpha() != 0.0 {
            return Err(Error::config("physics.alpha", "control-linear needs alpha = 0"));
        }
        if !(p.horizon > 0.0 && p.horizon.is_finite()) {
            return Err(Error::config("physics.T", format!("must be positive, got {}", p.horizon)));
        }
        if let TimeStep::Fixed(dt) = p.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::config("physics.dt", format!("must be positive or \"auto\", got {dt}")));
            }
        }
        if let DampingConfig::Bump { center, width } = self.damping {
            if !center.is_finite() {
                return Err(Error::config("damping.center", "must be finite"));
            }
            if !(width > 0.0 && width <= 2.0 * PI) {
                return Err(Error::config("damping.width", format!("must lie in (0, 2π], got {width}")));
            }
        }
        validate_initial(&self.initial, "initial")?;
        if let Some(t) = &self.target {
            validate_initial(t, "target")?;
        }
        if self.scenario.is_control() {
            if self.target.is_none() {
                return Err(Error::config("target", "control scenarios need a target state"));
            }
            if !self.damping.is_on() {
                return Err(Error::config("damping", "control acts through the damping profile and needs it on"));
            }
            self.control.settings().validate()?;
        }
        let o = &self.output;
        if o.stride == 0 {
            return Err(Error::config("output.stride", "must be at least 1"));
        }
        if o.formats.is_empty() {
            return Err(Error::config("output.formats", "must name at least one of csv, json"));
        }
        if !o.hs_index.is_finite() {
            return Err(Error::config("output.hs_index", "must be finite"));
        }
        match self.scenario {
            Scenario::Stabilize => {
                if self.stabilize.law == FeedbackLaw::Off {
                    return Err(Error::config("stabilize.law", "must be gdg or lo"));
                }
                if !self.damping.is_on() {
                    return Err(Error::config("damping", "stabilize needs damping"));
                }
                if let Some((a, b)) = self.stabilize.window {
                    if !(a >= 0.0 && a < b && b <= p.horizon) {
                        return Err(Error::config("stabilize.window", format!("must satisfy 0 ≤ a < b ≤ T, got ({a}, {b})")));
                    }
                }
            }
            Scenario::Observability => {
                if !self.damping.is_on() {
                    return Err(Error::config("damping", "observability needs damping"));
                }
                if self.observability.samples < 2 {
                    return Err(Error::config("observability.samples", "need at least two samples"));
                }
            }
            Scenario::ViscositySweep => {
                let l = &self.sweep.eps_list;
                if l.is_empty() || l.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
                    return Err(Error::config("sweep.eps_list", "need a nonempty list of viscosities in (0, 1]"));
                }
                if l.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::config("sweep.eps_list", "must be strictly decreasing"));
                }
            }
            Scenario::CommutatorTest => {
                let c = &self.commutator;
                if c.modes.is_empty() || c.modes.contains(&0) {
                    return Err(Error::config("commutator.modes", "need positive band limits"));
                }
                if c.samples == 0 {
                    return Err(Error::config("commutator.samples", "must be at least 1"));
                }
                if c.probes.iter().any(|m| *m < 1) {
                    return Err(Error::config("commutator.probes", "probe indices must be positive"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Builds the initial state (`target = false`) or the control target.
    pub fn state(&self, grid: &Arc<Grid>, target: bool) -> Result<SpectralField> {
        let (cfg, name) = if target {
            (self.target.as_ref().ok_or_else(|| Error::config("target", "missing"))?, "target")
        } else {
            (&self.initial, "initial")
        };
        let u = match cfg.kind {
            InitialKind::Random => {
                let seed = cfg.seed.ok_or_else(|| Error::config(format!("{name}.seed"), "required for random data"))?;
                return random_initial(grid, seed, cfg.target_norm.unwrap_or(1.0), cfg.sobolev_s)
                    .map_err(|e| Error::config(format!("{name}.target_norm"), e.to_string()));
            }
            InitialKind::Modes => {
                let mut u = SpectralField::zeros(grid);
                for (i, m) in cfg.mode_list.iter().enumerate() {
                    if m.k == 0 || m.k > grid.modes() {
                        return Err(Error::config(
                            format!("{name}.mode_list[{i}].k"),
                            format!("must lie in 1..={}, got {}", grid.modes(), m.k),
                        ));
                    }
                    u = &u + &SpectralField::trig_mode(grid, m.k, m.cos, m.sin);
                }
                u
            }
            InitialKind::File => {
                let rel = cfg.path.as_ref().ok_or_else(|| Error::config(format!("{name}.path"), "required for file data"))?;
                let path = match &self.base_dir {
                    Some(dir) if rel.is_relative() => dir.join(rel),
                    _ => rel.clone(),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let samples: Vec<f64> =
                    serde_json::from_str(&text).map_err(|e| Error::config(format!("{name}.path"), e.to_string()))?;
                SpectralField::from_samples(grid, &samples).map_err(|e| Error::config(format!("{name}.path"), e.to_string()))?
            }
        };
        match cfg.target_norm {
            Some(n) => {
                let current = u.sobolev_norm(cfg.sobolev_s);
                if current == 0.0 {
                    return Err(Error::config(format!("{name}.target_norm"), "cannot rescale a zero field"));
                }
                Ok(u.scaled(n / current))
            }
            None => Ok(u),
        }
    }
}

fn validate_initial(cfg: &InitialConfig, name: &str) -> Result<()> {
    if let Some(n) = cfg.target_norm {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::config(format!("{name}.target_norm"), format!("must be positive, got {n}")));
        }
    }
    if !cfg.sobolev_s.is_finite() {
        return Err(Error::config(format!("{name}.sobolev_s"), "must be finite"));
    }
    match cfg.kind {
        InitialKind::Random if cfg.seed.is_none() => Err(Error::config(format!("{name}.seed"), "required for random data")),
        InitialKind::Modes if cfg.mode_list.is_empty() => {
            Err(Error::config(format!("{name}.mode_list"), "need at least one mode"))
        }
        InitialKind::File if cfg.path.is_none() => Err(Error::config(format!("{name}.path"), "required for file data")),
        _ => Ok(()),
    }
}

fn one() -> f64 {
    1.0
}

fn pi() -> f64 {
    PI
}

fn auto_step() -> TimeStep {
    TimeStep::Auto(Auto::Auto)
}

mod defaults {
    use super::*;

    pub fn cg_tol() -> f64 {
        ControlSettings::default().cg_tol
    }
    pub fn max_iter() -> usize {
        ControlSettings::default().max_iter
    }
    pub fn picard_tol() -> f64 {
        ControlSettings::default().picard_tol
    }
    pub fn max_picard() -> usize {
        ControlSettings::default().max_picard
    }
    pub fn delta() -> f64 {
        ControlSettings::default().delta
    }
    pub fn directory() -> PathBuf {
        PathBuf::from("out")
    }
    pub fn formats() -> Vec<Format> {
        vec![Format::Csv]
    }
    pub fn stride() -> usize {
        1
    }
    pub fn law() -> FeedbackLaw {
        FeedbackLaw::Gdg
    }
    pub fn eps_list() -> Vec<f64> {
        vec![1e-1, 1e-2, 1e-3, 1e-4]
    }
    pub fn samples() -> usize {
        100
    }
    pub fn projector() -> ProjectorSpec {
        ProjectorSpec::PositiveModes
    }
    pub fn order() -> u32 {
        1
    }
    pub fn band_limits() -> Vec<usize> {
        vec![32, 64, 128, 256]
    }
    pub fn commutator_samples() -> usize {
        200
    }
    pub fn probes() -> Vec<i64> {
        vec![1, 2, 4, 8, 16, 32]
    }
}
