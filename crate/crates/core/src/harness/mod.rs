//! Scenario configuration, dispatch and result files for the CLI.

mod config;
mod initial;
mod output;
mod run;

pub use config::{
    Auto, CommutatorConfig, ControlConfig, DampingConfig, Format, GridConfig, InitialConfig, InitialKind, ModeSpec,
    ObservabilityConfig, Off, OutputConfig, PhysicsConfig, Scenario, ScenarioConfig, StabilizeConfig, SweepConfig,
    TimeStep,
};
pub use initial::random_initial;
pub use output::{
    coefficient_pairs, field_from_pairs, read_control_csv, read_json, read_trajectory_csv, trajectory_rows,
    write_control_csv, write_json, write_trajectory_csv, StateRecord, TrajectoryRow, TRAJECTORY_HEADER,
};
pub use run::{
    load_control, run, terminal_error, ControlData, ControlSolutionRecord, RunOverrides, RunRecord, CONTROL_CSV,
    RUN_RECORD,
};
