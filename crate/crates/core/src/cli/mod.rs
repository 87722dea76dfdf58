//! Experiment harness: configuration, single runs and the `map`,
//! `estimate`, `train`, `sweep` and `report` workflows.

mod commands;
mod config;
mod run;

pub use commands::{
    cmd_estimate, cmd_map, cmd_report, cmd_sweep, cmd_train, CellSummary, Comparison, IsoAccuracy, Report, ReportRow,
};
pub use config::{
    parse_seeds, DataSection, DataSource, ExperimentConfig, ExperimentSection, InitSection, InputSection,
    ProfileSection, RewireSection, SweepSection, TrainSection,
};
pub use run::{
    build_state, load_binned, matched_global_count, prepare, read_checkpoint, run_seed, write_checkpoint, Prepared,
    RunSummary,
};
