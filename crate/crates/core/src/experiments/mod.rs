//! Configuration, batch runners and CSV output for the experiment CLI.

pub mod config;
pub mod csv;
pub mod tables;

pub use config::{parse_config, ExperimentConfig, ExperimentKind};
pub use csv::{emit_csv, parse_records};
pub use tables::{
    limits, polynomial_limit_solver, rho_sweep, run_ladder, run_single, run_table1, run_table2,
    LadderRow, SweepRow, LADDER,
};
