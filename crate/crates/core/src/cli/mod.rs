//! Configuration, subcommands and file output of the `mixbgk` tool.

pub mod commands;
pub mod config;
pub mod io;
pub mod verify;

pub use commands::{cmd_simulate, cmd_sweep, cmd_verify, fit_series, load_config, monotonicity_verdict, CommandOutcome, ExitStatus};
pub use config::{default_v_max, emit_config, parse_config, parse_config_in, parse_list, ConfigError, GridConfig, RunConfig, VerifyConfig};
pub use io::{
    config_from_provenance, provenance_block, read_series_csv, write_rates_csv, write_series_csv, SeriesTable, RATES_HEADER,
    SERIES_HEADER,
};
pub use verify::{run_suite, CheckResult, VerifyReport};
