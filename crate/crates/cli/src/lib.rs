//! Command-line front end for the `anyon-otto` engine models: single cycles,
//! parameter sweeps with CSV/JSON/SVG output, and the oracle validation suite.

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

pub use commands::{cmd_cycle, cmd_sweep, cmd_validate, CliError, ExitStatus};
pub use config::{ConfigError, Mode, RawConfig, RunConfig};
