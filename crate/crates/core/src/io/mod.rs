//! Configuration, command-line dispatch and result files.

mod cli;
pub mod config;
pub mod output;

pub use cli::{cli_dispatch, default_planes, user_set_keys, Cli, CliError, Command, WORKERS_ENV};
pub use config::{load_config, parse_config, ConfigError, Provenance, RunConfig, CONFIG_KEYS};
