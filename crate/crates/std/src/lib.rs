//! Experiment runner for `holosim-core`: scenario configuration, named
//! presets, parallel Monte Carlo and CSV output.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod preset;

pub use config::{parse_config, ArraySpec, ConfigPatch, ScenarioConfig};
pub use error::ConfigError;
pub use experiment::{simulate_parallel, Scenario};
pub use output::{config_hash, format_number, Table};
pub use preset::{run_preset, Preset, Series};
