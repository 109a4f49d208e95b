//! Config-driven experiment runner for the channel-aging simulator.
//!
//! A scenario is a flat config file (see [`config`]) or one of the named
//! presets `fig1`..`fig7` (see [`presets`]). [`runner::run_scenario`] evaluates
//! every sweep point and returns rows of the result CSV.

pub mod config;
pub mod presets;
pub mod runner;

pub use config::{parse_config, parse_config_file, ConfigError, ScenarioConfig};
pub use presets::{list_presets, preset};
pub use runner::{render_csv, run_scenario, run_to_files, run_with_threads, CurvePoint, RunError};
