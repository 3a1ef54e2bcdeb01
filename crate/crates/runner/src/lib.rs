//! Command-line runner for `csoc-core`: scenario configs, reports and CSV tables.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod scenarios;

pub use config::ScenarioConfig;
pub use error::RunError;
pub use scenarios::Scenario;
