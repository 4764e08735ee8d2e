//! Configuration documents, CSV/SVG output, and the command-line front end.

pub mod cli;
pub mod config;
pub mod output;
pub mod plot;

pub use config::{parse_config, InitialProfile, ParsedConfig, SimConfig, SCHEMA_VERSION};
