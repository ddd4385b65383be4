//! Simulation harness around `starcrs-core`: TOML configuration, plain-text
//! channel / conic-program / record formats, resumable Monte-Carlo sweeps
//! and summary tables.

pub mod config;
pub mod formats;
pub mod plan;
pub mod table;

mod error;

pub use error::{Result, SimError};

/// Environment variable holding the worker count of a sweep.
pub const WORKERS_ENV: &str = "STARCRS_WORKERS";
