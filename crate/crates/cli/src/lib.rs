//! Command-line driver for channel-QFI sweeps, reports and family validation.

pub mod config;
pub mod custom;
pub mod error;
pub mod model;
pub mod report;
pub mod sweep;
pub mod validate;

pub use error::{CliError, Result};
