//! Command-line front end for `rbc`: CSV ingestion, run configuration,
//! the subcommands and their CSV/SVG outputs.

pub mod cli;
pub mod coefficients;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod sample;
pub mod svg;

pub use error::{CliError, Result};
