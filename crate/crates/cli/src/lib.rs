//! Command-line front end for the `xychain` library: parameter sweeps,
//! figure data and formula-versus-oracle verification.

pub mod app;
pub mod config;
pub mod error;
pub mod grid;
pub mod output;
pub mod reproduce;
pub mod sweep;
pub mod verify;

pub use app::{run, Cli};
pub use error::{CliError, CliResult, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};
