//! Command-line front end for the `otsm` crate: JSON problem and solution
//! files, the solve and certify commands, the oscillation demo and the
//! benchmark grid.

pub mod commands;
pub mod error;
pub mod files;

pub use commands::{run, Cli, Command};
pub use error::{CliError, CliResult};
