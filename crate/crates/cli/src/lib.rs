//! Library side of the `cellcov` command: configuration, record encoding
//! and the three experiment commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod records;

pub use commands::{cmd_curve, cmd_reproduce_figures, cmd_validate_invariance};
pub use config::{ConfigOverrides, Format, Method, RunConfig};
pub use error::CliError;
