//! Command-line surface of the mean-field team game toolkit: affine JSON
//! models, value-grid artifacts and the `mftg` subcommands.

pub mod artifact;
pub mod canonical;
pub mod commands;
pub mod error;
pub mod spec;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};
pub use spec::AffineModelSpec;
