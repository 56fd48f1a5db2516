//! Command-line driver, file formats and parallel stages for `freestretch-core`.

pub mod cache;
pub mod cli;
pub mod error;
pub mod parse;

pub use cli::{run, Cli};
pub use error::CliError;
