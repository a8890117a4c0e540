//! Command-line front end: occurrence ingestion, estimation runs, exports and simulations.

pub mod commands;
pub mod error;
pub mod export;
pub mod ingest;
pub mod manifest;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};
