//! Batch runner: JSON config in, CSV/JSON artifacts and a manifest out.

pub mod config;
pub mod error;
pub mod formats;
pub mod output;
pub mod run;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use run::{run, Experiment};
