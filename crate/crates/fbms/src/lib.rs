//! Command line runner, file formats and worker pool around `fbms-core`.

pub mod config;
pub mod error;
pub mod obj;
pub mod parallel;
pub mod report;
pub mod run;

pub use config::{Command, RunConfig};
pub use error::{CliError, Result};
pub use run::{run, Artifacts};
