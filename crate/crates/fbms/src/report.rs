//! JSON and CSV report writers. Every report carries the tool version and
//! the resolved configuration; nothing time- or host-dependent goes in, so
//! the same configuration gives byte-identical files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const TOOL: &str = "fbms";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    passed: bool,
    report: &'a T,
}

pub fn write_json<T: Serialize>(
    path: &Path,
    config: &RunConfig,
    passed: bool,
    report: &T,
) -> Result<()> {
    let env = Envelope {
        tool: TOOL,
        version: VERSION,
        config,
        passed,
        report,
    };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    fs::write(path, text).map_err(CliError::io(path))
}

/// CSV with two `#` lines in front: the version and the configuration as
/// one line of JSON.
pub fn write_csv<R: Serialize>(
    path: &Path,
    config: &RunConfig,
    rows: impl IntoIterator<Item = R>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(CliError::io(path))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# {TOOL} {VERSION}").map_err(CliError::io(path))?;
    writeln!(w, "# config {}", serde_json::to_string(config)?).map_err(CliError::io(path))?;
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush().map_err(CliError::io(path))
}

/// Record of a failed run, written as `error.json`.
#[derive(Serialize)]
pub struct ErrorRecord<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: &'static str,
    pub message: String,
    pub exit_code: u8,
    pub config: Option<&'a RunConfig>,
}

impl<'a> ErrorRecord<'a> {
    pub fn new(e: &CliError, config: Option<&'a RunConfig>) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            kind: e.kind(),
            message: e.to_string(),
            exit_code: e.exit_code(),
            config,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(CliError::io(path))
    }
}
