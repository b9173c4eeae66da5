//! CSV, gnuplot and manifest artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use qtm_core::Config;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const ARTIFACT: &str = "qtm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// What produced a set of output files. Written as JSON next to the CSVs and
/// echoed, minus the timestamp, at the top of every CSV.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: String,
    pub schema: String,
    pub config: Config,
    pub parameters: Value,
    pub timestamp: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, schema: u32, config: &Config, parameters: Value) -> Self {
        Self {
            artifact: ARTIFACT,
            version: VERSION,
            command: command.to_string(),
            schema: format!("{command}/{schema}"),
            config: *config,
            parameters,
            timestamp: humantime::format_rfc3339_seconds(SystemTime::now()).to_string(),
            outputs: Vec::new(),
        }
    }

    fn header(&self) -> String {
        let mut out = format!(
            "# {} {} {}\n# schema: {}\n",
            self.artifact, self.version, self.command, self.schema
        );
        for line in self.config.to_kv().lines() {
            out.push_str(&format!("# config: {line}\n"));
        }
        if let Value::Object(map) = &self.parameters {
            for (k, v) in map {
                out.push_str(&format!("# {k}: {v}\n"));
            }
        }
        out
    }

    /// Writes `<stem>.csv` with the manifest block and records the path.
    pub fn write_csv<R: Serialize>(
        &mut self,
        dir: &Path,
        stem: &str,
        columns: &[&str],
        rows: &[R],
    ) -> Result<PathBuf, CliError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(columns).map_err(io_error)?;
        for r in rows {
            w.serialize(r).map_err(io_error)?;
        }
        let body = w.into_inner().map_err(|e| io_error(e.to_string()))?;
        let mut text = self.header().into_bytes();
        text.extend(body);
        let path = dir.join(format!("{stem}.csv"));
        fs::write(&path, text).map_err(|e| io_error(format!("{}: {e}", path.display())))?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    pub fn write_script(&mut self, dir: &Path, stem: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{stem}.gp"));
        let script = format!(
            "# gnuplot script; run `gnuplot {stem}.gp` in this directory\n\
             set datafile separator ','\n\
             set key autotitle columnhead\n\
             set terminal pngcairo size 800,560\n\
             set output '{stem}.png'\n\
             {body}"
        );
        fs::write(&path, script).map_err(|e| io_error(format!("{}: {e}", path.display())))?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    pub fn finish(mut self, dir: &Path, stem: &str) -> Result<(), CliError> {
        let path = dir.join(format!("{stem}.manifest.json"));
        self.outputs.push(path.clone());
        let json = serde_json::to_string_pretty(&self).map_err(io_error)?;
        fs::write(&path, json + "\n").map_err(|e| io_error(format!("{}: {e}", path.display())))?;
        for p in &self.outputs {
            println!("wrote {}", p.display());
        }
        Ok(())
    }
}

pub fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))
}

fn io_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot write output: {e}"))
}
