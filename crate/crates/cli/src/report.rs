//! Report writing: a JSON envelope with a stable schema plus plot-ready
//! CSV tables. Field order is fixed by construction so identical runs
//! produce byte-identical files.

use crate::config::ConfigMap;
use crate::error::CliError;
use serde_json::json;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Output paths derived from `--out`: an explicit .csv/.json path pins that
/// format's file and the sibling gets the swapped extension; anything else
/// is treated as a stem.
pub fn output_paths(out: &Path) -> (PathBuf, PathBuf) {
    match out.extension().and_then(|e| e.to_str()) {
        Some("csv") => (out.to_path_buf(), out.with_extension("json")),
        Some("json") => (out.with_extension("csv"), out.to_path_buf()),
        _ => {
            let mut csv = out.as_os_str().to_owned();
            csv.push(".csv");
            let mut json = out.as_os_str().to_owned();
            json.push(".json");
            (PathBuf::from(csv), PathBuf::from(json))
        }
    }
}

pub struct Report {
    pub command: &'static str,
    pub seed: u64,
    pub config_echo: serde_json::Value,
    pub results: serde_json::Value,
    pub constants_provenance: Option<serde_json::Value>,
    /// CSV rows: header plus data, already rendered.
    pub csv_header: Vec<String>,
    pub csv_rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(command: &'static str, seed: u64, config: &ConfigMap) -> Self {
        Self {
            command,
            seed,
            config_echo: config.echo(),
            results: serde_json::Value::Null,
            constants_provenance: None,
            csv_header: Vec::new(),
            csv_rows: Vec::new(),
        }
    }

    pub fn json_value(&self) -> serde_json::Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "seed": self.seed,
            "config_echo": self.config_echo,
            "results": self.results,
            "constants_provenance": self.constants_provenance,
        })
    }

    fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let mut wtr = csv::Writer::from_path(path)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        wtr.write_record(&self.csv_header)?;
        for row in &self.csv_rows {
            wtr.write_record(row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    fn write_json(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(&self.json_value())?;
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }

    /// Writes the report. With `--format` given, only that file is
    /// produced; without it both the CSV table and the JSON envelope are.
    pub fn write(&self, out: &Path, format: Option<OutputFormat>) -> Result<(), CliError> {
        let (csv_path, json_path) = output_paths(out);
        match format {
            Some(OutputFormat::Csv) => self.write_csv(&csv_path),
            Some(OutputFormat::Json) => self.write_json(&json_path),
            None => {
                self.write_csv(&csv_path)?;
                self.write_json(&json_path)
            }
        }
    }
}

/// Shortest-roundtrip decimal rendering; `{}` on f64 is stable across runs.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_path_derivation() {
        let (c, j) = output_paths(Path::new("run/report.csv"));
        assert_eq!(c, Path::new("run/report.csv"));
        assert_eq!(j, Path::new("run/report.json"));
        let (c, j) = output_paths(Path::new("report"));
        assert_eq!(c, Path::new("report.csv"));
        assert_eq!(j, Path::new("report.json"));
    }
}
