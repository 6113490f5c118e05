//! Flat key = value configuration files with command-line flag overrides
//! (flags win). The raw file text and the resolved values are both echoed
//! verbatim into every report so a run is reproducible from its output.

use crate::error::CliError;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    pub raw_text: Option<String>,
    values: BTreeMap<String, String>,
    /// Effective values after flag overrides, recorded for the echo.
    resolved: std::cell::RefCell<BTreeMap<String, String>>,
}

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (lineno, line) in raw.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "config line {} is not `key = value`: {line:?}",
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self {
            raw_text: Some(raw),
            values,
            resolved: Default::default(),
        })
    }

    fn record(&self, key: &str, rendered: String) {
        self.resolved.borrow_mut().insert(key.to_string(), rendered);
    }

    /// Flag value if present, else config-file value, else default.
    pub fn resolve<T: std::str::FromStr + std::fmt::Display>(
        &self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let value = if let Some(v) = flag {
            v
        } else if let Some(s) = self.values.get(key) {
            s.parse().map_err(|e| {
                CliError::Config(format!("config key {key} = {s:?} did not parse: {e}"))
            })?
        } else {
            default
        };
        self.record(key, value.to_string());
        Ok(value)
    }

    /// Comma-separated list, from flag string or config value.
    pub fn resolve_list<T: std::str::FromStr>(
        &self,
        key: &str,
        flag: Option<&str>,
        default: &str,
    ) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let source = flag
            .map(str::to_string)
            .or_else(|| self.values.get(key).cloned())
            .unwrap_or_else(|| default.to_string());
        self.record(key, source.clone());
        source
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|e| {
                    CliError::Config(format!("list key {key}: entry {s:?} did not parse: {e}"))
                })
            })
            .collect()
    }

    /// Grid spec: either `start:end:count` or a comma-separated list.
    pub fn resolve_grid(
        &self,
        key: &str,
        flag: Option<&str>,
        default: &str,
    ) -> Result<Vec<f64>, CliError> {
        let source = flag
            .map(str::to_string)
            .or_else(|| self.values.get(key).cloned())
            .unwrap_or_else(|| default.to_string());
        self.record(key, source.clone());
        if source.contains(':') {
            let parts: Vec<&str> = source.split(':').collect();
            if parts.len() != 3 {
                return Err(CliError::Config(format!(
                    "grid {key} must be start:end:count, got {source:?}"
                )));
            }
            let start: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|e| CliError::Config(format!("grid {key} start: {e}")))?;
            let end: f64 = parts[1]
                .trim()
                .parse()
                .map_err(|e| CliError::Config(format!("grid {key} end: {e}")))?;
            let count: usize = parts[2]
                .trim()
                .parse()
                .map_err(|e| CliError::Config(format!("grid {key} count: {e}")))?;
            if count < 2 || !(end > start) {
                return Err(CliError::Config(format!(
                    "grid {key} needs end > start and count >= 2, got {source:?}"
                )));
            }
            let step = (end - start) / (count - 1) as f64;
            Ok((0..count).map(|k| start + step * k as f64).collect())
        } else {
            source
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|e| {
                        CliError::Config(format!("grid {key}: entry {s:?} did not parse: {e}"))
                    })
                })
                .collect()
        }
    }

    /// Config echo for report embedding: raw file text plus the effective
    /// values the run actually used.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::json!({
            "file": self.raw_text,
            "resolved": self.resolved.borrow().clone(),
        })
    }
}
