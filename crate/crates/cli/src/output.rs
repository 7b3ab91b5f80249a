//! Deterministic artifact writing: CSV tables with full-precision floats, a
//! plain-text summary, and a manifest with the config echo and SHA-256
//! hashes of every artifact.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use memkern::GridFunction64;

use crate::config::ScenarioConfig;
use crate::error::CliError;

/// Full-precision decimal form (17 significant digits); byte-stable across
/// runs.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects artifacts in one output directory and records their hashes.
pub struct ArtifactSink {
    dir: PathBuf,
    hashes: BTreeMap<String, String>,
    summary: Vec<String>,
}

impl ArtifactSink {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hashes: BTreeMap::new(),
            summary: Vec::new(),
        })
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), bytes)?;
        let digest = Sha256::digest(bytes);
        self.hashes.insert(name.to_string(), hex_string(&digest));
        Ok(())
    }

    /// CSV with a time column and one or more value columns.
    pub fn write_traces_csv(
        &mut self,
        name: &str,
        headers: &[&str],
        columns: &[&GridFunction64],
    ) -> Result<(), CliError> {
        assert_eq!(headers.len(), columns.len() + 1);
        let grid = *columns[0].grid();
        let mut out = String::new();
        out.push_str(&headers.join(","));
        out.push('\n');
        for (n, t) in grid.nodes().enumerate() {
            out.push_str(&fmt_float(t));
            for c in columns {
                out.push(',');
                out.push_str(&fmt_float(c.value(n)));
            }
            out.push('\n');
        }
        self.write_bytes(name, out.as_bytes())
    }

    /// CSV of spatial samples (`x,value`).
    pub fn write_spatial_csv(
        &mut self,
        name: &str,
        xs: &[f64],
        values: &[f64],
    ) -> Result<(), CliError> {
        let mut out = String::from("x,value\n");
        for (x, v) in xs.iter().zip(values) {
            out.push_str(&fmt_float(*x));
            out.push(',');
            out.push_str(&fmt_float(*v));
            out.push('\n');
        }
        self.write_bytes(name, out.as_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::config(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    /// Writes `summary.txt` and `manifest.json`, consuming the sink.
    pub fn finish(mut self, config: &ScenarioConfig) -> Result<PathBuf, CliError> {
        let summary = self.summary.join("\n") + "\n";
        self.write_bytes("summary.txt", summary.as_bytes())?;

        #[derive(Serialize)]
        struct Manifest<'a> {
            config: &'a ScenarioConfig,
            artifacts: &'a BTreeMap<String, String>,
        }
        let manifest = serde_json::to_string_pretty(&Manifest {
            config,
            artifacts: &self.hashes,
        })
        .map_err(|e| CliError::config(format!("cannot serialize manifest: {e}")))?;
        fs::write(self.dir.join("manifest.json"), manifest + "\n")?;
        Ok(self.dir)
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_full_precision() {
        let x = std::f64::consts::PI;
        let s = fmt_float(x);
        assert_eq!(s.parse::<f64>().unwrap(), x, "{s} must round-trip");
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
    }
}
