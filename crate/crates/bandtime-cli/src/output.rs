//! Deterministic data emission: tables as CSV (or JSON), JSON summaries,
//! and a final run manifest with the config echo and output checksums.
//! Floats are printed with 17 significant digits so identical runs are
//! byte-identical.

use std::fs;
use std::path::PathBuf;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use bandtime::{Error, Result};

use crate::config::{OutputFormat, RunConfig};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// JSON numbers cannot carry NaN; flagged values become null.
pub fn json_float(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub struct OutputWriter {
    dir: PathBuf,
    format: OutputFormat,
    written: Vec<(String, String)>,
}

impl OutputWriter {
    pub fn new(config: &RunConfig) -> Result<Self> {
        fs::create_dir_all(&config.directory).map_err(|e| {
            Error::validation(format!(
                "cannot create output directory {}: {e}",
                config.directory.display()
            ))
        })?;
        Ok(OutputWriter {
            dir: config.directory.clone(),
            format: config.format,
            written: Vec::new(),
        })
    }

    fn write_file(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)
            .map_err(|e| Error::validation(format!("cannot write {}: {e}", path.display())))?;
        let digest = Sha256::digest(bytes);
        self.written.push((name.to_string(), hex_string(&digest)));
        Ok(())
    }

    /// Tabular data as `name.csv` or `name.json` per the configured format.
    /// Returns the file name actually written.
    pub fn write_table(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<String> {
        match self.format {
            OutputFormat::Csv => {
                let mut text = String::new();
                text.push_str(&header.join(","));
                text.push('\n');
                for row in rows {
                    let cells: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
                    text.push_str(&cells.join(","));
                    text.push('\n');
                }
                let file = format!("{name}.csv");
                self.write_file(&file, text.as_bytes())?;
                Ok(file)
            }
            OutputFormat::Json => {
                let value = json!({
                    "columns": header,
                    "rows": rows
                        .iter()
                        .map(|row| Value::Array(row.iter().map(|&v| json_float(v)).collect()))
                        .collect::<Vec<Value>>(),
                });
                let file = format!("{name}.json");
                self.write_json_value(&file, &value)?;
                Ok(file)
            }
        }
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<String> {
        let file = format!("{name}.json");
        self.write_json_value(&file, value)?;
        Ok(file)
    }

    fn write_json_value(&mut self, file: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::numerical(format!("JSON serialization failed: {e}")))?;
        text.push('\n');
        self.write_file(file, text.as_bytes())
    }

    /// Write the manifest (config echo + version + output checksums) last.
    pub fn finish(mut self, command: &str, config: &RunConfig) -> Result<()> {
        let mut echo = Map::new();
        for (k, v) in config.to_pairs() {
            echo.insert(k, Value::String(v));
        }
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": Value::Object(echo),
            "outputs": self
                .written
                .iter()
                .map(|(name, sha)| json!({"file": name, "sha256": sha}))
                .collect::<Vec<Value>>(),
        });
        self.write_json_value("manifest.json", &manifest)
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_has_17_significant_digits() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(f64::NAN), "nan");
        let pi = std::f64::consts::PI;
        assert_eq!(fmt_float(pi).parse::<f64>().unwrap(), pi);
    }

    #[test]
    fn json_flagged_values_become_null() {
        assert_eq!(json_float(f64::NAN), Value::Null);
        assert_eq!(json_float(2.5), json!(2.5));
    }
}
