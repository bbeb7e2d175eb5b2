use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use super::{Format, RunConfig};
use crate::error::{Error, Result};

/// Round-trippable float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Fully assembled command output; nothing is written until `emit`.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    /// Header and rows for commands with a tabular result.
    pub table: Option<(Vec<String>, Vec<Vec<String>>)>,
    /// Extra structured data written next to a CSV table.
    pub summary: Value,
    pub exit_code: i32,
}

impl Report {
    pub fn new(result: impl Serialize) -> Result<Self> {
        Ok(Self {
            json: serde_json::to_value(result).map_err(|e| Error::Config(e.to_string()))?,
            table: None,
            summary: Value::Null,
            exit_code: 0,
        })
    }

    pub fn with_table(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.table = Some((header.iter().map(|s| s.to_string()).collect(), rows));
        self
    }

    pub fn with_summary(mut self, s: Value) -> Self {
        self.summary = s;
        self
    }

    pub fn csv(&self) -> Option<String> {
        let (h, rows) = self.table.as_ref()?;
        let mut s = h.join(",");
        s.push('\n');
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        Some(s)
    }

    /// Writes the result with the resolved config: inline for JSON, as a
    /// `<out>.json` sidecar (or on stderr) for CSV.
    pub fn emit(&self, cfg: &RunConfig) -> Result<()> {
        let resolved = serde_json::to_value(cfg).map_err(|e| Error::Config(e.to_string()))?;
        let (body, side) = match (cfg.output.format, self.csv()) {
            (Format::Csv, Some(csv)) => {
                let side = json!({ "config": resolved, "summary": self.summary });
                (csv, Some(side))
            }
            _ => {
                let mut v = json!({ "config": resolved, "result": self.json });
                if !self.summary.is_null() {
                    v["summary"] = self.summary.clone();
                }
                (pretty(&v)?, None)
            }
        };
        match &cfg.output.out {
            Some(path) => {
                std::fs::write(path, body).map_err(|e| Error::Config(format!("{path}: {e}")))?;
                if let Some(s) = side {
                    let sp = format!("{path}.json");
                    std::fs::write(&sp, pretty(&s)?).map_err(|e| Error::Config(format!("{sp}: {e}")))?;
                }
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(body.as_bytes()).map_err(|e| Error::Config(e.to_string()))?;
                if let Some(s) = side {
                    eprintln!("{}", pretty(&s)?);
                }
            }
        }
        Ok(())
    }
}

fn pretty(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
