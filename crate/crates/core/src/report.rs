//! Machine-readable run reports.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Whether a number comes from the fast engines or from exhaustive
/// enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Computed,
    Oracle,
}

/// A residual with the tolerance it is judged against.
#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub value: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
    pub passed: bool,
}

/// Rows destined for CSV output.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        self.rows.push(row);
    }
}

/// Field order is fixed: command, input hash, parameters, results,
/// residuals, tolerances, wall time.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub input_hash: String,
    pub parameters: Map<String, Value>,
    pub results: Map<String, Value>,
    pub residuals: Map<String, Value>,
    pub tolerances: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    pub wall_time: f64,
    #[serde(skip)]
    started: Option<Instant>,
}

/// SHA-256 of the canonical input document, hex encoded.
pub fn input_hash(document: &str) -> String {
    hex::encode(Sha256::digest(document.as_bytes()))
}

impl RunReport {
    pub fn new(command: &str, input: &str) -> Self {
        Self {
            command: command.to_string(),
            input_hash: input_hash(input),
            parameters: Map::new(),
            results: Map::new(),
            residuals: Map::new(),
            tolerances: Map::new(),
            table: None,
            wall_time: 0.0,
            started: Some(Instant::now()),
        }
    }

    pub fn parameter(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.parameters.insert(key.into(), json!(v));
        self
    }

    pub fn result(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.results.insert(key.into(), json!(v));
        self
    }

    pub fn tolerance(&mut self, key: &str, tol: f64) -> &mut Self {
        self.tolerances.insert(key.into(), json!(tol));
        self
    }

    /// Records a residual and its tolerance; returns whether it passed.
    pub fn residual(&mut self, key: &str, value: f64, tolerance: f64, provenance: Provenance) -> bool {
        let passed = value <= tolerance;
        let r = Residual { value, tolerance, provenance, passed };
        self.residuals.insert(key.into(), json!(r));
        self.tolerances.insert(key.into(), json!(tolerance));
        passed
    }

    pub fn set_table(&mut self, t: Table) -> &mut Self {
        self.table = Some(t);
        self
    }

    pub fn finish(&mut self) -> &mut Self {
        if let Some(t) = self.started {
            self.wall_time = t.elapsed().as_secs_f64();
        }
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The table if there is one, otherwise `key,value` lines of the scalar
    /// results.
    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match &self.table {
            Some(t) => {
                w.write_record(&t.columns)?;
                for row in &t.rows {
                    w.write_record(row.iter().map(cell_text))?;
                }
            }
            None => {
                w.write_record(["key", "value"])?;
                for (k, v) in &self.results {
                    w.write_record([k.clone(), cell_text(v)])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl From<csv::Error> for crate::error::Error {
    fn from(e: csv::Error) -> Self {
        crate::error::Error::Io(std::io::Error::other(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_order_is_fixed() {
        let mut r = RunReport::new("lattice", "{}");
        r.parameter("n", 2).result("z", 1.5);
        r.residual("x", 1e-12, 1e-9, Provenance::Oracle);
        let s = r.finish().to_json().unwrap();
        let keys = ["command", "input_hash", "parameters", "results", "residuals", "tolerances", "wall_time"];
        let pos: Vec<usize> = keys.iter().map(|k| s.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(s.contains("\"oracle\""));
    }

    #[test]
    fn csv_falls_back_to_key_value() {
        let mut r = RunReport::new("coupling", "");
        r.result("j", 0.5);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "key,value\nj,0.5\n");
        assert_eq!(input_hash("").len(), 64);
    }
}
