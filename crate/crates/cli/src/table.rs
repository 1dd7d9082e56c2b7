//! Result tables with provenance, emitted as CSV (header row + units row)
//! or JSON (schema-versioned), byte-stable across runs for identical inputs.

use serde_json::{json, Map, Value};

use crate::error::CliError;

/// A named, unit-carrying column.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

/// One numeric record; evaluation failures are recorded in-row with NaN
/// values and an error tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub values: Vec<f64>,
    pub error: Option<String>,
}

/// Provenance carried by every table.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    /// FNV-1a hash of the canonical config echo, hex.
    pub config_hash: String,
    pub tool_version: String,
    /// Effective RNG seed (0 when the scenario uses none).
    pub seed: u64,
    /// Free-text qualifier, e.g. marking calibrated parameter sets.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    pub provenance: Provenance,
}

pub const SCHEMA: &str = "qfc-result/1";

impl ResultTable {
    /// CSV: provenance comments, header row, units row, then records with a
    /// trailing `error` column. Non-finite values print as `NaN`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# qfc-result v1\n");
        out.push_str(&format!("# config_hash={}\n", self.provenance.config_hash));
        out.push_str(&format!(
            "# tool_version={}\n",
            self.provenance.tool_version
        ));
        out.push_str(&format!("# seed={}\n", self.provenance.seed));
        if let Some(note) = &self.provenance.note {
            out.push_str(&format!("# note={note}\n"));
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push_str(",error\n");
        let units: Vec<&str> = self.columns.iter().map(|c| c.unit.as_str()).collect();
        out.push_str(&units.join(","));
        out.push_str(",-\n");
        for row in &self.rows {
            let mut fields: Vec<String> = row
                .values
                .iter()
                .map(|v| {
                    if v.is_finite() {
                        format!("{v}")
                    } else {
                        "NaN".to_string()
                    }
                })
                .collect();
            fields.push(row.error.clone().unwrap_or_default());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON with a schema tag; non-finite values serialize as null.
    pub fn to_json(&self) -> String {
        let columns: Vec<Value> = self
            .columns
            .iter()
            .map(|c| json!({"name": c.name, "unit": c.unit}))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Array(
                    r.values
                        .iter()
                        .map(|v| if v.is_finite() { json!(v) } else { Value::Null })
                        .collect(),
                )
            })
            .collect();
        let row_errors: Vec<Value> = self
            .rows
            .iter()
            .map(|r| r.error.as_ref().map(|e| json!(e)).unwrap_or(Value::Null))
            .collect();
        let value = json!({
            "schema": SCHEMA,
            "provenance": {
                "config_hash": self.provenance.config_hash,
                "tool_version": self.provenance.tool_version,
                "seed": self.provenance.seed,
                "note": self.provenance.note,
            },
            "columns": columns,
            "rows": rows,
            "row_errors": row_errors,
        });
        serde_json::to_string_pretty(&value).expect("table serialization")
    }

    /// Parse a table back from its JSON form; nulls become NaN.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Eval(format!("result table parse: {e}")))?;
        let obj = v
            .as_object()
            .ok_or_else(|| CliError::Eval("result table: not an object".into()))?;
        if obj.get("schema").and_then(Value::as_str) != Some(SCHEMA) {
            return Err(CliError::Eval(format!(
                "result table: unknown schema {:?}",
                obj.get("schema")
            )));
        }
        let prov = obj
            .get("provenance")
            .and_then(Value::as_object)
            .ok_or_else(|| CliError::Eval("result table: missing provenance".into()))?;
        let get_str = |m: &Map<String, Value>, k: &str| -> Result<String, CliError> {
            m.get(k)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| CliError::Eval(format!("result table: missing {k}")))
        };
        let provenance = Provenance {
            config_hash: get_str(prov, "config_hash")?,
            tool_version: get_str(prov, "tool_version")?,
            seed: prov.get("seed").and_then(Value::as_u64).unwrap_or(0),
            note: prov.get("note").and_then(Value::as_str).map(str::to_string),
        };
        let columns = obj
            .get("columns")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::Eval("result table: missing columns".into()))?
            .iter()
            .map(|c| {
                let m = c
                    .as_object()
                    .ok_or_else(|| CliError::Eval("bad column".into()))?;
                Ok(Column {
                    name: get_str(m, "name")?,
                    unit: get_str(m, "unit")?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let raw_rows = obj
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::Eval("result table: missing rows".into()))?;
        let raw_errors = obj.get("row_errors").and_then(Value::as_array);
        let mut rows = Vec::with_capacity(raw_rows.len());
        for (i, r) in raw_rows.iter().enumerate() {
            let vals = r
                .as_array()
                .ok_or_else(|| CliError::Eval(format!("result table: row {i} not an array")))?
                .iter()
                .map(|v| v.as_f64().unwrap_or(f64::NAN))
                .collect();
            let error = raw_errors
                .and_then(|e| e.get(i))
                .and_then(Value::as_str)
                .map(str::to_string);
            rows.push(Row {
                values: vals,
                error,
            });
        }
        Ok(Self {
            columns,
            rows,
            provenance,
        })
    }
}

/// 64-bit FNV-1a over bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
