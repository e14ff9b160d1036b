//! CSV artifacts with a metadata header, each mirrored as JSON.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::spec::JobSpec;

/// Metadata key that is allowed to differ between identical runs.
pub const TIMESTAMP_KEY: &str = "generated";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Self::Num(x) => format_float(*x),
            Self::Int(i) => i.to_string(),
            Self::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Self::Text(s) => s.clone(),
            Self::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Self::Num(x) if x.is_finite() => json!(x),
            Self::Num(x) => json!(format_float(*x)),
            Self::Int(i) => json!(i),
            Self::Text(s) => json!(s),
            Self::Missing => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Self::Int(i)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Self::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Self::Text(b.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Self::Missing, Self::Num)
    }
}

/// Flags joined with `;`.
pub fn flags_cell(flags: &[String]) -> Cell {
    Cell::Text(flags.join(";"))
}

/// Seventeen significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Job-specific metadata, after the common keys.
    pub extra: Vec<(String, String)>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Common header of every artifact of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn for_job(job: &JobSpec) -> Self {
        let canonical = serde_json::to_string(job).expect("job spec serializes");
        let hash: String = Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        let seed = job.seed().map_or_else(|| "none".to_string(), |s| s.to_string());
        let entries = vec![
            ("tool".into(), format!("chargequench {}", env!("CARGO_PKG_VERSION"))),
            ("command".into(), job.name().into()),
            ("seed".into(), seed),
            ("config_hash".into(), hash),
            ("config".into(), canonical),
            (TIMESTAMP_KEY.into(), timestamp().to_string()),
        ];
        Self { entries }
    }

    fn with_extra(&self, extra: &[(String, String)]) -> Vec<(String, String)> {
        let mut all = self.entries.clone();
        all.extend_from_slice(extra);
        all
    }
}

/// Unix seconds, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

pub fn render_csv(meta: &Metadata, table: &Table) -> String {
    let mut out = String::new();
    for (k, v) in meta.with_extra(&table.extra) {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn render_json(meta: &Metadata, table: &Table) -> String {
    let metadata = metadata_json(&meta.with_extra(&table.extra));
    let rows: Vec<Value> = table.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
    let doc = json!({ "metadata": metadata, "columns": table.columns, "rows": rows });
    serde_json::to_string_pretty(&doc).expect("table serializes") + "\n"
}

fn metadata_json(entries: &[(String, String)]) -> Value {
    let mut map = Map::new();
    for (k, v) in entries {
        map.insert(k.clone(), Value::String(v.clone()));
    }
    Value::Object(map)
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn write_table(dir: &Path, stem: &str, meta: &Metadata, table: &Table) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    fs::write(&csv, render_csv(meta, table))?;
    fs::write(&json, render_json(meta, table))?;
    Ok(vec![csv, json])
}

/// Writes a JSON document with the metadata merged in as `metadata`.
pub fn write_document(dir: &Path, stem: &str, meta: &Metadata, body: Value) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut doc = Map::new();
    doc.insert("metadata".into(), metadata_json(&meta.entries));
    if let Value::Object(fields) = body {
        doc.extend(fields);
    }
    let path = dir.join(format!("{stem}.json"));
    fs::write(&path, serde_json::to_string_pretty(&Value::Object(doc)).expect("document serializes") + "\n")?;
    Ok(vec![path])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.5), "-2.5000000000000000e0");
        let x = std::f64::consts::PI;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn text_cells_are_quoted() {
        assert_eq!(Cell::Text("a,b".into()).csv(), "\"a,b\"");
        assert_eq!(Cell::Missing.csv(), "");
        assert_eq!(Cell::Missing.json(), Value::Null);
    }
}
