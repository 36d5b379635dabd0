//! Tabular reports and their CSV / JSON serialisation.
//!
//! CSV mode writes the record table to the output path, the summary to
//! `<out>.summary.csv` (`key,value` rows) and any further table `name` to
//! `<out>.<name>.csv`. JSON mode writes a single object
//! `{"experiment", "summary", "records", <name>...}`. All files are staged in
//! temporaries and only moved into place once every one has been written.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use tempfile::NamedTempFile;

use crate::config::OutputFormat;
use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Field {
    pub fn opt_float(x: Option<f64>) -> Field {
        x.map_or(Field::Missing, Field::Float)
    }

    pub fn to_csv(&self) -> String {
        match self {
            Field::Int(n) => n.to_string(),
            Field::Float(x) => format_float(*x),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) => s.clone(),
            Field::Missing => String::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Field::Int(n) => Value::from(*n),
            Field::Float(x) if x.is_finite() => Value::from(format_float(*x).parse::<f64>().unwrap_or(*x)),
            Field::Float(_) | Field::Missing => Value::Null,
            Field::Bool(b) => Value::from(*b),
            Field::Text(s) => Value::from(s.as_str()),
        }
    }
}

/// `%.12g`: twelve significant digits, trailing zeros removed.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, f)| (c.to_string(), f.to_json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Field::to_csv))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub experiment: &'static str,
    pub summary: Vec<(&'static str, Field)>,
    pub records: Table,
    /// Additional named tables.
    pub extra: Vec<(&'static str, Table)>,
}

impl Report {
    pub fn summary_value(&self, key: &str) -> Option<&Field> {
        self.summary.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    /// `key = value` lines for the terminal.
    pub fn summary_text(&self) -> String {
        let mut s = format!("experiment = {}\n", self.experiment);
        for (k, v) in &self.summary {
            s.push_str(&format!("{k} = {}\n", v.to_csv()));
        }
        s
    }

    fn summary_table(&self) -> Table {
        let mut t = Table::new(vec!["key", "value"]);
        for (k, v) in &self.summary {
            t.push(vec![Field::Text(k.to_string()), v.clone()]);
        }
        t
    }

    fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("experiment".into(), Value::from(self.experiment));
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect();
        obj.insert("summary".into(), Value::Object(summary));
        obj.insert("records".into(), self.records.to_json());
        for (name, table) in &self.extra {
            obj.insert(name.to_string(), table.to_json());
        }
        Value::Object(obj)
    }

    /// Writes the report; on any failure no output file is left behind.
    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        let mut staged: Vec<(NamedTempFile, PathBuf)> = Vec::new();
        match format {
            OutputFormat::Json => {
                let mut tmp = stage(path)?;
                serde_json::to_writer_pretty(&mut tmp, &self.to_json())
                    .map_err(|e| HarnessError::io(path, std::io::Error::other(e)))?;
                tmp.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
                staged.push((tmp, path.to_path_buf()));
            }
            OutputFormat::Csv => {
                let summary = self.summary_table();
                let mut tables = vec![(path.to_path_buf(), &self.records), (sibling(path, "summary"), &summary)];
                for (name, table) in &self.extra {
                    tables.push((sibling(path, name), table));
                }
                for (target, table) in tables {
                    let mut tmp = stage(&target)?;
                    table.write_csv(&mut tmp).map_err(|e| HarnessError::io(&target, e))?;
                    staged.push((tmp, target));
                }
            }
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, target) in staged {
            if let Err(e) = tmp.persist(&target) {
                for done in &written {
                    let _ = std::fs::remove_file(done);
                }
                return Err(HarnessError::io(&target, e.error));
            }
            written.push(target);
        }
        Ok(written)
    }
}

/// `out.csv` + `summary` → `out.summary.csv`.
pub fn sibling(path: &Path, name: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}.{name}.{ext}"))
}

fn stage(target: &Path) -> Result<NamedTempFile> {
    let dir = match target.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(target, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(2.0f64.sqrt()), "1.41421356237");
        assert_eq!(format_float(-1.0 / 3.0), "-0.333333333333");
        assert_eq!(format_float(123456.5), "123456.5");
        assert_eq!(format_float(1e-7), "1e-07");
        assert_eq!(format_float(6.02214076e23), "6.02214076e+23");
        assert_eq!(format_float(0.000123), "0.000123");
        assert_eq!(format_float(9.9999999999999), "10");
    }

    #[test]
    fn sibling_names() {
        assert_eq!(sibling(Path::new("/x/out.csv"), "summary"), PathBuf::from("/x/out.summary.csv"));
        assert_eq!(sibling(Path::new("out"), "steps"), PathBuf::from("out.steps.csv"));
    }

    fn report() -> Report {
        let mut records = Table::new(vec!["i", "x", "ok"]);
        records.push(vec![Field::Int(0), Field::Float(0.5), Field::Bool(true)]);
        records.push(vec![Field::Int(1), Field::Missing, Field::Bool(false)]);
        Report {
            experiment: "demo",
            summary: vec![("n", Field::Int(2))],
            records,
            extra: vec![],
        }
    }

    #[test]
    fn csv_and_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.csv");
        let files = report().write(&out, OutputFormat::Csv).unwrap();
        assert_eq!(files.len(), 2);
        assert_eq!(std::fs::read_to_string(&out).unwrap(), "i,x,ok\n0,0.5,true\n1,,false\n");
        assert_eq!(std::fs::read_to_string(dir.path().join("r.summary.csv")).unwrap(), "key,value\nn,2\n");

        let json = dir.path().join("r.json");
        report().write(&json, OutputFormat::Json).unwrap();
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
        assert_eq!(v["summary"]["n"], 2);
        assert_eq!(v["records"][1]["x"], Value::Null);
    }

    #[test]
    fn missing_directory_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("nope").join("r.csv");
        let err = report().write(&out, OutputFormat::Csv).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(!out.exists());
    }
}
