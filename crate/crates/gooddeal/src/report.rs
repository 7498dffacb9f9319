//! Deterministic report rendering: RFC-4180 CSV and JSON documents.
//!
//! Every rendered artifact embeds the tool version and the SHA-256 of the
//! canonical configuration, and both encoders are byte-deterministic: a
//! rerun with the same configuration and seed reproduces output files
//! exactly, which is what the reproducibility checks diff against.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::OutputFormat;
use crate::error::{Error, Result};
use crate::montecarlo::TrackingReport;

/// One typed value in a report table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// A floating-point quantity (shortest round-tripping decimal form).
    Num(f64),
    /// An integer quantity.
    Int(i64),
    /// A verdict or switch.
    Bool(bool),
    /// Free text (escaped as needed by the encoder).
    Text(String),
}

/// A named rectangular table; the unit every command reports in.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Table name; also the default file stem.
    pub name: String,
    /// Column headers.
    pub columns: Vec<String>,
    /// Data rows, each exactly as wide as `columns`.
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Creates an empty table with the given header row.
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; the arity must match the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match the header of table '{}'",
            self.name
        );
        self.rows.push(row);
    }
}

fn csv_field(cell: &Cell) -> String {
    let raw = match cell {
        Cell::Num(x) => x.to_string(),
        Cell::Int(i) => i.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(t) => t.clone(),
    };
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

fn provenance(config_sha256: &str) -> String {
    format!("# gooddeal {} config_sha256={config_sha256}", crate::VERSION)
}

/// Renders a table as RFC-4180 CSV: a leading provenance comment line, a
/// header row, then one CRLF-terminated record per row, UTF-8 with '.' as
/// the decimal separator.
pub fn to_csv(table: &Table, config_sha256: &str) -> String {
    let mut out = String::new();
    out.push_str(&provenance(config_sha256));
    out.push_str("\r\n");
    out.push_str(&table.columns.join(","));
    out.push_str("\r\n");
    for row in &table.rows {
        let fields: Vec<String> = row.iter().map(csv_field).collect();
        out.push_str(&fields.join(","));
        out.push_str("\r\n");
    }
    out
}

fn json_cell(cell: &Cell) -> Value {
    match cell {
        Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
        Cell::Int(i) => json!(i),
        Cell::Bool(b) => json!(b),
        Cell::Text(t) => json!(t),
    }
}

/// Renders a table as a pretty-printed JSON document carrying the tool
/// version and configuration hash.
pub fn to_json(table: &Table, config_sha256: &str) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| Value::Array(row.iter().map(json_cell).collect()))
        .collect();
    let doc = json!({
        "tool": "gooddeal",
        "version": crate::VERSION,
        "config_sha256": config_sha256,
        "table": table.name,
        "columns": table.columns,
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report document serializes");
    text.push('\n');
    text
}

/// Writes a table under `dir` as `<table name>.<ext>`, creating the
/// directory, and returns the file path.
///
/// # Errors
/// I/O failures surface as [`Error::Config`] with the path named.
pub fn write(table: &Table, dir: &Path, format: OutputFormat, config_sha256: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(format!("{}.{format}", table.name));
    let body = match format {
        OutputFormat::Csv => to_csv(table, config_sha256),
        OutputFormat::Json => to_json(table, config_sha256),
    };
    std::fs::write(&path, body)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Flattens a supermartingale run into a table: one row per
/// (prior, kernel, pair) cell with the sampling parameters echoed so the
/// file alone reproduces the run.
pub fn tracking_table(report: &TrackingReport) -> Table {
    let mut columns = vec![
        "prior", "kernel", "pair_start", "pair_end", "mean_increment", "std_error", "pass",
        "conditional_pass",
    ];
    let bucket_means: Vec<String> = (1..=crate::montecarlo::REGRESSION_BUCKETS)
        .map(|q| format!("bucket_mean_{q}"))
        .collect();
    let bucket_ses: Vec<String> = (1..=crate::montecarlo::REGRESSION_BUCKETS)
        .map(|q| format!("bucket_se_{q}"))
        .collect();
    columns.extend(bucket_means.iter().map(String::as_str));
    columns.extend(bucket_ses.iter().map(String::as_str));
    columns.extend(["n_paths", "n_steps", "seed", "hedge_multiplier"]);
    let mut table = Table::new("tracking", &columns);
    for cell in &report.cells {
        let mut row = vec![
            Cell::Int(cell.prior_index as i64),
            Cell::Int(cell.kernel_index as i64),
            Cell::Num(cell.pair.0),
            Cell::Num(cell.pair.1),
            Cell::Num(cell.mean_increment),
            Cell::Num(cell.std_error),
            Cell::Bool(cell.pass),
            Cell::Bool(cell.conditional_pass),
        ];
        row.extend(cell.bucket_means.iter().map(|&m| Cell::Num(m)));
        row.extend(cell.bucket_std_errors.iter().map(|&s| Cell::Num(s)));
        row.push(Cell::Int(report.n_paths as i64));
        row.push(Cell::Int(report.n_steps as i64));
        row.push(Cell::Int(report.seed as i64));
        row.push(Cell::Num(report.hedge_multiplier));
        table.push(row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("sample", &["name", "value", "ok"]);
        t.push(vec![
            Cell::Text("plain".into()),
            Cell::Num(1.5),
            Cell::Bool(true),
        ]);
        t.push(vec![
            Cell::Text("needs, \"quoting\"".into()),
            Cell::Num(-0.125),
            Cell::Bool(false),
        ]);
        t
    }

    #[test]
    fn csv_form_is_exact() {
        let expected = format!(
            "# gooddeal {} config_sha256=abc\r\nname,value,ok\r\nplain,1.5,true\r\n\"needs, \"\"quoting\"\"\",-0.125,false\r\n",
            crate::VERSION
        );
        assert_eq!(to_csv(&sample(), "abc"), expected);
    }

    #[test]
    fn json_is_tagged_and_deterministic() {
        let a = to_json(&sample(), "abc");
        let b = to_json(&sample(), "abc");
        assert_eq!(a, b);
        let doc: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(doc["tool"], "gooddeal");
        assert_eq!(doc["version"], crate::VERSION);
        assert_eq!(doc["config_sha256"], "abc");
        assert_eq!(doc["columns"][1], "value");
        assert_eq!(doc["rows"][0][1], 1.5);
        assert_eq!(doc["rows"][1][2], false);
    }

    #[test]
    fn write_is_byte_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let p1 = write(&sample(), dir.path(), format, "abc").unwrap();
            let first = std::fs::read(&p1).unwrap();
            let p2 = write(&sample(), dir.path(), format, "abc").unwrap();
            assert_eq!(p1, p2);
            assert_eq!(first, std::fs::read(&p2).unwrap());
        }
        assert!(dir.path().join("sample.csv").exists());
        assert!(dir.path().join("sample.json").exists());
    }

    #[test]
    fn tracking_table_echoes_parameters() {
        use crate::linalg::Vector;
        use crate::market::{NgdKernel, PriorSpec};
        use crate::markovian::PutScenario;

        let s = PutScenario::default();
        let market = s.to_market_spec().unwrap();
        let priors = vec![PriorSpec::new(&market, s.a_bar(), Vector::zeros(2)).unwrap()];
        let kernels = vec![NgdKernel::new(s.h, Vector::zeros(2)).unwrap()];
        let report = crate::montecarlo::supermartingale_test(
            &s,
            &priors,
            &kernels,
            &[(0.0, s.maturity)],
            200,
            8,
            1,
            1.0,
        )
        .unwrap();
        let table = tracking_table(&report);
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.columns.len(), 12 + 2 * crate::montecarlo::REGRESSION_BUCKETS);
        let csv = to_csv(&table, "deadbeef");
        assert!(csv.contains("mean_increment"));
        assert!(csv.contains("deadbeef"));
    }
}
