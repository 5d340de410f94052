//! Tabular reports rendered as CSV or JSON.

use nwpc_core::audit::AuditReport;
use nwpc_core::graph::VertexSet;
use nwpc_core::rational::{self, Rational};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(ToString::to_string).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Exact value followed by its decimal approximation, as two cells.
pub fn rat_cells(value: &Rational) -> [String; 2] {
    [rational::format(value), decimal(value)]
}

pub fn decimal(value: &Rational) -> String {
    format!("{:.6}", rational::to_f64(value))
}

pub fn set_cell(set: &VertexSet) -> String {
    let ids: Vec<String> = set.iter().map(|v| v.to_string()).collect();
    ids.join(" ")
}

pub fn audit_table(report: &AuditReport) -> Table {
    let mut t = Table::new("audit", &["check", "status", "iteration", "detail"]);
    for c in &report.checks {
        t.push(vec![
            c.name.clone(),
            if c.passed { "ok" } else { "FAIL" }.to_string(),
            c.iteration.map_or_else(String::new, |i| i.to_string()),
            c.detail.clone(),
        ]);
    }
    t
}

pub fn render(tables: &[Table], format: Format) -> String {
    match format {
        Format::Csv => render_csv(tables),
        Format::Json => render_json(tables),
    }
}

fn render_csv(tables: &[Table]) -> String {
    let mut out = String::new();
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# {}\n", t.name));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&t.columns).expect("in-memory write");
        for row in &t.rows {
            w.write_record(row).expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        out.push_str(&String::from_utf8(bytes).expect("utf-8 cells"));
    }
    out
}

fn render_json(tables: &[Table]) -> String {
    let mut doc = Map::new();
    for t in tables {
        let rows: Vec<Value> = t
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = t
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), Value::String(v.clone())))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        doc.insert(t.name.clone(), json!({ "columns": t.columns, "rows": rows }));
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_cells_with_commas() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec!["1,2".into(), "3".into()]);
        assert_eq!(render(&[t], Format::Csv), "# x\na,b\n\"1,2\",3\n");
    }

    #[test]
    fn json_keeps_column_list() {
        let mut t = Table::new("x", &["b", "a"]);
        t.push(vec!["1".into(), "2".into()]);
        let v: Value = serde_json::from_str(&render(&[t], Format::Json)).unwrap();
        assert_eq!(v["x"]["columns"], json!(["b", "a"]));
        assert_eq!(v["x"]["rows"][0]["a"], json!("2"));
    }

    #[test]
    fn rational_cells() {
        assert_eq!(rat_cells(&rational::ratio(7, 2)), ["7/2".to_string(), "3.500000".to_string()]);
    }
}
