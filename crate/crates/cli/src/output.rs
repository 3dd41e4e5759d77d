use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::args::Format;
use crate::Failure;

/// Scalar rows for csv and markdown. Decompositions stay JSON-only.
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: Vec<&'static str>) -> Self {
        Self { headers, rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.headers.len());
        self.rows.push(cells);
    }

    /// A two-column `field,value` table.
    pub fn fields(pairs: Vec<(&'static str, String)>) -> Self {
        let mut t = Table::new(vec!["field", "value"]);
        for (k, v) in pairs {
            t.row(vec![k.to_string(), v]);
        }
        t
    }

    fn csv(&self) -> Result<String, Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).map_err(Failure::io)?;
        for r in &self.rows {
            w.write_record(r).map_err(Failure::io)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 cells"))
    }

    fn markdown(&self) -> String {
        let esc = |s: &str| s.replace('|', "\\|");
        let mut s = format!("| {} |\n", self.headers.join(" | "));
        s += &format!("|{}\n", "---|".repeat(self.headers.len()));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| esc(c)).collect();
            s += &format!("| {} |\n", cells.join(" | "));
        }
        s
    }
}

pub fn num(x: f64) -> String {
    x.to_string()
}

/// Renders `value` (json) or `table` and writes it to `out` or stdout.
pub fn emit<T: Serialize>(value: &T, table: impl FnOnce() -> Table, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::usage(format!("serializing report: {e}")))?;
            s.push('\n');
            s
        }
        Format::Csv => table().csv()?,
        Format::Markdown => table().markdown(),
    };
    write_text(&text, out)
}

pub fn write_text(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(Failure::io)
        }
    }
}
