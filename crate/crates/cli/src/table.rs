//! Flat result tables with deterministic CSV and JSON rendering.
//!
//! Floats are printed with 12 significant digits in scientific notation,
//! identically in both formats, so re-running a campaign under any worker
//! count reproduces the output byte for byte.

use std::io::Write;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    UInt(u64),
    Float(f64),
    Str(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Str(s) => csv_quote(s),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Str(s) => json_quote(s),
            Cell::Empty => "null".to_string(),
        }
    }
}

/// 12 significant digits, scientific notation. `{:.11e}` is locale-free
/// and platform-stable.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// A header plus rows of cells; every row must match the header length.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn write(&self, out: &mut dyn Write, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "[")?;
        for (i, row) in self.rows.iter().enumerate() {
            let fields: Vec<String> = self
                .header
                .iter()
                .zip(row)
                .map(|(name, cell)| format!("{}: {}", json_quote(name), cell.json()))
                .collect();
            let sep = if i + 1 < self.rows.len() { "," } else { "" };
            writeln!(out, "  {{{}}}{}", fields.join(", "), sep)?;
        }
        writeln!(out, "]")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting_and_floats() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![Cell::Str("x,y".into()), Cell::Float(0.5)]);
        let mut buf = Vec::new();
        t.write(&mut buf, Format::Csv).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "a,b\n\"x,y\",5.00000000000e-1\n");
    }

    #[test]
    fn json_mirrors_rows() {
        let mut t = Table::new(vec!["n", "v"]);
        t.push(vec![Cell::UInt(7), Cell::Empty]);
        let mut buf = Vec::new();
        t.write(&mut buf, Format::Json).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("\"n\": 7"));
        assert!(s.contains("\"v\": null"));
    }
}
