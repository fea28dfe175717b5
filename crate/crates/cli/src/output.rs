//! Writing artifacts: pretty JSON and CSV with fixed-precision numbers.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use zeno_core::format::sig17;

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

/// CSV table builder; numbers are written with 17 significant digits.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
    comments: String,
}

pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Self { writer, comments: String::new() }
    }

    /// Adds a `# key=value ...` line above the header.
    pub fn comment(&mut self, line: &str) {
        self.comments.push_str("# ");
        self.comments.push_str(line);
        self.comments.push('\n');
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        let rec: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::Num(x) => sig17(x),
                Cell::Int(i) => i.to_string(),
                Cell::Text(t) => t,
                Cell::Empty => String::new(),
            })
            .collect();
        self.writer.write_record(&rec).expect("writing to memory");
    }

    pub fn finish(self) -> String {
        let body = String::from_utf8(self.writer.into_inner().expect("flushing to memory")).expect("utf-8 output");
        format!("{}{}", self.comments, body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_formats_numbers_and_comments() {
        let mut t = Table::new(&["s", "f", "note"]);
        t.comment("kind=trace");
        t.row(vec![0.1.into(), Cell::Empty, "a,b".into()]);
        t.row(vec![1.0.into(), 3usize.into(), "x".into()]);
        assert_eq!(
            t.finish(),
            "# kind=trace\ns,f,note\n1.0000000000000001e-1,,\"a,b\"\n1.0000000000000000e0,3,x\n"
        );
    }
}
