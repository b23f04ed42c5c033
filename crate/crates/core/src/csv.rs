//! Minimal CSV conventions shared by every table this crate writes.
//!
//! Every file starts with a `# schema=1` comment line followed by a header
//! row. Model outputs are written with 9 significant digits.

use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};

pub const SCHEMA_LINE: &str = "# schema=1";

/// Formats a float with 9 significant digits.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_header<W: Write>(w: &mut W, columns: &[&str]) -> io::Result<()> {
    writeln!(w, "{SCHEMA_LINE}")?;
    writeln!(w, "{}", columns.join(","))
}

/// Reads a schema-1 table, returning its header and the data rows split on
/// commas. Blank lines are skipped.
pub fn read_table<R: BufRead>(r: R) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = r.lines();
    let first = lines.next().transpose()?.ok_or_else(|| Error::Parse("empty file".into()))?;
    if first.trim() != SCHEMA_LINE {
        return Err(Error::Parse(format!("expected `{SCHEMA_LINE}`, found `{first}`")));
    }
    let header = lines.next().transpose()?.ok_or_else(|| Error::Parse("missing header row".into()))?;
    let header: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if row.len() != header.len() {
            return Err(Error::Parse(format!(
                "row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}
