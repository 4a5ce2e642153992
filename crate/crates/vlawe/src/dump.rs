//! Text dump of encoded documents.
//!
//! The first line is a header of `key=value` pairs after a `#`; every other
//! line is `doc_id<TAB>v1 v2 ... vD`. Values are written in the shortest form
//! that parses back to the same `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Result, VlaweError};

#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub header: BTreeMap<String, String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl Dump {
    pub fn dim(&self) -> Option<usize> {
        self.rows.first().map(|(_, v)| v.len())
    }
}

pub fn render_row(id: &str, values: &[f64], out: &mut String) {
    out.push_str(id);
    out.push('\t');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        // a zero keeps its sign through Display, which is what we want
        write!(out, "{v}").unwrap();
    }
    out.push('\n');
}

pub fn write_dump(path: &Path, dump: &Dump) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| VlaweError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut line = String::from("#");
    for (k, v) in &dump.header {
        write!(line, " {k}={v}").unwrap();
    }
    line.push('\n');
    w.write_all(line.as_bytes())
        .map_err(|e| VlaweError::io(path, e))?;
    for (id, values) in &dump.rows {
        line.clear();
        render_row(id, values, &mut line);
        w.write_all(line.as_bytes())
            .map_err(|e| VlaweError::io(path, e))?;
    }
    w.flush().map_err(|e| VlaweError::io(path, e))
}

pub fn read_dump(path: &Path) -> Result<Dump> {
    let file = std::fs::File::open(path).map_err(|e| VlaweError::io(path, e))?;
    let line_err = |line: usize, message: String| VlaweError::Line {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut header = BTreeMap::new();
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| VlaweError::io(path, e))?;
        let lineno = n + 1;
        if let Some(h) = line.strip_prefix('#') {
            for pair in h.split_whitespace() {
                let (k, v) = pair
                    .split_once('=')
                    .ok_or_else(|| line_err(lineno, format!("bad header entry {pair:?}")))?;
                header.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        let (id, rest) = line
            .split_once('\t')
            .ok_or_else(|| line_err(lineno, "missing tab after document id".into()))?;
        let values = rest
            .split_ascii_whitespace()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| line_err(lineno, format!("invalid value {f:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some((_, first)) = rows.first() {
            let first: &Vec<f64> = first;
            if first.len() != values.len() {
                return Err(line_err(
                    lineno,
                    format!("expected {} values, found {}", first.len(), values.len()),
                ));
            }
        }
        rows.push((id.to_string(), values));
    }
    Ok(Dump { header, rows })
}
