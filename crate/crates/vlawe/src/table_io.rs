//! Text embedding tables: one `word v1 ... vd` row per line, fields separated
//! by ASCII whitespace.
//!
//! Some distributed tables contain rows whose word itself holds spaces (for
//! example `. . .`). Once the dimension is known, the last `d` fields are the
//! vector and everything before them is the word, provided none of the extra
//! leading fields parses as a number.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use vlawe_core::EmbeddingTable;

use crate::error::{Result, VlaweError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    /// Rows stored in the table.
    pub rows: usize,
    /// Rows whose word was already present; the first occurrence is kept.
    pub duplicates: usize,
    /// Well-formed rows left out by the vocabulary filter.
    pub filtered: usize,
}

pub fn load_table(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<EmbeddingTable> {
    load_table_filtered(path, expected_dim, None).map(|(t, _)| t)
}

/// Loads a table, keeping only the words in `keep` when given. Every line is
/// still validated.
pub fn load_table_filtered(
    path: impl AsRef<Path>,
    expected_dim: Option<usize>,
    keep: Option<&HashSet<String>>,
) -> Result<(EmbeddingTable, LoadStats)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| VlaweError::io(path, e))?;
    read_table(
        BufReader::with_capacity(1 << 20, file),
        path,
        expected_dim,
        keep,
    )
}

pub fn read_table<R: BufRead>(
    mut reader: R,
    path: &Path,
    expected_dim: Option<usize>,
    keep: Option<&HashSet<String>>,
) -> Result<(EmbeddingTable, LoadStats)> {
    if expected_dim == Some(0) {
        return Err(VlaweError::Usage(
            "expected embedding dimension must be positive".into(),
        ));
    }
    let line_err = |line: usize, message: String| VlaweError::Line {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut table: Option<EmbeddingTable> = None;
    let mut stats = LoadStats::default();
    let mut buf = String::new();
    let mut vector: Vec<f32> = Vec::new();
    let mut lineno = 0;
    loop {
        buf.clear();
        let read = reader
            .read_line(&mut buf)
            .map_err(|e| VlaweError::io(path, e))?;
        if read == 0 {
            break;
        }
        lineno += 1;
        let line = buf.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_ascii_whitespace().collect();

        let dim = match (&table, expected_dim) {
            (Some(t), _) => t.dim(),
            (None, Some(d)) => d,
            (None, None) => {
                if fields.len() < 2 {
                    return Err(line_err(lineno, "row has no vector components".into()));
                }
                fields.len() - 1
            }
        };
        if fields.len() < dim + 1 {
            return Err(line_err(
                lineno,
                format!(
                    "expected {dim} vector components, found {}",
                    fields.len().saturating_sub(1)
                ),
            ));
        }
        let word_end = fields.len() - dim;
        if fields[1..word_end].iter().any(|f| f.parse::<f32>().is_ok()) {
            return Err(line_err(
                lineno,
                format!(
                    "expected {dim} vector components, found {}",
                    fields.len() - 1
                ),
            ));
        }
        let word = if word_end == 1 {
            fields[0].to_string()
        } else {
            fields[..word_end].join(" ")
        };
        let t =
            table.get_or_insert_with(|| EmbeddingTable::new(dim).expect("dimension is positive"));

        let wanted = keep.is_none_or(|k| k.contains(&word));
        if !wanted {
            stats.filtered += 1;
            continue;
        }
        vector.clear();
        for f in &fields[word_end..] {
            let v: f32 = f
                .parse()
                .map_err(|_| line_err(lineno, format!("invalid vector component {f:?}")))?;
            if !v.is_finite() {
                return Err(line_err(
                    lineno,
                    format!("non-finite vector component {f:?}"),
                ));
            }
            vector.push(v);
        }
        if t.insert(&word, &vector)? {
            stats.rows += 1;
        } else {
            stats.duplicates += 1;
        }
    }

    match table {
        Some(t) => Ok((t, stats)),
        None => Err(VlaweError::format(path, "embedding file is empty")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn read(text: &str, dim: Option<usize>) -> Result<(EmbeddingTable, LoadStats)> {
        read_table(Cursor::new(text), Path::new("t.txt"), dim, None)
    }

    #[test]
    fn parses_rows() {
        let (t, s) = read("cat 0.1 0.2 0.3\ndog 1 2 3\n", None).unwrap();
        assert_eq!((t.len(), t.dim()), (2, 3));
        assert_eq!(t.get("dog").unwrap(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.rows, 2);
    }

    #[test]
    fn short_row_against_expected_dim() {
        let err = read("cat 0.1 0.2\n", Some(3)).unwrap_err();
        match err {
            VlaweError::Line { line, message, .. } => {
                assert_eq!(line, 1);
                assert!(message.contains("expected 3"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_rows_name_their_line() {
        assert!(matches!(
            read("a 1 2\nb 1 2 3\n", None),
            Err(VlaweError::Line { line: 2, .. })
        ));
        assert!(matches!(
            read("a 1 2\nb 1 x\n", None),
            Err(VlaweError::Line { line: 2, .. })
        ));
        assert!(matches!(
            read("a 1 2\nb 1\n", None),
            Err(VlaweError::Line { line: 2, .. })
        ));
        assert!(matches!(
            read("a\n", None),
            Err(VlaweError::Line { line: 1, .. })
        ));
        assert!(matches!(
            read("a 1 nan\n", None),
            Err(VlaweError::Line { line: 1, .. })
        ));
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(read("", None), Err(VlaweError::Format { .. })));
        assert!(matches!(
            read("\n\n", Some(3)),
            Err(VlaweError::Format { .. })
        ));
    }

    #[test]
    fn phrase_rows_and_duplicates() {
        let (t, s) = read("a 1 2\n. . . 3 4\na 9 9\n", None).unwrap();
        assert_eq!(t.get(". . .").unwrap(), &[3.0, 4.0]);
        assert_eq!(t.get("a").unwrap(), &[1.0, 2.0]);
        assert_eq!((s.rows, s.duplicates), (2, 1));
    }

    #[test]
    fn vocabulary_filter() {
        let keep: HashSet<String> = ["b".to_string()].into_iter().collect();
        let (t, s) = read_table(
            Cursor::new("a 1 2\nb 3 4\n"),
            Path::new("t"),
            None,
            Some(&keep),
        )
        .unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.contains("b"));
        assert_eq!(s.filtered, 1);
    }
}
