use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::DatasetError;

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Reads one JSON value per line. Blank lines are skipped; any other
/// unparsable line is an error naming its line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(row);
    }
    Ok(out)
}

fn write_rows<T: Serialize>(w: &mut impl Write, rows: &[T]) -> std::io::Result<()> {
    for row in rows {
        serde_json::to_writer(&mut *w, row)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), DatasetError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    write_rows(&mut BufWriter::new(file), rows).map_err(io_err(path))
}

pub fn append_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), DatasetError> {
    let file = OpenOptions::new().create(true).append(true).open(path).map_err(io_err(path))?;
    write_rows(&mut BufWriter::new(file), rows).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::test_support::example;
    use crate::dataset::ClueInstructExample;

    #[test]
    fn round_trip_and_append() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/corpus.jsonl");
        let rows = vec![example(1, "Science"), example(2, "Games")];
        write_jsonl(&path, &rows).unwrap();
        append_jsonl(&path, &[example(3, "Music")]).unwrap();
        let back: Vec<ClueInstructExample> = read_jsonl(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[..2], rows[..]);
    }

    #[test]
    fn bad_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        std::fs::write(&path, "{\"a\":1}\n\nnot json\n").unwrap();
        let err = read_jsonl::<serde_json::Value>(&path).unwrap_err();
        assert!(matches!(err, DatasetError::Parse { line: 3, .. }), "{err}");
    }
}
