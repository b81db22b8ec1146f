//! Append-only, line-delimited JSON attempt log.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use parking_lot::Mutex;
use thiserror::Error;

use super::attempt::Attempt;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("attempt log {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("attempt log line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Parses a record stream. Blank lines are skipped.
pub fn read_records(reader: impl Read) -> Result<Vec<Attempt>, LogError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| LogError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| LogError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<Attempt>, LogError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| LogError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_records(file)
}

pub fn record_line(a: &Attempt) -> String {
    let mut line = serde_json::to_string(a).expect("attempts always serialize");
    line.push('\n');
    line
}

pub fn write_records<'a>(
    mut w: impl Write,
    records: impl IntoIterator<Item = &'a Attempt>,
) -> io::Result<()> {
    for r in records {
        w.write_all(record_line(r).as_bytes())?;
    }
    w.flush()
}

/// Open handle for appending. Each record goes out in a single write.
#[derive(Debug)]
pub struct AttemptLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl AttemptLog {
    /// Opens (creating if needed) the log at `path` and returns the records
    /// already in it.
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, Vec<Attempt>), LogError> {
        let path = path.as_ref().to_path_buf();
        let io_err = |source| LogError::Io {
            path: path.clone(),
            source,
        };
        let existing = if path.exists() {
            read_log(&path)?
        } else {
            Vec::new()
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err)?;
        Ok((
            Self {
                path,
                file: Mutex::new(file),
            },
            existing,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, a: &Attempt) -> Result<(), LogError> {
        let line = record_line(a);
        let mut f = self.file.lock();
        f.write_all(line.as_bytes())
            .and_then(|_| f.flush())
            .map_err(|source| LogError::Io {
                path: self.path.clone(),
                source,
            })
    }
}
