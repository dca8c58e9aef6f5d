//! On-disk record files.
//!
//! A record file is a UTF-8 sequence of JSON arrays separated by newlines,
//! one array per flushed batch, each object holding the data of one request
//! or one layer pass. The trailing newline doubles as the commit marker: a
//! reader ignores an unterminated final line, so a crash mid-append never
//! exposes a partial array.

use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::record::{record_from_value, serialize_record_into, RecordError, TelemetryRecord};

#[derive(Debug, Error)]
pub enum RecordFileError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {source}")]
    Record {
        path: PathBuf,
        line: usize,
        #[source]
        source: RecordError,
    },
    #[error("{path} line {line}: committed line is not a JSON array")]
    NotAnArray { path: PathBuf, line: usize },
}

/// Serialize `records` as one JSON array and append it to `path` as a single
/// newline-terminated line. Returns the number of bytes written.
pub fn append_array(path: &Path, records: &[TelemetryRecord]) -> Result<u64, RecordFileError> {
    let mut writer = RecordFileWriter::open(path)?;
    writer.append_array(records)
}

/// Append-only handle for one record file; keeps the file open across
/// flushes.
pub struct RecordFileWriter {
    path: PathBuf,
    file: File,
    buf: String,
}

impl RecordFileWriter {
    pub fn open(path: &Path) -> Result<Self, RecordFileError> {
        let io_err = |e| RecordFileError::Io { path: path.to_path_buf(), source: e };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io_err)?;
        }
        let mut file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(path)
            .map_err(io_err)?;
        // A crash can leave an unterminated tail behind. Seal it with a
        // newline so the torn segment stays an isolated (skipped) line
        // instead of corrupting the next append.
        let len = file.metadata().map_err(io_err)?.len();
        if len > 0 {
            use std::io::{Seek, SeekFrom};
            let mut last = [0u8; 1];
            file.seek(SeekFrom::End(-1)).map_err(io_err)?;
            file.read_exact(&mut last).map_err(io_err)?;
            if last[0] != b'\n' {
                file.write_all(b"\n").map_err(io_err)?;
            }
        }
        Ok(RecordFileWriter { path: path.to_path_buf(), file, buf: String::new() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Append one batch. `records` must be non-empty; empty batches are a
    /// caller bug and are rejected to keep the "no empty arrays" guarantee.
    pub fn append_array(&mut self, records: &[TelemetryRecord]) -> Result<u64, RecordFileError> {
        assert!(!records.is_empty(), "refusing to append an empty array");
        self.buf.clear();
        self.buf.push('[');
        for (i, rec) in records.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            serialize_record_into(rec, &mut self.buf).map_err(|e| RecordFileError::Record {
                path: self.path.clone(),
                line: 0,
                source: e,
            })?;
        }
        self.buf.push_str("]\n");
        self.file
            .write_all(self.buf.as_bytes())
            .map_err(|e| RecordFileError::Io { path: self.path.clone(), source: e })?;
        Ok(self.buf.len() as u64)
    }
}

/// Read every committed array from a record file.
///
/// Torn segments — an unterminated final line, or a sealed line left behind
/// by a crashed append — are skipped, so a reader always sees whole arrays.
/// Use [`read_record_arrays_strict`] to assert a file with no such damage.
pub fn read_record_arrays(path: &Path) -> Result<Vec<Vec<TelemetryRecord>>, RecordFileError> {
    read_arrays(path, false)
}

/// As [`read_record_arrays`], but any committed line that fails to parse is
/// an error. Fault-free runs must pass this.
pub fn read_record_arrays_strict(
    path: &Path,
) -> Result<Vec<Vec<TelemetryRecord>>, RecordFileError> {
    read_arrays(path, true)
}

fn read_arrays(path: &Path, strict: bool) -> Result<Vec<Vec<TelemetryRecord>>, RecordFileError> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| RecordFileError::Io { path: path.to_path_buf(), source: e })?;

    let mut arrays = Vec::new();
    let mut rest = text.as_str();
    let mut line_no = 0;
    while let Some(nl) = rest.find('\n') {
        line_no += 1;
        let line = &rest[..nl];
        rest = &rest[nl + 1..];
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Result<Vec<TelemetryRecord>, RecordFileError> = (|| {
            let value: serde_json::Value = serde_json::from_str(line).map_err(|e| {
                RecordFileError::Record {
                    path: path.to_path_buf(),
                    line: line_no,
                    source: RecordError::MalformedJson(e.to_string()),
                }
            })?;
            let serde_json::Value::Array(items) = value else {
                return Err(RecordFileError::NotAnArray {
                    path: path.to_path_buf(),
                    line: line_no,
                });
            };
            items
                .into_iter()
                .map(|item| {
                    record_from_value(item).map_err(|e| RecordFileError::Record {
                        path: path.to_path_buf(),
                        line: line_no,
                        source: e,
                    })
                })
                .collect()
        })();
        match parsed {
            Ok(records) => arrays.push(records),
            Err(e) if strict => return Err(e),
            Err(_) => {} // torn segment from a crashed append
        }
    }
    // Anything after the last newline is an uncommitted tail; ignore it.
    Ok(arrays)
}

/// Convenience: all committed records of a file, flattened in append order.
pub fn read_records_flat(path: &Path) -> Result<Vec<TelemetryRecord>, RecordFileError> {
    Ok(read_record_arrays(path)?.into_iter().flatten().collect())
}
