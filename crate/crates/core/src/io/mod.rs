//! File formats: benchmark and prediction JSONL, caption records, the
//! embedding sidecar, and evaluation reports.
//!
//! Parsing is line-streaming. Every failure carries the 1-based line number
//! and, where it applies, the path of the offending field.

mod benchmark;
mod captions;
mod embeddings;
mod json;
mod predictions;
pub mod report;

pub use benchmark::{parse_benchmark, read_benchmark, write_benchmark, write_benchmark_file};
pub use captions::{parse_captions, parse_representatives, read_captions, read_representatives};
pub use embeddings::{attach_embeddings, read_embeddings, write_embeddings, EMBEDDING_MAGIC};
pub use predictions::{parse_predictions, read_predictions, write_predictions};
pub use report::{write_report, ReportFormat};

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {}{message}", field.as_deref().map(|f| format!("{f}: ")).unwrap_or_default())]
    Parse {
        line: usize,
        field: Option<String>,
        message: String,
    },
    #[error("line {line}: duplicate {key} (first seen on line {first_line})")]
    Duplicate {
        line: usize,
        first_line: usize,
        key: String,
    },
    #[error("embedding sidecar: {0}")]
    Embedding(String),
}

impl IoError {
    pub(crate) fn parse(line: usize, field: impl Into<Option<String>>, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>, IoError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| IoError::io(path, e))
}

/// Calls `f` with every non-blank line and its 1-based number.
pub(crate) fn for_each_line<R: BufRead>(
    mut reader: R,
    mut f: impl FnMut(usize, &str) -> Result<(), IoError>,
) -> Result<(), IoError> {
    let mut buf = String::new();
    let mut line_no = 0usize;
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf).map_err(|e| {
            IoError::parse(line_no + 1, None, format!("unreadable input: {e}"))
        })?;
        if n == 0 {
            return Ok(());
        }
        line_no += 1;
        let line = buf.trim();
        if line.is_empty() {
            continue;
        }
        f(line_no, line)?;
    }
}
