//! Append-only match logs and replay.
//!
//! One JSON document per line: `{"seq":1,"wall_time":"...","event":{...},"aux":{...}}`.
//! Sequence numbers are dense from 1. Every append is flushed and synced
//! before it returns.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{GameConfig, GameError, GameEvent, GameState};

/// Default directory for match logs.
pub const DEFAULT_LOG_DIR: &str = "GameLogs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub seq: u64,
    /// RFC 3339, UTC.
    pub wall_time: String,
    pub event: GameEvent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux: Option<BTreeMap<String, serde_json::Value>>,
}

impl LogRecord {
    pub fn wall_time(&self) -> Option<DateTime<Utc>> {
        DateTime::parse_from_rfc3339(&self.wall_time)
            .ok()
            .map(|t| t.with_timezone(&Utc))
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log i/o failed: {0}")]
    Io(#[from] io::Error),
    #[error("log is closed")]
    Closed,
    #[error("record has seq {got}, expected {expected}")]
    OutOfSequence { expected: u64, got: u64 },
    #[error("corrupt record on line {line}: {reason}")]
    CorruptRecord { line: usize, reason: String },
    #[error("illegal event at seq {seq}: {source}")]
    IllegalEvent { seq: u64, source: GameError },
    #[error("cannot start replay: {0}")]
    Config(GameError),
}

impl LogError {
    /// True for failures of the underlying file, including use after close.
    pub fn is_io(&self) -> bool {
        matches!(self, LogError::Io(_) | LogError::Closed)
    }
}

/// Writer for one match's log file.
#[derive(Debug)]
pub struct MatchLog {
    path: PathBuf,
    file: Option<File>,
    next_seq: u64,
}

/// `<dir>/<room_code>-<YYYY-MM-DD>.log`, with `-2`, `-3`... appended when taken.
pub fn log_file_path(dir: &Path, room_code: &str, date: chrono::NaiveDate) -> PathBuf {
    let stem = format!("{room_code}-{}", date.format("%Y-%m-%d"));
    let mut path = dir.join(format!("{stem}.log"));
    let mut n = 2;
    while path.exists() {
        path = dir.join(format!("{stem}-{n}.log"));
        n += 1;
    }
    path
}

impl MatchLog {
    /// Creates a fresh log for `room_code` under `dir`, creating the directory.
    pub fn create(dir: impl AsRef<Path>, room_code: &str) -> Result<Self, LogError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let path = log_file_path(dir, room_code, Utc::now().date_naive());
        Self::create_at(path)
    }

    pub fn create_at(path: impl Into<PathBuf>) -> Result<Self, LogError> {
        let path = path.into();
        let file = OpenOptions::new().write(true).create_new(true).open(&path)?;
        Ok(Self { path, file: Some(file), next_seq: 1 })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    /// Stamps `event` with the next seq and the current time and appends it.
    pub fn append_event(
        &mut self,
        event: GameEvent,
        aux: Option<BTreeMap<String, serde_json::Value>>,
    ) -> Result<LogRecord, LogError> {
        let record = LogRecord {
            seq: self.next_seq,
            wall_time: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            event,
            aux,
        };
        self.append(&record)?;
        Ok(record)
    }

    /// Appends a prepared record; its seq must be the next one.
    pub fn append(&mut self, record: &LogRecord) -> Result<(), LogError> {
        let file = self.file.as_mut().ok_or(LogError::Closed)?;
        if record.seq != self.next_seq {
            return Err(LogError::OutOfSequence { expected: self.next_seq, got: record.seq });
        }
        let mut line = serde_json::to_string(record).map_err(io::Error::other)?;
        line.push('\n');
        file.write_all(line.as_bytes())?;
        file.flush()?;
        file.sync_data()?;
        self.next_seq += 1;
        Ok(())
    }

    pub fn close(&mut self) -> Result<(), LogError> {
        if let Some(file) = self.file.take() {
            file.sync_all()?;
        }
        Ok(())
    }

    pub fn is_closed(&self) -> bool {
        self.file.is_none()
    }
}

/// Reads every record, checking per-line syntax and seq density.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<LogRecord>, LogError> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: LogRecord = serde_json::from_str(&line)
            .map_err(|e| LogError::CorruptRecord { line: line_no, reason: e.to_string() })?;
        let expected = records.len() as u64 + 1;
        if record.seq != expected {
            return Err(LogError::CorruptRecord {
                line: line_no,
                reason: format!("seq {} where {expected} was expected", record.seq),
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Rebuilds the final state of the match recorded at `path`.
pub fn replay(path: impl AsRef<Path>, config: impl Into<Arc<GameConfig>>) -> Result<GameState, LogError> {
    let records = read_records(path)?;
    replay_records(&records, config)
}

pub fn replay_records(
    records: &[LogRecord],
    config: impl Into<Arc<GameConfig>>,
) -> Result<GameState, LogError> {
    let mut state = GameState::new(config).map_err(LogError::Config)?;
    for record in records {
        state
            .apply_mut(&record.event, record.wall_time())
            .map_err(|source| LogError::IllegalEvent { seq: record.seq, source })?;
    }
    Ok(state)
}
