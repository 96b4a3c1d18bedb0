//! Domain types shared by every other module: stance labels and their party
//! alignment, video and channel records, experiment runs and their watch logs.

mod engagement;
mod types;
mod watch_log;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use engagement::{derived_from_counts, derived_metrics, DerivedEngagement};
pub use types::*;
pub use watch_log::{
    read_run_jsonl, run_to_jsonl_bytes, validate_watch_log, write_run_jsonl, LogLimits, LogRecord, RunHeader,
    ValidationReport, Violation,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid engagement counters: shares ({shares}) exceed plays ({plays})")]
    InvalidEngagement { plays: u64, shares: u64 },
    #[error("invalid video {video_id}: {reason}")]
    InvalidVideo { video_id: String, reason: String },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("malformed record at line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum PoolRecord {
    Channel(ChannelRecord),
    Video(VideoRecord),
}

/// Writes channels then videos, one JSON object per line.
pub fn write_pool_jsonl<W: Write>(videos: &[VideoRecord], channels: &[ChannelRecord], mut out: W) -> Result<(), ModelError> {
    for c in channels {
        serde_json::to_writer(&mut out, &PoolRecord::Channel(c.clone()))?;
        out.write_all(b"\n")?;
    }
    for v in videos {
        serde_json::to_writer(&mut out, &PoolRecord::Video(v.clone()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a pool export, validating each video. Shares above plays are
/// rejected rather than clamped.
pub fn read_pool_jsonl<R: BufRead>(input: R) -> Result<(Vec<VideoRecord>, Vec<ChannelRecord>), ModelError> {
    let mut videos = Vec::new();
    let mut channels = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PoolRecord = serde_json::from_str(&line).map_err(|e| ModelError::Format {
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        match record {
            PoolRecord::Channel(c) => channels.push(c),
            PoolRecord::Video(v) => {
                v.validate()?;
                videos.push(v);
            }
        }
    }
    Ok((videos, channels))
}
