//! Watch-log validation and the JSON Lines log format.
//!
//! A run log is one header record followed by one record per watch event:
//!
//! ```text
//! {"record":"run","run_id":"w00-b00","week":0,"condition":{"state":"new_york","leaning":"democrat"},"conditioning_count":2,"status":"completed"}
//! {"record":"event","run_id":"w00-b00","video_id":"v000017","virtual_time":0,"stage":"conditioning","ordinal":0}
//! ```

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{ExperimentCondition, ExperimentRun, Leaning, ModelError, RunId, RunStatus, Stage, VideoId, WatchEvent};

/// Protocol caps a log is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogLimits {
    pub conditioning_cap: u32,
    pub recommendation_cap: u32,
}

impl Default for LogLimits {
    fn default() -> Self {
        Self {
            conditioning_cap: 400,
            recommendation_cap: 1200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ForeignEvent { index: usize, run_id: RunId },
    OrdinalNotIncreasing { index: usize, stage: Stage },
    TimeWentBackwards { index: usize },
    StageOrder { index: usize },
    ConditioningCapExceeded { count: u32, cap: u32 },
    RecommendationCapExceeded { count: usize, cap: u32 },
    ControlConditioned { count: u32 },
    ConditioningCountMismatch { declared: u32, logged: usize },
    UnknownVideo { index: usize, video_id: VideoId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ForeignEvent { index, run_id } => {
                write!(f, "event {index} belongs to run {run_id}")
            }
            Violation::OrdinalNotIncreasing { index, stage } => {
                write!(f, "event {index}: {stage:?} ordinals not strictly increasing")
            }
            Violation::TimeWentBackwards { index } => {
                write!(f, "event {index}: virtual time decreased")
            }
            Violation::StageOrder { index } => {
                write!(f, "event {index}: conditioning watch after recommendation began")
            }
            Violation::ConditioningCapExceeded { count, cap } => {
                write!(f, "conditioning cap exceeded ({count} > {cap})")
            }
            Violation::RecommendationCapExceeded { count, cap } => {
                write!(f, "recommendation cap exceeded ({count} > {cap})")
            }
            Violation::ControlConditioned { count } => {
                write!(f, "control must skip conditioning (conditioning_count = {count})")
            }
            Violation::ConditioningCountMismatch { declared, logged } => {
                write!(f, "conditioning_count {declared} but {logged} conditioning events logged")
            }
            Violation::UnknownVideo { index, video_id } => {
                write!(f, "event {index}: unknown video {video_id}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| v.to_string()).collect()
    }
}

/// Lists every invariant the run breaks. An empty report means the log is
/// well formed; violations are data, never errors.
pub fn validate_watch_log(run: &ExperimentRun, known_videos: Option<&HashSet<VideoId>>, limits: LogLimits) -> ValidationReport {
    let mut violations = Vec::new();
    let mut last_ordinal: [Option<u32>; 2] = [None, None];
    let mut last_time: Option<u64> = None;
    let mut seen_recommendation = false;
    let mut logged_conditioning = 0usize;

    for (index, event) in run.events.iter().enumerate() {
        if event.run_id != run.run_id {
            violations.push(Violation::ForeignEvent {
                index,
                run_id: event.run_id.clone(),
            });
        }
        let slot = match event.stage {
            Stage::Conditioning => {
                logged_conditioning += 1;
                if seen_recommendation {
                    violations.push(Violation::StageOrder { index });
                }
                0
            }
            Stage::Recommendation => {
                seen_recommendation = true;
                1
            }
        };
        if let Some(prev) = last_ordinal[slot] {
            if event.ordinal <= prev {
                violations.push(Violation::OrdinalNotIncreasing { index, stage: event.stage });
            }
        }
        last_ordinal[slot] = Some(event.ordinal);
        if let Some(prev) = last_time {
            if event.virtual_time < prev {
                violations.push(Violation::TimeWentBackwards { index });
            }
        }
        last_time = Some(event.virtual_time);
        if let Some(known) = known_videos {
            if !known.contains(&event.video_id) {
                violations.push(Violation::UnknownVideo {
                    index,
                    video_id: event.video_id.clone(),
                });
            }
        }
    }

    if run.conditioning_count > limits.conditioning_cap {
        violations.push(Violation::ConditioningCapExceeded {
            count: run.conditioning_count,
            cap: limits.conditioning_cap,
        });
    }
    if run.conditioning_count as usize != logged_conditioning {
        violations.push(Violation::ConditioningCountMismatch {
            declared: run.conditioning_count,
            logged: logged_conditioning,
        });
    }
    let recs = run.events.len() - logged_conditioning;
    if recs > limits.recommendation_cap as usize {
        violations.push(Violation::RecommendationCapExceeded {
            count: recs,
            cap: limits.recommendation_cap,
        });
    }
    if run.condition.leaning == Leaning::NeutralControl && run.conditioning_count > 0 {
        violations.push(Violation::ControlConditioned {
            count: run.conditioning_count,
        });
    }
    ValidationReport { violations }
}

/// Header record of a run log: everything in [`ExperimentRun`] except the events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunHeader {
    pub run_id: RunId,
    pub week: u32,
    pub condition: ExperimentCondition,
    pub conditioning_count: u32,
    pub status: RunStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Run(RunHeader),
    Event(WatchEvent),
}

pub fn write_run_jsonl<W: Write>(run: &ExperimentRun, mut out: W) -> Result<(), ModelError> {
    let header = LogRecord::Run(RunHeader {
        run_id: run.run_id.clone(),
        week: run.week,
        condition: run.condition,
        conditioning_count: run.conditioning_count,
        status: run.status,
    });
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for event in &run.events {
        // LogRecord::Event would clone; serialize through a borrowed twin instead
        #[derive(Serialize)]
        #[serde(tag = "record", rename = "event")]
        struct EventRef<'a> {
            #[serde(flatten)]
            event: &'a WatchEvent,
        }
        serde_json::to_writer(&mut out, &EventRef { event })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn run_to_jsonl_bytes(run: &ExperimentRun) -> Vec<u8> {
    let mut buf = Vec::with_capacity(run.events.len() * 110 + 200);
    write_run_jsonl(run, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub fn read_run_jsonl<R: BufRead>(input: R) -> Result<ExperimentRun, ModelError> {
    let mut header: Option<RunHeader> = None;
    let mut events = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: LogRecord = serde_json::from_str(&line).map_err(|e| ModelError::Format {
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        match record {
            LogRecord::Run(h) => {
                if header.is_some() {
                    return Err(ModelError::Format {
                        line: lineno + 1,
                        reason: "second run header".into(),
                    });
                }
                header = Some(h);
            }
            LogRecord::Event(e) => {
                if header.is_none() {
                    return Err(ModelError::Format {
                        line: lineno + 1,
                        reason: "event before run header".into(),
                    });
                }
                events.push(e);
            }
        }
    }
    let h = header.ok_or(ModelError::Format {
        line: 0,
        reason: "missing run header".into(),
    })?;
    Ok(ExperimentRun {
        run_id: h.run_id,
        week: h.week,
        condition: h.condition,
        conditioning_count: h.conditioning_count,
        events,
        status: h.status,
    })
}
