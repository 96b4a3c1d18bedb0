//! The audit protocol: weekly cohorts of bots, a conditioning stage, an
//! hourly-batched recommendation stage, injected failures, and the
//! pair-matching rule that decides which runs enter the analysis.
//!
//! The virtual clock counts seconds from campaign start. Week `w` starts at
//! `w * 7 * 86400`.

mod pairing;
mod run;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ExperimentCondition, Leaning, RunId, UsState};
use crate::seed::run_seed;
use crate::sim::SimError;

pub use pairing::{pair_campaign, pair_match, truncated_recommendations, Exclusion, MatchedPair, PairingOutcome};
pub use run::{execute_run, run_campaign, run_conditioning, run_recommendation, Campaign, InjectedFailure};

pub const SECS_PER_HOUR: u64 = 3_600;
pub const SECS_PER_DAY: u64 = 86_400;
pub const SECS_PER_WEEK: u64 = 7 * SECS_PER_DAY;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid campaign spec: {0}")]
    InvalidSpec(String),
    #[error("{leaning:?} conditioning needs {needed} aligned channels, the pool has {available}")]
    InsufficientChannels {
        leaning: Leaning,
        needed: usize,
        available: usize,
    },
    #[error("control runs skip conditioning")]
    ControlConditioning,
    #[error(transparent)]
    Platform(#[from] SimError),
    #[error("worker pool: {0}")]
    WorkerPool(String),
}

/// Independent per-run failures. A failing run stops at a batch chosen
/// uniformly from those it would otherwise have reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureModel {
    pub probability: f64,
    /// Share of failures that are bot detections; the rest are network failures.
    pub bot_detection_share: f64,
}

impl Default for FailureModel {
    fn default() -> Self {
        Self {
            probability: 0.3,
            bot_detection_share: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub weeks: u32,
    pub bots_per_week: u32,
    pub conditions: Vec<(ExperimentCondition, u32)>,
    pub conditioning_channels_per_run: usize,
    pub videos_per_channel: usize,
    pub conditioning_watch_secs: u64,
    /// Pause between the end of conditioning and the first recommendation batch.
    pub post_conditioning_pause_secs: u64,
    pub rec_batch_size: usize,
    pub rec_watch_secs: u64,
    pub rec_window_days: u64,
    pub rec_cap: usize,
    pub failure_model: FailureModel,
    pub min_pair_length: usize,
}

impl Default for CampaignSpec {
    fn default() -> Self {
        let mut conditions = Vec::new();
        for state in UsState::ALL {
            conditions.push((ExperimentCondition::new(state, Leaning::Democrat), 3));
            conditions.push((ExperimentCondition::new(state, Leaning::Republican), 3));
        }
        conditions.push((ExperimentCondition::new(UsState::Georgia, Leaning::NeutralControl), 3));
        Self {
            weeks: 27,
            bots_per_week: 21,
            conditions,
            conditioning_channels_per_run: 8,
            videos_per_channel: 50,
            conditioning_watch_secs: 60,
            post_conditioning_pause_secs: SECS_PER_DAY,
            rec_batch_size: 10,
            rec_watch_secs: 10,
            rec_window_days: 6,
            rec_cap: 1200,
            failure_model: FailureModel::default(),
            min_pair_length: 150,
        }
    }
}

impl CampaignSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidSpec(m));
        let total: u32 = self.conditions.iter().map(|(_, r)| r).sum();
        if total != self.bots_per_week {
            return bad(format!("replicates sum to {total}, bots_per_week is {}", self.bots_per_week));
        }
        if self.rec_batch_size == 0 {
            return bad("rec_batch_size must be at least 1".into());
        }
        if self.rec_batch_size as u64 * self.rec_watch_secs > SECS_PER_HOUR {
            return bad("a batch of watches must fit in one hour".into());
        }
        if self.conditioning_channels_per_run == 0 {
            return bad("conditioning_channels_per_run must be at least 1".into());
        }
        let fm = self.failure_model;
        if !(0.0..=1.0).contains(&fm.probability) || !(0.0..=1.0).contains(&fm.bot_detection_share) {
            return bad("failure probabilities must be in [0, 1]".into());
        }
        Ok(())
    }

    /// Hourly batches in the recommendation window.
    pub fn window_batches(&self) -> usize {
        (self.rec_window_days * 24) as usize
    }

    /// Batches a run reaches before the cap or the window ends.
    pub fn effective_batches(&self) -> usize {
        self.window_batches().min(self.rec_cap.div_ceil(self.rec_batch_size))
    }
}

/// One scheduled bot-week.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSpec {
    pub run_id: RunId,
    pub week: u32,
    pub bot_index: u32,
    pub condition: ExperimentCondition,
    pub seed: u64,
}

pub fn run_id(week: u32, bot_index: u32) -> RunId {
    RunId::new(format!("w{week:02}-b{bot_index:02}"))
}

/// `weeks × bots_per_week` run specs in (week, bot) order. Bot indexes walk
/// the condition list, each condition repeated by its replicate count.
pub fn schedule_cohorts(spec: &CampaignSpec, master_seed: u64) -> Result<Vec<RunSpec>, HarnessError> {
    spec.validate()?;
    let mut out = Vec::with_capacity((spec.weeks * spec.bots_per_week) as usize);
    for week in 0..spec.weeks {
        let mut bot = 0;
        for (condition, reps) in &spec.conditions {
            for _ in 0..*reps {
                out.push(RunSpec {
                    run_id: run_id(week, bot),
                    week,
                    bot_index: bot,
                    condition: *condition,
                    seed: run_seed(master_seed, week, bot),
                });
                bot += 1;
            }
        }
    }
    Ok(out)
}
