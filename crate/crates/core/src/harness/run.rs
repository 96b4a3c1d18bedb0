use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    pair_campaign, schedule_cohorts, CampaignSpec, Exclusion, HarnessError, MatchedPair, RunSpec, SECS_PER_HOUR,
    SECS_PER_WEEK,
};
use crate::model::{ExperimentRun, Leaning, RunId, RunStatus, Stage, WatchEvent};
use crate::seed::{mix, rng_from, tag};
use crate::sim::{BotState, Platform};

/// A failure planted into one run: the run stops before batch `batch`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectedFailure {
    pub batch: usize,
    pub status: RunStatus,
}

fn event(run: &RunSpec, video: &crate::model::VideoId, t: u64, stage: Stage, ordinal: u32) -> WatchEvent {
    WatchEvent {
        run_id: run.run_id.clone(),
        video_id: video.clone(),
        virtual_time: t,
        stage,
        ordinal,
    }
}

/// Watches the newest videos of randomly chosen aligned channels.
/// Returns the log and the clock after the last watch.
pub fn run_conditioning<P: Platform>(
    run: &RunSpec,
    platform: &P,
    bot: &mut BotState,
    spec: &CampaignSpec,
    start: u64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<WatchEvent>, u64), HarnessError> {
    let leaning = run.condition.leaning;
    let alignment = leaning.copartisan().ok_or(HarnessError::ControlConditioning)?;
    let world = platform.world();
    let pool = world.channels_aligned(alignment);
    let needed = spec.conditioning_channels_per_run;
    if pool.len() < needed {
        return Err(HarnessError::InsufficientChannels {
            leaning,
            needed,
            available: pool.len(),
        });
    }
    let mut events = Vec::new();
    let mut t = start;
    for k in sample(rng, pool.len(), needed) {
        for v in world.recent_videos(pool[k], run.week as i32, spec.videos_per_channel) {
            events.push(event(run, &world.video(v).video_id, t, Stage::Conditioning, events.len() as u32));
            platform.observe(bot, v);
            t += spec.conditioning_watch_secs;
        }
    }
    Ok((events, t))
}

/// Hourly batches of recommended watches starting at `start` (a whole
/// hour) until the cap, the window, or an injected failure.
pub fn run_recommendation<P: Platform>(
    run: &RunSpec,
    platform: &P,
    bot: &mut BotState,
    spec: &CampaignSpec,
    start: u64,
    failure: Option<InjectedFailure>,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<WatchEvent>, RunStatus), HarnessError> {
    let mut events = Vec::new();
    let stop = failure.map_or(usize::MAX, |f| f.batch);
    for batch in 0..spec.window_batches().min(stop) {
        let hour = start + batch as u64 * SECS_PER_HOUR;
        for j in 0..spec.rec_batch_size {
            if events.len() >= spec.rec_cap {
                return Ok((events, RunStatus::Completed));
            }
            let v = platform.recommend_next(bot, run.week, rng)?;
            let t = hour + j as u64 * spec.rec_watch_secs;
            events.push(event(run, &platform.world().video(v).video_id, t, Stage::Recommendation, events.len() as u32));
        }
    }
    let status = match failure {
        Some(f) if f.batch < spec.effective_batches() => f.status,
        _ => RunStatus::Completed,
    };
    Ok((events, status))
}

fn draw_failure(spec: &CampaignSpec, seed: u64) -> Option<InjectedFailure> {
    let mut rng = rng_from(mix(seed, &[tag::FAILURE]));
    let fm = spec.failure_model;
    let fails = rng.random::<f64>() < fm.probability;
    let batch = rng.random_range(0..spec.effective_batches().max(1));
    let detected = rng.random::<f64>() < fm.bot_detection_share;
    fails.then_some(InjectedFailure {
        batch,
        status: if detected {
            RunStatus::FailedBotDetection
        } else {
            RunStatus::FailedNetwork
        },
    })
}

/// One complete bot-week. Controls go straight to recommendation at the
/// start of the week; partisan bots start recommendation on the first whole
/// hour after conditioning plus the configured pause.
pub fn execute_run<P: Platform>(run: &RunSpec, platform: &P, spec: &CampaignSpec) -> Result<ExperimentRun, HarnessError> {
    let t0 = run.week as u64 * SECS_PER_WEEK;
    let mut bot = platform.new_bot();
    let mut events = Vec::new();
    let rec_start = if run.condition.leaning == Leaning::NeutralControl {
        t0
    } else {
        let mut rng = rng_from(mix(run.seed, &[tag::CONDITIONING]));
        let (cond, end) = run_conditioning(run, platform, &mut bot, spec, t0, &mut rng)?;
        events = cond;
        end.div_ceil(SECS_PER_HOUR) * SECS_PER_HOUR + spec.post_conditioning_pause_secs
    };
    let conditioning_count = events.len() as u32;
    let failure = draw_failure(spec, run.seed);
    let mut rng = rng_from(mix(run.seed, &[tag::RECOMMENDATION]));
    let (recs, status) = run_recommendation(run, platform, &mut bot, spec, rec_start, failure, &mut rng)?;
    events.extend(recs);
    Ok(ExperimentRun {
        run_id: run.run_id.clone(),
        week: run.week,
        condition: run.condition,
        conditioning_count,
        events,
        status,
    })
}

/// Everything a campaign produced, ordered by run id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub specs: Vec<RunSpec>,
    pub runs: Vec<ExperimentRun>,
    pub pairs: Vec<MatchedPair>,
    pub exclusions: Vec<Exclusion>,
    pub unpaired: Vec<RunId>,
}

/// Schedules, executes and pairs a whole campaign on `workers` threads.
/// Each run draws from its own seed, so the result does not depend on the
/// worker count.
pub fn run_campaign<P: Platform>(
    platform: &P,
    spec: &CampaignSpec,
    master_seed: u64,
    workers: usize,
) -> Result<Campaign, HarnessError> {
    let specs = schedule_cohorts(spec, master_seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::WorkerPool(e.to_string()))?;
    let mut runs = pool.install(|| {
        specs
            .par_iter()
            .map(|r| execute_run(r, platform, spec))
            .collect::<Result<Vec<_>, _>>()
    })?;
    runs.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    let outcome = pair_campaign(&runs, spec.min_pair_length);
    Ok(Campaign {
        specs,
        runs,
        pairs: outcome.pairs,
        exclusions: outcome.exclusions,
        unpaired: outcome.unpaired,
    })
}
