use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SimError, World};
use crate::model::Alignment;

/// Planted-bias knobs. With every multiplier at 1 and zero drift the
/// recommender is engagement-weighted and politically neutral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommenderParams {
    pub copartisan_boost_dem: f64,
    pub copartisan_boost_rep: f64,
    pub crosspartisan_rate_dem: f64,
    pub crosspartisan_rate_rep: f64,
    pub engagement_exponent: f64,
    pub polarization_drift_per_week: f64,
    pub history_window: usize,
    /// Per-watch decay of the lean estimate's weights.
    pub lean_decay: f64,
}

impl Default for RecommenderParams {
    fn default() -> Self {
        Self {
            copartisan_boost_dem: 1.0,
            copartisan_boost_rep: 1.0,
            crosspartisan_rate_dem: 1.0,
            crosspartisan_rate_rep: 1.0,
            engagement_exponent: 0.5,
            polarization_drift_per_week: 0.0,
            history_window: 50,
            lean_decay: 0.95,
        }
    }
}

impl RecommenderParams {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, m) in [
            ("copartisan_boost_dem", self.copartisan_boost_dem),
            ("copartisan_boost_rep", self.copartisan_boost_rep),
            ("crosspartisan_rate_dem", self.crosspartisan_rate_dem),
            ("crosspartisan_rate_rep", self.crosspartisan_rate_rep),
        ] {
            if !(m.is_finite() && m >= 0.0) {
                return Err(SimError::InvalidSpec(format!("{name} must be finite and non-negative")));
            }
        }
        if !self.engagement_exponent.is_finite() || !self.polarization_drift_per_week.is_finite() {
            return Err(SimError::InvalidSpec("exponent and drift must be finite".into()));
        }
        if self.history_window == 0 {
            return Err(SimError::InvalidSpec("history_window must be at least 1".into()));
        }
        if !(self.lean_decay > 0.0 && self.lean_decay <= 1.0) {
            return Err(SimError::InvalidSpec("lean_decay must be in (0, 1]".into()));
        }
        Ok(())
    }

    /// Sampling multipliers for (Dem-aligned, Rep-aligned) videos.
    pub fn multipliers(&self, lean: f64, week: u32) -> (f64, f64) {
        let scale = (1.0 + self.polarization_drift_per_week * week as f64).max(0.0);
        if lean > 0.0 {
            (self.crosspartisan_rate_rep * scale, self.copartisan_boost_rep * scale)
        } else if lean < 0.0 {
            (self.copartisan_boost_dem * scale, self.crosspartisan_rate_dem * scale)
        } else {
            (1.0, 1.0)
        }
    }
}

/// What the platform remembers about one bot.
#[derive(Debug, Clone, PartialEq)]
pub struct BotState {
    history: VecDeque<f64>,
    window: usize,
    decay: f64,
}

impl BotState {
    pub fn new(window: usize, decay: f64) -> Self {
        Self {
            history: VecDeque::with_capacity(window),
            window: window.max(1),
            decay,
        }
    }

    /// Records a watch; `None` (non-political or unlabeled) counts as 0.
    pub fn observe(&mut self, alignment: Option<Alignment>) {
        if self.history.len() == self.window {
            self.history.pop_front();
        }
        self.history.push_back(alignment.map_or(0.0, Alignment::sign));
    }

    /// Decay-weighted mean of the history, newest watch weighted 1, in [-1, 1].
    pub fn inferred_lean(&self) -> f64 {
        let (mut num, mut den, mut w) = (0.0, 0.0, 1.0);
        for x in self.history.iter().rev() {
            num += w * x;
            den += w;
            w *= self.decay;
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }
}

/// Anything the audit harness can watch.
pub trait Platform: Sync {
    fn world(&self) -> &World;

    fn new_bot(&self) -> BotState;

    /// Picks the next video (an index into `world().videos()`) for a bot in
    /// campaign week `week` and records the watch in its history.
    fn recommend_next(&self, bot: &mut BotState, week: u32, rng: &mut ChaCha8Rng) -> Result<usize, SimError>;

    /// Records a watch the bot chose itself.
    fn observe(&self, bot: &mut BotState, video: usize) {
        bot.observe(self.world().video(video).alignment());
    }
}

#[derive(Debug, Clone)]
struct ClassIndex {
    order: Vec<usize>,
    weeks: Vec<i32>,
    prefix: Vec<f64>,
}

impl ClassIndex {
    fn available(&self, week: i32) -> usize {
        self.weeks.partition_point(|&w| w <= week)
    }
}

const DEM: usize = 0;
const REP: usize = 1;
const OTHER: usize = 2;

/// The default planted-bias platform.
///
/// A video is drawn with weight `(1 + plays)^engagement_exponent` times the
/// multiplier for its alignment class (see [`RecommenderParams::multipliers`]).
/// Only videos published by the current week are eligible. Each class keeps
/// its videos sorted by publish week with prefix sums of weight, so a draw
/// is two binary searches.
#[derive(Debug, Clone)]
pub struct Recommender {
    world: World,
    params: RecommenderParams,
    classes: [ClassIndex; 3],
}

fn class_of(a: Option<Alignment>) -> usize {
    match a {
        Some(Alignment::DemAligned) => DEM,
        Some(Alignment::RepAligned) => REP,
        _ => OTHER,
    }
}

impl Recommender {
    pub fn new(world: World, params: RecommenderParams) -> Result<Self, SimError> {
        params.validate()?;
        let build = |class: usize| {
            let mut order: Vec<usize> = (0..world.videos().len())
                .filter(|&i| class_of(world.video(i).alignment()) == class)
                .collect();
            order.sort_by_key(|&i| (world.video(i).publish_week, i));
            let weeks = order.iter().map(|&i| world.video(i).publish_week).collect();
            let mut prefix = Vec::with_capacity(order.len() + 1);
            let mut acc = 0.0;
            prefix.push(acc);
            for &i in &order {
                acc += (1.0 + world.video(i).plays as f64).powf(params.engagement_exponent);
                prefix.push(acc);
            }
            ClassIndex { order, weeks, prefix }
        };
        let classes = [build(DEM), build(REP), build(OTHER)];
        Ok(Self { world, params, classes })
    }

    pub fn params(&self) -> &RecommenderParams {
        &self.params
    }

    pub fn engagement_weight(&self, video: usize) -> f64 {
        (1.0 + self.world.video(video).plays as f64).powf(self.params.engagement_exponent)
    }

    fn class_masses(&self, lean: f64, week: u32) -> [f64; 3] {
        let (m_dem, m_rep) = self.params.multipliers(lean, week);
        let w = week as i32;
        let tot = |c: usize| self.classes[c].prefix[self.classes[c].available(w)];
        [m_dem * tot(DEM), m_rep * tot(REP), tot(OTHER)]
    }

    /// Probability that the next draw is (Dem-aligned, Rep-aligned, other)
    /// for a bot with the given lean.
    pub fn class_probabilities(&self, lean: f64, week: u32) -> [f64; 3] {
        let m = self.class_masses(lean, week);
        let s: f64 = m.iter().sum();
        if s <= 0.0 {
            return [0.0; 3];
        }
        [m[0] / s, m[1] / s, m[2] / s]
    }

    /// Exact draw probability of one video.
    pub fn video_probability(&self, video: usize, lean: f64, week: u32) -> f64 {
        let v = self.world.video(video);
        if v.publish_week > week as i32 {
            return 0.0;
        }
        let masses = self.class_masses(lean, week);
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        let (m_dem, m_rep) = self.params.multipliers(lean, week);
        let m = match class_of(v.alignment()) {
            DEM => m_dem,
            REP => m_rep,
            _ => 1.0,
        };
        m * self.engagement_weight(video) / total
    }
}

impl Platform for Recommender {
    fn world(&self) -> &World {
        &self.world
    }

    fn new_bot(&self) -> BotState {
        BotState::new(self.params.history_window, self.params.lean_decay)
    }

    fn recommend_next(&self, bot: &mut BotState, week: u32, rng: &mut ChaCha8Rng) -> Result<usize, SimError> {
        let masses = self.class_masses(bot.inferred_lean(), week);
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(SimError::EmptyPool);
        }
        let mut u = rng.random::<f64>() * total;
        let mut class = OTHER;
        for (c, m) in masses.iter().enumerate() {
            if u < *m {
                class = c;
                break;
            }
            u -= m;
        }
        // guard against rounding past the last non-empty class
        if masses[class] <= 0.0 {
            class = masses.iter().rposition(|m| *m > 0.0).expect("total > 0");
        }
        let idx = &self.classes[class];
        let avail = idx.available(week as i32);
        let target = rng.random::<f64>() * idx.prefix[avail];
        let k = idx.prefix[1..=avail].partition_point(|&p| p <= target).min(avail - 1);
        let video = idx.order[k];
        self.observe(bot, video);
        Ok(video)
    }
}
