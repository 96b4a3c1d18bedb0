use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// The five-way ideological stance assigned to a political video or comment.
///
/// There is deliberately no "unknown" variant: an item whose ensemble vote
/// did not resolve simply carries no stance (`Option<StanceLabel>`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StanceLabel {
    ProDemocrat,
    AntiDemocrat,
    ProRepublican,
    AntiRepublican,
    Neutral,
}

impl StanceLabel {
    /// Canonical ordering used by every table and mixing vector in the crate.
    pub const ALL: [StanceLabel; 5] = [
        StanceLabel::ProDemocrat,
        StanceLabel::AntiDemocrat,
        StanceLabel::ProRepublican,
        StanceLabel::AntiRepublican,
        StanceLabel::Neutral,
    ];

    pub fn index(self) -> usize {
        match self {
            StanceLabel::ProDemocrat => 0,
            StanceLabel::AntiDemocrat => 1,
            StanceLabel::ProRepublican => 2,
            StanceLabel::AntiRepublican => 3,
            StanceLabel::Neutral => 4,
        }
    }

    pub fn alignment(self) -> Alignment {
        alignment_of(self)
    }

    /// Anti-opposition content (negative partisanship).
    pub fn is_negative_partisan(self) -> bool {
        matches!(self, StanceLabel::AntiDemocrat | StanceLabel::AntiRepublican)
    }

    /// Pro-party content (positive partisanship).
    pub fn is_positive_partisan(self) -> bool {
        matches!(self, StanceLabel::ProDemocrat | StanceLabel::ProRepublican)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StanceLabel::ProDemocrat => "pro_democrat",
            StanceLabel::AntiDemocrat => "anti_democrat",
            StanceLabel::ProRepublican => "pro_republican",
            StanceLabel::AntiRepublican => "anti_republican",
            StanceLabel::Neutral => "neutral",
        }
    }
}

impl fmt::Display for StanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StanceLabel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "prodemocrat" | "prodem" => Ok(StanceLabel::ProDemocrat),
            "antidemocrat" | "antidem" => Ok(StanceLabel::AntiDemocrat),
            "prorepublican" | "prorep" => Ok(StanceLabel::ProRepublican),
            "antirepublican" | "antirep" => Ok(StanceLabel::AntiRepublican),
            "neutral" => Ok(StanceLabel::Neutral),
            _ => Err(ModelError::UnknownLabel(s.to_string())),
        }
    }
}

/// Party alignment of a stance: `Pro Democrat` and `Anti Republican` content
/// is Democrat-aligned, `Pro Republican` and `Anti Democrat` content is
/// Republican-aligned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    DemAligned,
    RepAligned,
    Neutral,
}

impl Alignment {
    /// +1 for Republican-aligned, -1 for Democrat-aligned, 0 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Alignment::DemAligned => -1.0,
            Alignment::RepAligned => 1.0,
            Alignment::Neutral => 0.0,
        }
    }

    pub fn opposite(self) -> Alignment {
        match self {
            Alignment::DemAligned => Alignment::RepAligned,
            Alignment::RepAligned => Alignment::DemAligned,
            Alignment::Neutral => Alignment::Neutral,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Alignment::DemAligned => "dem_aligned",
            Alignment::RepAligned => "rep_aligned",
            Alignment::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn alignment_of(stance: StanceLabel) -> Alignment {
    match stance {
        StanceLabel::ProDemocrat | StanceLabel::AntiRepublican => Alignment::DemAligned,
        StanceLabel::ProRepublican | StanceLabel::AntiDemocrat => Alignment::RepAligned,
        StanceLabel::Neutral => Alignment::Neutral,
    }
}

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }
    };
}

string_id!(
    /// Opaque video identifier.
    VideoId
);
string_id!(
    /// Opaque channel (creator account) identifier.
    ChannelId
);
string_id!(
    /// Opaque experiment-run identifier.
    RunId
);

/// A published item with its labels and one engagement snapshot.
///
/// Counters are unsigned, so non-negativity holds by construction; the
/// remaining invariants are checked by [`VideoRecord::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: VideoId,
    pub channel_id: ChannelId,
    /// Whole weeks since campaign start; negative for back-catalogue videos.
    pub publish_week: i32,
    pub duration_secs: f64,
    pub is_political: bool,
    pub is_election_related: bool,
    pub stance: Option<StanceLabel>,
    #[serde(default)]
    pub topics: Vec<String>,
    pub plays: u64,
    pub shares: u64,
    pub likes: u64,
    pub comments: u64,
    pub opposing_comment_prop: f64,
    pub copartisan_comment_prop: f64,
}

impl VideoRecord {
    pub fn alignment(&self) -> Option<Alignment> {
        self.stance.map(alignment_of)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |why: &str| ModelError::InvalidVideo {
            video_id: self.video_id.0.clone(),
            reason: why.to_string(),
        };
        if self.shares > self.plays {
            return Err(ModelError::InvalidEngagement {
                plays: self.plays,
                shares: self.shares,
            });
        }
        let unit = 0.0..=1.0;
        if !unit.contains(&self.opposing_comment_prop) || !unit.contains(&self.copartisan_comment_prop) {
            return Err(bad("comment proportion outside [0, 1]"));
        }
        if self.opposing_comment_prop + self.copartisan_comment_prop > 1.0 + 1e-12 {
            return Err(bad("comment proportions sum above 1"));
        }
        if !(self.duration_secs.is_finite() && self.duration_secs >= 0.0) {
            return Err(bad("duration must be finite and non-negative"));
        }
        if self.is_election_related && !self.is_political {
            return Err(bad("election-related video must be political"));
        }
        if self.stance.is_some() && !self.is_political {
            return Err(bad("stance present on a non-political video"));
        }
        Ok(())
    }
}

/// A creator account.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub channel_id: ChannelId,
    pub followers: u64,
    pub cumulative_likes: u64,
    pub video_count: u64,
    pub verified: bool,
    /// Set only from a channel classification; `None` when unclassified.
    pub alignment: Option<Alignment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UsState {
    NewYork,
    Texas,
    Georgia,
}

impl UsState {
    pub const ALL: [UsState; 3] = [UsState::NewYork, UsState::Texas, UsState::Georgia];

    pub fn as_str(self) -> &'static str {
        match self {
            UsState::NewYork => "new_york",
            UsState::Texas => "texas",
            UsState::Georgia => "georgia",
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            UsState::NewYork => "NY",
            UsState::Texas => "TX",
            UsState::Georgia => "GA",
        }
    }
}

impl FromStr for UsState {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ny" | "new_york" | "newyork" => Ok(UsState::NewYork),
            "tx" | "texas" => Ok(UsState::Texas),
            "ga" | "georgia" => Ok(UsState::Georgia),
            _ => Err(ModelError::UnknownLabel(s.to_string())),
        }
    }
}

/// Partisan leaning a bot is conditioned towards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leaning {
    Democrat,
    Republican,
    NeutralControl,
}

impl Leaning {
    /// The alignment a bot of this leaning considers co-partisan.
    pub fn copartisan(self) -> Option<Alignment> {
        match self {
            Leaning::Democrat => Some(Alignment::DemAligned),
            Leaning::Republican => Some(Alignment::RepAligned),
            Leaning::NeutralControl => None,
        }
    }

    pub fn is_partisan(self) -> bool {
        self != Leaning::NeutralControl
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Leaning::Democrat => "democrat",
            Leaning::Republican => "republican",
            Leaning::NeutralControl => "neutral_control",
        }
    }
}

impl FromStr for Leaning {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d" | "dem" | "democrat" => Ok(Leaning::Democrat),
            "r" | "rep" | "republican" => Ok(Leaning::Republican),
            "n" | "neutral" | "control" | "neutral_control" => Ok(Leaning::NeutralControl),
            _ => Err(ModelError::UnknownLabel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExperimentCondition {
    pub state: UsState,
    pub leaning: Leaning,
}

impl ExperimentCondition {
    pub fn new(state: UsState, leaning: Leaning) -> Self {
        Self { state, leaning }
    }
}

impl fmt::Display for ExperimentCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.state.code(), self.leaning.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Conditioning,
    Recommendation,
}

/// One watched video in a run's log. `virtual_time` is seconds on the
/// campaign's virtual clock.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatchEvent {
    pub run_id: RunId,
    pub video_id: VideoId,
    pub virtual_time: u64,
    pub stage: Stage,
    pub ordinal: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    FailedBotDetection,
    FailedNetwork,
}

/// One bot's week: conditioning log followed by recommendation log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentRun {
    pub run_id: RunId,
    pub week: u32,
    pub condition: ExperimentCondition,
    pub conditioning_count: u32,
    pub events: Vec<WatchEvent>,
    pub status: RunStatus,
}

impl ExperimentRun {
    pub fn conditioning(&self) -> impl Iterator<Item = &WatchEvent> {
        self.events.iter().filter(|e| e.stage == Stage::Conditioning)
    }

    pub fn recommendations(&self) -> impl Iterator<Item = &WatchEvent> {
        self.events.iter().filter(|e| e.stage == Stage::Recommendation)
    }

    pub fn recommendation_count(&self) -> usize {
        self.recommendations().count()
    }
}
