//! Campaign configuration files.
//!
//! Flat INI sections of `key = value` pairs. Unknown sections and keys are
//! errors; every omitted key takes its default.
//!
//! ```ini
//! [campaign]
//! master_seed = 7
//! weeks = 1
//!
//! [pool]
//! n_videos = 4000
//! likes = lognormal 7 1.3
//!
//! [topic.economy]
//! weights = 1, 1.2, 1.2, 1, 1.5
//!
//! [recommender]
//! copartisan_boost_rep = 2.0
//!
//! [analysis]
//! metrics = likes, combined_lspc
//! recency = none, exponential:0.5
//!
//! [output]
//! dir = out
//! ```
//!
//! `[campaign] master_seed` is required. The pool and analysis seeds
//! default to it.

use std::str::FromStr;

use ini::Ini;
use thiserror::Error;

use crate::analysis::pipeline::{AnalysisOptions, LabelingOptions};
use crate::analysis::{Family, Metric, Recency, StanceSubset};
use crate::harness::{CampaignSpec, FailureModel};
use crate::model::{ExperimentCondition, Leaning, UsState};
use crate::sim::{ContentPoolSpec, MetricDist, RecommenderParams, TopicSpec};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{location}: {message}")]
pub struct ConfigError {
    pub location: String,
    pub message: String,
}

impl ConfigError {
    fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            location: location.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: String,
    /// `None` selects every table.
    pub tables: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisinfoConfig {
    pub corpus: Option<String>,
    pub transcripts: Option<String>,
    pub thresholds: Vec<f64>,
    pub ratings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub master_seed: u64,
    pub workers: usize,
    pub campaign: CampaignSpec,
    pub pool: ContentPoolSpec,
    pub recommender: RecommenderParams,
    pub analysis: AnalysisOptions,
    pub output: OutputConfig,
    pub misinfo: MisinfoConfig,
}

const SECTIONS: &[&str] = &["campaign", "pool", "recommender", "labeling", "analysis", "output", "misinfo"];

struct Section<'a> {
    name: String,
    pairs: Vec<(&'a str, &'a str)>,
    used: Vec<bool>,
}

impl<'a> Section<'a> {
    fn take(&mut self, key: &str) -> Option<&'a str> {
        let i = self.pairs.iter().position(|(k, _)| *k == key)?;
        self.used[i] = true;
        Some(self.pairs[i].1.trim())
    }

    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::new(format!("[{}] {key}", self.name), message)
    }

    fn parse<T: FromStr>(&mut self, key: &str, into: &mut T) -> Result<(), ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.take(key) {
            *into = v.parse().map_err(|e| self.err(key, format!("{v:?}: {e}")))?;
        }
        Ok(())
    }

    fn list<T>(&mut self, key: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<Vec<T>>, ConfigError> {
        let Some(v) = self.take(key) else { return Ok(None) };
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            out.push(f(item).ok_or_else(|| self.err(key, format!("bad list item {item:?}")))?);
        }
        if out.is_empty() {
            return Err(self.err(key, "empty list"));
        }
        Ok(Some(out))
    }

    fn array<const N: usize>(&mut self, key: &str, into: &mut [f64; N]) -> Result<(), ConfigError> {
        if let Some(v) = self.list(key, |s| s.parse::<f64>().ok())? {
            *into = v
                .try_into()
                .map_err(|v: Vec<f64>| self.err(key, format!("expected {N} numbers, found {}", v.len())))?;
        }
        Ok(())
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.pairs.iter().zip(&self.used).find(|(_, u)| !**u) {
            Some(((k, _), _)) => Err(self.err(k, "unknown key")),
            None => Ok(()),
        }
    }
}

fn take_section<'a>(sections: &mut Vec<Section<'a>>, name: &str) -> Section<'a> {
    match sections.iter().position(|s| s.name == name) {
        Some(i) => sections.remove(i),
        None => Section {
            name: name.to_string(),
            pairs: Vec::new(),
            used: Vec::new(),
        },
    }
}

fn parse_recency(s: &str) -> Option<Recency> {
    match s.split_once(':') {
        None if s == "none" => Some(Recency::None),
        None if s == "linear" => Some(Recency::Linear),
        None if s == "exponential" => Some(Recency::exponential()),
        Some(("exponential", l)) => l
            .trim()
            .parse()
            .ok()
            .filter(|l: &f64| l.is_finite() && *l >= 0.0)
            .map(|lambda| Recency::Exponential { lambda }),
        _ => None,
    }
}

fn parse_subset(s: &str) -> Option<StanceSubset> {
    [StanceSubset::All, StanceSubset::Positive, StanceSubset::Negative]
        .into_iter()
        .find(|x| x.as_str() == s)
}

fn parse_family(s: &str) -> Option<Family> {
    Family::ALL.into_iter().find(|f| f.as_str() == s)
}

fn parse_metrics(s: &str) -> Option<Vec<Metric>> {
    if s == "all" {
        Some(Metric::ALL.to_vec())
    } else {
        Metric::parse(s).map(|m| vec![m])
    }
}

impl CampaignConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let ini = Ini::load_from_str(text).map_err(|e| ConfigError::new("config", e.to_string()))?;
        let mut sections: Vec<Section> = Vec::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(ConfigError::new(k, "key outside any section"));
                }
                continue;
            };
            if !SECTIONS.contains(&name) && !name.starts_with("topic.") {
                return Err(ConfigError::new(format!("[{name}]"), "unknown section"));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(ConfigError::new(format!("[{name}]"), "duplicate section"));
            }
            let pairs: Vec<(&str, &str)> = props.iter().collect();
            for (i, (k, _)) in pairs.iter().enumerate() {
                if pairs[..i].iter().any(|(p, _)| p == k) {
                    return Err(ConfigError::new(format!("[{name}] {k}"), "duplicate key"));
                }
            }
            sections.push(Section {
                name: name.to_string(),
                used: vec![false; pairs.len()],
                pairs,
            });
        }
        let mut s = take_section(&mut sections, "campaign");
        let master_seed: u64 = s
            .take("master_seed")
            .ok_or_else(|| s.err("master_seed", "required"))?
            .parse()
            .map_err(|e| s.err("master_seed", format!("{e}")))?;
        let mut workers = 1usize;
        s.parse("workers", &mut workers)?;
        let mut c = CampaignSpec::default();
        s.parse("weeks", &mut c.weeks)?;
        s.parse("conditioning_channels_per_run", &mut c.conditioning_channels_per_run)?;
        s.parse("videos_per_channel", &mut c.videos_per_channel)?;
        s.parse("conditioning_watch_secs", &mut c.conditioning_watch_secs)?;
        s.parse("post_conditioning_pause_secs", &mut c.post_conditioning_pause_secs)?;
        s.parse("rec_batch_size", &mut c.rec_batch_size)?;
        s.parse("rec_watch_secs", &mut c.rec_watch_secs)?;
        s.parse("rec_window_days", &mut c.rec_window_days)?;
        s.parse("rec_cap", &mut c.rec_cap)?;
        s.parse("min_pair_length", &mut c.min_pair_length)?;
        let mut fm = FailureModel::default();
        s.parse("failure_probability", &mut fm.probability)?;
        s.parse("bot_detection_share", &mut fm.bot_detection_share)?;
        c.failure_model = fm;
        let states = s
            .list("states", |x| x.parse::<UsState>().ok())?
            .unwrap_or_else(|| UsState::ALL.to_vec());
        let mut partisan_reps = 3u32;
        let mut control_reps = 3u32;
        let mut control_state = UsState::Georgia;
        s.parse("partisan_replicates", &mut partisan_reps)?;
        s.parse("control_replicates", &mut control_reps)?;
        s.parse("control_state", &mut control_state)?;
        let mut conditions = Vec::new();
        for st in &states {
            for l in [Leaning::Democrat, Leaning::Republican] {
                if partisan_reps > 0 {
                    conditions.push((ExperimentCondition::new(*st, l), partisan_reps));
                }
            }
        }
        if control_reps > 0 {
            conditions.push((ExperimentCondition::new(control_state, Leaning::NeutralControl), control_reps));
        }
        c.bots_per_week = conditions.iter().map(|(_, r)| r).sum();
        let mut bots = c.bots_per_week;
        s.parse("bots_per_week", &mut bots)?;
        if bots != c.bots_per_week {
            return Err(s.err("bots_per_week", format!("replicates give {} bots per week", c.bots_per_week)));
        }
        c.conditions = conditions;
        s.finish()?;
        c.validate().map_err(|e| ConfigError::new("[campaign]", e.to_string()))?;

        let mut s = take_section(&mut sections, "pool");
        let mut p = ContentPoolSpec {
            seed: master_seed,
            ..ContentPoolSpec::default()
        };
        s.parse("seed", &mut p.seed)?;
        s.parse("n_videos", &mut p.n_videos)?;
        s.parse("n_channels", &mut p.n_channels)?;
        s.array("stance_mix", &mut p.stance_mix)?;
        s.parse("political_fraction", &mut p.political_fraction)?;
        s.parse("election_fraction", &mut p.election_fraction)?;
        for (key, d) in [
            ("plays", &mut p.plays),
            ("shares", &mut p.shares),
            ("likes", &mut p.likes),
            ("comments", &mut p.comments),
            ("duration_secs", &mut p.duration_secs),
            ("followers", &mut p.followers),
        ] {
            s.parse::<MetricDist>(key, d)?;
        }
        s.parse("weeks_before", &mut p.weeks_before)?;
        s.parse("weeks_after", &mut p.weeks_after)?;
        s.parse("partisan_channel_fraction", &mut p.partisan_channel_fraction)?;
        s.parse("channel_homophily", &mut p.channel_homophily)?;
        s.parse("verified_probability", &mut p.verified_probability)?;
        s.array("comment_alpha_dem", &mut p.comment_alpha_dem)?;
        s.array("comment_alpha_rep", &mut p.comment_alpha_rep)?;
        s.finish()?;

        let mut topics = Vec::new();
        while let Some(i) = sections.iter().position(|s| s.name.starts_with("topic.")) {
            let mut s = sections.remove(i);
            let id = s.name["topic.".len()..].to_string();
            if id.is_empty() {
                return Err(ConfigError::new("[topic.]", "empty topic name"));
            }
            let mut weights = [0.0; 5];
            if s.take("weights").is_none() {
                return Err(s.err("weights", "required"));
            }
            s.used.iter_mut().for_each(|u| *u = false);
            s.array("weights", &mut weights)?;
            s.finish()?;
            topics.push(TopicSpec { id, weights });
        }
        if !topics.is_empty() {
            p.topic_catalog = topics;
        }
        p.validate().map_err(|e| ConfigError::new("[pool]", e.to_string()))?;

        let mut s = take_section(&mut sections, "recommender");
        let mut r = RecommenderParams::default();
        s.parse("copartisan_boost_dem", &mut r.copartisan_boost_dem)?;
        s.parse("copartisan_boost_rep", &mut r.copartisan_boost_rep)?;
        s.parse("crosspartisan_rate_dem", &mut r.crosspartisan_rate_dem)?;
        s.parse("crosspartisan_rate_rep", &mut r.crosspartisan_rate_rep)?;
        s.parse("engagement_exponent", &mut r.engagement_exponent)?;
        s.parse("polarization_drift_per_week", &mut r.polarization_drift_per_week)?;
        s.parse("history_window", &mut r.history_window)?;
        s.parse("lean_decay", &mut r.lean_decay)?;
        s.finish()?;
        r.validate().map_err(|e| ConfigError::new("[recommender]", e.to_string()))?;

        let mut s = take_section(&mut sections, "labeling");
        let mut l = LabelingOptions::default();
        s.parse("n_raters", &mut l.n_raters)?;
        s.parse("noise_rate", &mut l.noise_rate)?;
        s.parse("channel_min_videos", &mut l.channel_min_videos)?;
        s.parse("channel_threshold", &mut l.channel_threshold)?;
        s.parse("channel_supplement", &mut l.channel_supplement)?;
        s.finish()?;

        let mut s = take_section(&mut sections, "analysis");
        let mut a = AnalysisOptions::new(master_seed);
        a.labeling = l;
        s.parse("seed", &mut a.seed)?;
        if let Some(m) = s.list("metrics", parse_metrics)? {
            a.metrics = m.concat();
        }
        if let Some(m) = s.list("recency", parse_recency)? {
            a.recency_modes = m;
        }
        if let Some(m) = s.list("subsets", parse_subset)? {
            a.subsets = m;
        }
        s.parse("reps", &mut a.reps)?;
        s.parse("verified_weight", &mut a.verified_weight)?;
        if let Some(m) = s.list("verified_sweep", |x| x.parse().ok())? {
            a.verified_sweep = m;
        }
        if let Some(m) = s.list("sensitivity_metrics", parse_metrics)? {
            a.sensitivity_metrics = m.concat();
        }
        if let Some(m) = s.list("sensitivity_families", parse_family)? {
            a.sensitivity_families = m;
        }
        s.parse("mc_trials", &mut a.mc_trials)?;
        s.parse("search_tolerance", &mut a.search_tolerance)?;
        s.parse("min_control_length", &mut a.min_control_length)?;
        s.parse("weeks_per_month", &mut a.weeks_per_month)?;
        s.parse("topic_min_count", &mut a.topic_min_count)?;
        s.parse("rolling_window", &mut a.rolling_window)?;
        s.parse("vif_threshold", &mut a.vif_threshold)?;
        s.parse("fallback_ridge", &mut a.fallback_ridge)?;
        s.finish()?;
        a.validate().map_err(|e| ConfigError::new("[analysis]", e.to_string()))?;

        let mut s = take_section(&mut sections, "output");
        let mut output = OutputConfig {
            dir: "out".into(),
            tables: None,
        };
        s.parse("dir", &mut output.dir)?;
        if let Some(t) = s.list("tables", |x| Some(x.to_string()))? {
            if t.iter().any(|x| x == "all") {
                output.tables = None;
            } else {
                for name in &t {
                    if crate::report::columns(name).is_none() {
                        return Err(s.err("tables", format!("unknown table {name:?}")));
                    }
                }
                output.tables = Some(t);
            }
        }
        s.finish()?;

        let mut s = take_section(&mut sections, "misinfo");
        let mut misinfo = MisinfoConfig {
            corpus: s.take("corpus").map(str::to_string),
            transcripts: s.take("transcripts").map(str::to_string),
            thresholds: crate::misinfo::DEFAULT_THRESHOLDS.to_vec(),
            ratings: crate::misinfo::DEFAULT_RATINGS.iter().map(|r| r.to_string()).collect(),
        };
        if let Some(t) = s.list("thresholds", |x| x.parse().ok())? {
            misinfo.thresholds = t;
        }
        if let Some(r) = s.list("ratings", |x| Some(x.to_string()))? {
            misinfo.ratings = r;
        }
        s.finish()?;
        if misinfo.corpus.is_some() != misinfo.transcripts.is_some() {
            return Err(ConfigError::new("[misinfo]", "corpus and transcripts go together"));
        }

        Ok(Self {
            master_seed,
            workers,
            campaign: c,
            pool: p,
            recommender: r,
            analysis: a,
            output,
            misinfo,
        })
    }
}
