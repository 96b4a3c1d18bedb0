use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::labeling::classify_channel;
use crate::model::{Alignment, ChannelId, ChannelRecord, StanceLabel, VideoId, VideoRecord};
use crate::seed::{mix, rng_from, tag};

/// Distribution of one engagement counter. Draws are rounded and clamped at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MetricDist {
    Lognormal { mu: f64, sigma: f64 },
    Normal { mean: f64, sd: f64 },
    Poisson { lambda: f64 },
    Binomial { n: u64, p: f64 },
}

impl MetricDist {
    fn check(&self) -> Result<(), SimError> {
        let ok = match *self {
            MetricDist::Lognormal { mu, sigma } => mu.is_finite() && sigma.is_finite() && sigma >= 0.0,
            MetricDist::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd >= 0.0,
            MetricDist::Poisson { lambda } => lambda.is_finite() && lambda > 0.0,
            MetricDist::Binomial { p, .. } => (0.0..=1.0).contains(&p),
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidSpec(format!("bad distribution parameters: {self}")))
        }
    }

    pub fn sample_f64(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            MetricDist::Lognormal { mu, sigma } => LogNormal::new(mu, sigma).expect("checked").sample(rng),
            MetricDist::Normal { mean, sd } => Normal::new(mean, sd).expect("checked").sample(rng),
            MetricDist::Poisson { lambda } => Poisson::new(lambda).expect("checked").sample(rng),
            MetricDist::Binomial { n, p } => Binomial::new(n, p).expect("checked").sample(rng) as f64,
        }
    }

    pub fn sample_count(&self, rng: &mut ChaCha8Rng) -> u64 {
        let x = self.sample_f64(rng).round();
        if x.is_finite() && x > 0.0 {
            x.min(u64::MAX as f64 / 4.0) as u64
        } else {
            0
        }
    }
}

impl fmt::Display for MetricDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricDist::Lognormal { mu, sigma } => write!(f, "lognormal {mu} {sigma}"),
            MetricDist::Normal { mean, sd } => write!(f, "normal {mean} {sd}"),
            MetricDist::Poisson { lambda } => write!(f, "poisson {lambda}"),
            MetricDist::Binomial { n, p } => write!(f, "binomial {n} {p}"),
        }
    }
}

/// Parses `"lognormal 9 1.2"`, `"normal 45 20"`, `"poisson 3"` or
/// `"binomial 100 0.3"`.
impl FromStr for MetricDist {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimError::InvalidSpec(format!("cannot parse distribution {s:?}"));
        let parts: Vec<&str> = s.split_whitespace().collect();
        let num = |i: usize| -> Result<f64, SimError> { parts.get(i).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let d = match (parts.first().map(|p| p.to_ascii_lowercase()).as_deref(), parts.len()) {
            (Some("lognormal"), 3) => MetricDist::Lognormal { mu: num(1)?, sigma: num(2)? },
            (Some("normal"), 3) => MetricDist::Normal { mean: num(1)?, sd: num(2)? },
            (Some("poisson"), 2) => MetricDist::Poisson { lambda: num(1)? },
            (Some("binomial"), 3) => MetricDist::Binomial {
                n: parts[1].parse().map_err(|_| bad())?,
                p: num(2)?,
            },
            _ => return Err(bad()),
        };
        d.check()?;
        Ok(d)
    }
}

/// A topic with one sampling weight per stance, in `StanceLabel::ALL` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSpec {
    pub id: String,
    pub weights: [f64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentPoolSpec {
    pub n_videos: usize,
    pub n_channels: usize,
    /// Stance distribution of political videos, in `StanceLabel::ALL` order.
    pub stance_mix: [f64; 5],
    pub political_fraction: f64,
    /// Share of political videos that are election-related.
    pub election_fraction: f64,
    pub plays: MetricDist,
    pub shares: MetricDist,
    pub likes: MetricDist,
    pub comments: MetricDist,
    pub duration_secs: MetricDist,
    pub followers: MetricDist,
    /// Publish weeks are uniform over `[-weeks_before, weeks_after)`.
    pub weeks_before: i32,
    pub weeks_after: i32,
    /// Fraction of channels with a partisan lean, split evenly by party.
    pub partisan_channel_fraction: f64,
    /// Probability that a partisan video is posted by a channel of its own lean.
    pub channel_homophily: f64,
    pub verified_probability: f64,
    /// Dirichlet concentrations of (co-partisan, opposing, neutral) comment
    /// shares on Democrat- and Republican-aligned videos.
    pub comment_alpha_dem: [f64; 3],
    pub comment_alpha_rep: [f64; 3],
    pub topic_catalog: Vec<TopicSpec>,
    pub seed: u64,
}

impl Default for ContentPoolSpec {
    fn default() -> Self {
        let topic = |id: &str, weights: [f64; 5]| TopicSpec {
            id: id.to_string(),
            weights,
        };
        Self {
            n_videos: 20_000,
            n_channels: 200,
            stance_mix: [0.2; 5],
            political_fraction: 0.5,
            election_fraction: 0.5,
            plays: MetricDist::Lognormal { mu: 9.0, sigma: 1.2 },
            shares: MetricDist::Lognormal { mu: 4.0, sigma: 1.5 },
            likes: MetricDist::Lognormal { mu: 7.0, sigma: 1.3 },
            comments: MetricDist::Lognormal { mu: 4.5, sigma: 1.3 },
            duration_secs: MetricDist::Normal { mean: 45.0, sd: 20.0 },
            followers: MetricDist::Lognormal { mu: 11.0, sigma: 2.0 },
            weeks_before: 26,
            weeks_after: 27,
            partisan_channel_fraction: 0.3,
            channel_homophily: 0.95,
            verified_probability: 0.2,
            comment_alpha_dem: [5.0, 1.0, 4.0],
            comment_alpha_rep: [5.0, 1.3, 4.0],
            topic_catalog: vec![
                topic("economy", [1.0, 1.2, 1.2, 1.0, 1.5]),
                topic("immigration", [0.5, 2.0, 2.0, 0.6, 1.0]),
                topic("abortion", [2.0, 0.6, 0.5, 2.0, 0.8]),
                topic("foreign_policy", [1.0, 1.0, 1.0, 1.0, 1.2]),
                topic("crime", [0.6, 1.5, 1.4, 0.6, 1.0]),
                topic("climate", [1.5, 0.6, 0.5, 1.2, 0.8]),
            ],
            seed: 0,
        }
    }
}

impl ContentPoolSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidSpec(m.to_string()));
        if self.stance_mix.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return bad("stance_mix entries must be non-negative");
        }
        if (self.stance_mix.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return bad("stance_mix must sum to 1");
        }
        for (name, p) in [
            ("political_fraction", self.political_fraction),
            ("election_fraction", self.election_fraction),
            ("partisan_channel_fraction", self.partisan_channel_fraction),
            ("channel_homophily", self.channel_homophily),
            ("verified_probability", self.verified_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidSpec(format!("{name} must be in [0, 1]")));
            }
        }
        if self.n_channels == 0 {
            return bad("n_channels must be positive");
        }
        if self.weeks_after <= -self.weeks_before {
            return bad("empty publish-week range");
        }
        if self
            .comment_alpha_dem
            .iter()
            .chain(&self.comment_alpha_rep)
            .any(|a| !(a.is_finite() && *a > 0.0))
        {
            return bad("comment concentrations must be positive");
        }
        for t in &self.topic_catalog {
            if t.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(SimError::InvalidSpec(format!("topic {} has a negative weight", t.id)));
            }
        }
        for d in [self.plays, self.shares, self.likes, self.comments, self.duration_secs, self.followers] {
            d.check()?;
        }
        Ok(())
    }
}

fn pick_weighted(weights: &[f64], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return Some(i);
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0)
}

fn dirichlet3(alpha: [f64; 3], rng: &mut ChaCha8Rng) -> [f64; 3] {
    let g: Vec<f64> = alpha
        .iter()
        .map(|a| Gamma::new(*a, 1.0).expect("checked").sample(rng))
        .collect();
    let s: f64 = g.iter().sum();
    if s > 0.0 {
        [g[0] / s, g[1] / s, g[2] / s]
    } else {
        [1.0 / 3.0; 3]
    }
}

/// Draws a content pool. Output depends only on the spec (including its seed).
///
/// Channels are given a latent lean; partisan videos land on a channel of
/// their own lean with probability `channel_homophily`, otherwise on a
/// uniformly chosen channel. Channel alignment is then set by classifying
/// each channel's political videos, as an auditor would.
pub fn generate_pool(spec: &ContentPoolSpec) -> Result<(Vec<VideoRecord>, Vec<ChannelRecord>), SimError> {
    spec.validate()?;
    let mut rng = rng_from(mix(spec.seed, &[tag::POOL]));

    let n_partisan = (spec.partisan_channel_fraction * spec.n_channels as f64).round() as usize;
    let lean_of = |c: usize| -> Alignment {
        if c < n_partisan {
            if c % 2 == 0 {
                Alignment::DemAligned
            } else {
                Alignment::RepAligned
            }
        } else {
            Alignment::Neutral
        }
    };
    let dem_channels: Vec<usize> = (0..spec.n_channels).filter(|&c| lean_of(c) == Alignment::DemAligned).collect();
    let rep_channels: Vec<usize> = (0..spec.n_channels).filter(|&c| lean_of(c) == Alignment::RepAligned).collect();
    let width = spec.n_channels.to_string().len().max(3);
    let channel_ids: Vec<ChannelId> = (0..spec.n_channels).map(|c| ChannelId::new(format!("c{c:0width$}"))).collect();

    let vwidth = spec.n_videos.to_string().len().max(5);
    let span = (spec.weeks_after + spec.weeks_before) as u32;
    let mut videos = Vec::with_capacity(spec.n_videos);
    let mut owner = Vec::with_capacity(spec.n_videos);
    for i in 0..spec.n_videos {
        let political = rng.random::<f64>() < spec.political_fraction;
        let stance = if political {
            pick_weighted(&spec.stance_mix, &mut rng).map(|k| StanceLabel::ALL[k])
        } else {
            None
        };
        let election = political && rng.random::<f64>() < spec.election_fraction;
        let alignment = stance.map(|s| s.alignment()).unwrap_or(Alignment::Neutral);
        let home = match alignment {
            Alignment::DemAligned => &dem_channels,
            Alignment::RepAligned => &rep_channels,
            Alignment::Neutral => &dem_channels[..0],
        };
        let channel = if !home.is_empty() && rng.random::<f64>() < spec.channel_homophily {
            home[rng.random_range(0..home.len())]
        } else {
            rng.random_range(0..spec.n_channels)
        };

        let mut tries = 0;
        let (plays, shares) = loop {
            let p = spec.plays.sample_count(&mut rng);
            let s = spec.shares.sample_count(&mut rng);
            if s <= p {
                break (p, s);
            }
            tries += 1;
            if tries > 10_000 {
                return Err(SimError::InvalidSpec("shares distribution almost never below plays".into()));
            }
        };
        let likes = spec.likes.sample_count(&mut rng);
        let comments = spec.comments.sample_count(&mut rng);
        let duration_secs = spec.duration_secs.sample_f64(&mut rng).round().max(1.0);
        let publish_week = -spec.weeks_before + rng.random_range(0..span) as i32;

        let (copartisan_comment_prop, opposing_comment_prop) = match alignment {
            Alignment::DemAligned => {
                let d = dirichlet3(spec.comment_alpha_dem, &mut rng);
                (d[0], d[1])
            }
            Alignment::RepAligned => {
                let d = dirichlet3(spec.comment_alpha_rep, &mut rng);
                (d[0], d[1])
            }
            Alignment::Neutral => (0.0, 0.0),
        };
        let topics = match stance {
            Some(s) => {
                let w: Vec<f64> = spec.topic_catalog.iter().map(|t| t.weights[s.index()]).collect();
                pick_weighted(&w, &mut rng)
                    .map(|k| vec![spec.topic_catalog[k].id.clone()])
                    .unwrap_or_default()
            }
            None => Vec::new(),
        };

        owner.push(channel);
        videos.push(VideoRecord {
            video_id: VideoId::new(format!("v{i:0vwidth$}")),
            channel_id: channel_ids[channel].clone(),
            publish_week,
            duration_secs,
            is_political: political,
            is_election_related: election,
            stance,
            topics,
            plays,
            shares,
            likes,
            comments,
            opposing_comment_prop,
            copartisan_comment_prop,
        });
    }

    let mut per_channel: Vec<Vec<usize>> = vec![Vec::new(); spec.n_channels];
    for (i, c) in owner.iter().enumerate() {
        per_channel[*c].push(i);
    }
    let mut channels = Vec::with_capacity(spec.n_channels);
    for (c, vids) in per_channel.iter().enumerate() {
        let stances: Vec<StanceLabel> = vids.iter().filter_map(|&i| videos[i].stance).collect();
        let class = classify_channel(&stances, 10, 0.75);
        channels.push(ChannelRecord {
            channel_id: channel_ids[c].clone(),
            followers: spec.followers.sample_count(&mut rng),
            cumulative_likes: vids.iter().map(|&i| videos[i].likes).sum(),
            video_count: vids.len() as u64,
            verified: rng.random::<f64>() < spec.verified_probability,
            alignment: class.alignment(),
        });
    }
    Ok((videos, channels))
}
