use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::regression::{linear_fit, LineFit};
use super::stats::{chi_squared_test, mean, ChiSquared};
use super::AnalysisError;
use crate::model::{Alignment, Leaning, StanceLabel};

/// `(#Rep-aligned - #Dem-aligned) / #political`. Neutral political videos
/// count in the denominator only; non-political videos are ignored.
pub fn ideological_content(watched: &[(Alignment, bool)]) -> Result<f64, AnalysisError> {
    let mut political = 0usize;
    let mut net = 0i64;
    for &(alignment, is_political) in watched {
        if !is_political {
            continue;
        }
        political += 1;
        net += alignment.sign() as i64;
    }
    if political == 0 {
        return Err(AnalysisError::NoPoliticalContent);
    }
    Ok(net as f64 / political as f64)
}

/// OLS of the weekly mean score on the week index, per condition.
pub fn condition_trends<K: Ord + Clone>(scores: &[(K, u32, f64)]) -> BTreeMap<K, Result<LineFit, AnalysisError>> {
    let mut grouped: BTreeMap<K, BTreeMap<u32, Vec<f64>>> = BTreeMap::new();
    for (k, week, score) in scores {
        grouped.entry(k.clone()).or_default().entry(*week).or_default().push(*score);
    }
    grouped
        .into_iter()
        .map(|(k, weeks)| {
            let xs: Vec<f64> = weeks.keys().map(|w| *w as f64).collect();
            let ys: Vec<f64> = weeks.values().map(|v| mean(v)).collect();
            (k, linear_fit(&xs, &ys))
        })
        .collect()
}

/// Trailing mean over `min(window, i + 1)` elements.
pub fn rolling_average(series: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..series.len())
        .map(|i| {
            let slice = &series[(i + 1).saturating_sub(window)..=i];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

/// Share of a channel's partisan watches that came from bots conditioned
/// on the opposite party. Control bots are skipped.
pub fn mismatch_proportion(watches: &[(Leaning, Alignment)]) -> Result<f64, AnalysisError> {
    let (mut same, mut opposite) = (0usize, 0usize);
    for &(leaning, channel) in watches {
        let Some(home) = leaning.copartisan() else { continue };
        if channel == Alignment::Neutral {
            continue;
        }
        if home == channel {
            same += 1;
        } else {
            opposite += 1;
        }
    }
    if same + opposite == 0 {
        return Err(AnalysisError::NoPartisanWatches);
    }
    Ok(opposite as f64 / (same + opposite) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartisanshipRow {
    pub group: Leaning,
    pub n_political: usize,
    pub pro_democrat: f64,
    pub anti_democrat: f64,
    pub pro_republican: f64,
    pub anti_republican: f64,
    /// Skew over Pro-party videos only; `None` when there are none.
    pub positive_skew: Option<f64>,
    /// Skew over Anti-opposition videos only; `None` when there are none.
    pub negative_skew: Option<f64>,
    /// Anti-Republican outnumbers Pro-Democrat among Dem-aligned videos.
    pub negative_majority_dem_content: bool,
    /// Anti-Democrat outnumbers Pro-Republican among Rep-aligned videos.
    pub negative_majority_rep_content: bool,
}

fn subset_skew(stances: &[StanceLabel], keep: fn(StanceLabel) -> bool) -> Option<f64> {
    let items: Vec<(Alignment, bool)> = stances
        .iter()
        .filter(|s| keep(**s))
        .map(|s| (s.alignment(), true))
        .collect();
    ideological_content(&items).ok()
}

/// Stance shares and positive/negative subset skews per bot group, over
/// the political videos each group watched.
pub fn partisanship_split_report(watches: &[(Leaning, StanceLabel)]) -> Vec<PartisanshipRow> {
    let mut by_group: BTreeMap<Leaning, Vec<StanceLabel>> = BTreeMap::new();
    for &(leaning, stance) in watches {
        by_group.entry(leaning).or_default().push(stance);
    }
    by_group
        .into_iter()
        .map(|(group, stances)| {
            let mut counts = [0usize; 5];
            for s in &stances {
                counts[s.index()] += 1;
            }
            let n = stances.len();
            let share = |s: StanceLabel| counts[s.index()] as f64 / n as f64;
            use StanceLabel::*;
            PartisanshipRow {
                group,
                n_political: n,
                pro_democrat: share(ProDemocrat),
                anti_democrat: share(AntiDemocrat),
                pro_republican: share(ProRepublican),
                anti_republican: share(AntiRepublican),
                positive_skew: subset_skew(&stances, StanceLabel::is_positive_partisan),
                negative_skew: subset_skew(&stances, StanceLabel::is_negative_partisan),
                negative_majority_dem_content: counts[AntiRepublican.index()] > counts[ProDemocrat.index()],
                negative_majority_rep_content: counts[AntiDemocrat.index()] > counts[ProRepublican.index()],
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRow {
    pub topic: String,
    pub n_videos: usize,
    pub dem_share: f64,
    pub rep_share: f64,
    /// `rep_share - dem_share`
    pub difference: f64,
    pub chi_squared: Option<ChiSquared>,
}

/// Per-topic shares among Dem- and Rep-aligned videos. Topics carried by
/// fewer than `min_count` aligned videos are dropped.
pub fn topic_partisan_table<S: AsRef<str>>(videos: &[(Alignment, &[S])], min_count: usize) -> Vec<TopicRow> {
    let mut n_dem = 0usize;
    let mut n_rep = 0usize;
    let mut with: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (alignment, topics) in videos {
        let slot = match alignment {
            Alignment::DemAligned => {
                n_dem += 1;
                0
            }
            Alignment::RepAligned => {
                n_rep += 1;
                1
            }
            Alignment::Neutral => continue,
        };
        let unique: BTreeSet<&str> = topics.iter().map(|t| t.as_ref()).collect();
        for t in unique {
            let e = with.entry(t.to_string()).or_default();
            if slot == 0 {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    if n_dem == 0 || n_rep == 0 {
        return Vec::new();
    }
    with.into_iter()
        .filter(|(_, (d, r))| d + r >= min_count)
        .map(|(topic, (d, r))| {
            let dem_share = d as f64 / n_dem as f64;
            let rep_share = r as f64 / n_rep as f64;
            let table = vec![
                vec![r as f64, (n_rep - r) as f64],
                vec![d as f64, (n_dem - d) as f64],
            ];
            TopicRow {
                topic,
                n_videos: d + r,
                dem_share,
                rep_share,
                difference: rep_share - dem_share,
                chi_squared: chi_squared_test(&table).ok(),
            }
        })
        .collect()
}
