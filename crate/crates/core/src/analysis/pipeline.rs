//! End-to-end analysis of a finished campaign: label what the bots watched,
//! classify channels, score runs, and build every report table.
//!
//! Only matched pairs (truncated to their common length) and control runs
//! with at least `min_control_length` recommendations are analyzed.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counterfactual::{pool_weights, weighted_skew_draws, CounterfactualModelSpec, PoolItem, StanceSubset};
use super::regression::{logistic_fit, vif_screen};
use super::sensitivity::{required_scaling, Family, FamilyParams, SensitivitySpec};
use super::skew::{condition_trends, ideological_content, mismatch_proportion, partisanship_split_report, rolling_average, topic_partisan_table};
use super::stats::{chi_squared_test, mean, t_test_independent, variance, TTestVariant};
use super::weights::{features, Metric, Recency};
use super::AnalysisError;
use crate::harness::{truncated_recommendations, MatchedPair};
use crate::labeling::{
    accuracy, classify_channel, cohen_kappa, confusion_matrix, f1_macro, fleiss_kappa, krippendorff_alpha_nominal,
    label_item, Answer, ChannelClass, Classifier, EnsemblePolicy, ItemLabels, LabelError, LabelItem, OracleClassifier,
    Question,
};
use crate::model::{Alignment, ExperimentRun, Leaning, RunId, StanceLabel};
use crate::seed::{mix, rng_from, tag};
use crate::sim::World;
use crate::special::student_t_quantile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelingOptions {
    pub n_raters: usize,
    /// Symmetric label-noise rate of each oracle rater.
    pub noise_rate: f64,
    pub channel_min_videos: usize,
    pub channel_threshold: f64,
    /// Extra videos fetched for a channel with too few labeled ones.
    pub channel_supplement: usize,
}

impl Default for LabelingOptions {
    fn default() -> Self {
        Self {
            n_raters: 3,
            noise_rate: 0.05,
            channel_min_videos: 10,
            channel_threshold: 0.75,
            channel_supplement: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub seed: u64,
    pub labeling: LabelingOptions,
    pub metrics: Vec<Metric>,
    pub recency_modes: Vec<Recency>,
    pub subsets: Vec<StanceSubset>,
    pub reps: usize,
    pub verified_weight: f64,
    pub verified_sweep: Vec<f64>,
    pub sensitivity_metrics: Vec<Metric>,
    pub sensitivity_families: Vec<Family>,
    pub mc_trials: usize,
    pub search_tolerance: f64,
    pub min_control_length: usize,
    pub weeks_per_month: u32,
    pub topic_min_count: usize,
    pub rolling_window: usize,
    pub vif_threshold: f64,
    /// Ridge used when an unpenalized mismatch model separates.
    pub fallback_ridge: f64,
}

impl AnalysisOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            labeling: LabelingOptions::default(),
            metrics: Metric::ALL.to_vec(),
            recency_modes: vec![Recency::None, Recency::Linear, Recency::exponential()],
            subsets: vec![StanceSubset::All, StanceSubset::Positive, StanceSubset::Negative],
            reps: 100,
            verified_weight: 0.9,
            verified_sweep: (0..=10).map(|i| 0.5 + 0.05 * i as f64).collect(),
            sensitivity_metrics: vec![Metric::CombinedLSPC],
            sensitivity_families: Family::ALL.to_vec(),
            mc_trials: 100,
            search_tolerance: 1e-4,
            min_control_length: 150,
            weeks_per_month: 4,
            topic_min_count: 100,
            rolling_window: 3,
            vif_threshold: 5.0,
            fallback_ridge: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |m: &str| Err(AnalysisError::InvalidSpec(m.to_string()));
        let l = &self.labeling;
        if l.n_raters == 0 {
            return bad("n_raters must be at least 1");
        }
        if !(0.0..=1.0).contains(&l.noise_rate) || !(0.5..=1.0).contains(&l.channel_threshold) {
            return bad("noise_rate must be in [0, 1] and channel_threshold in [0.5, 1]");
        }
        if self.reps == 0 || self.mc_trials == 0 {
            return bad("reps and mc_trials must be positive");
        }
        if !(0.0..=1.0).contains(&self.verified_weight) || self.verified_sweep.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return bad("verified weights must be in [0, 1]");
        }
        if !(self.search_tolerance > 0.0) {
            return bad("search_tolerance must be positive");
        }
        if self.weeks_per_month == 0 || self.rolling_window == 0 {
            return bad("weeks_per_month and rolling_window must be positive");
        }
        if !(self.vif_threshold > 1.0) || !(self.fallback_ridge > 0.0) {
            return bad("vif_threshold must exceed 1 and fallback_ridge must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunScore {
    pub run_id: String,
    pub week: u32,
    pub condition: String,
    pub leaning: Leaning,
    pub role: String,
    pub n_recommendations: usize,
    pub n_political: usize,
    pub political_share: f64,
    pub ideological_content: Option<f64>,
    pub copartisan_share: Option<f64>,
    pub crosspartisan_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSkewRow {
    pub week: u32,
    pub state: String,
    pub dem_run: String,
    pub rep_run: String,
    pub n: usize,
    pub skew: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeekConditionRow {
    pub week: u32,
    pub condition: String,
    pub n_runs: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyRow {
    pub condition: String,
    /// `overall` or the 1-based month number.
    pub month: String,
    pub n_runs: usize,
    pub mean_content: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestRow {
    pub comparison: String,
    pub group_a: String,
    pub group_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: Option<f64>,
    pub df: Option<f64>,
    pub p: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub condition: String,
    pub measure: String,
    pub n_weeks: usize,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub slope_ci_low: Option<f64>,
    pub slope_ci_high: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualRow {
    pub model: String,
    pub metric: Metric,
    pub recency: String,
    pub subset: StanceSubset,
    pub weeks: usize,
    pub mean: Option<f64>,
    pub std_error: Option<f64>,
    pub expected: Option<f64>,
    pub observed_mean: Option<f64>,
    pub t: Option<f64>,
    pub df: Option<f64>,
    pub p: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifiedSweepRow {
    pub verified_weight: f64,
    pub weeks: usize,
    pub mean: Option<f64>,
    pub std_error: Option<f64>,
    pub expected: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub metric: Metric,
    pub family: Family,
    pub observed_gap: Option<f64>,
    pub target_skew: Option<f64>,
    pub s_zero: Option<f64>,
    pub delta_star: Option<f64>,
    pub k: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchChannelRow {
    pub channel_id: String,
    pub alignment: Alignment,
    pub n_watches: usize,
    pub mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchTestRow {
    pub rep_channels_mismatched: u64,
    pub rep_channels_matched: u64,
    pub dem_channels_mismatched: u64,
    pub dem_channels_matched: u64,
    pub chi_squared: Option<f64>,
    pub df: Option<f64>,
    pub p: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub model: String,
    pub term: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub z: f64,
    pub p: f64,
    pub odds_ratio: f64,
    pub or_ci_low: f64,
    pub or_ci_high: f64,
    pub ridge: f64,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifRow {
    pub model: String,
    pub term: String,
    pub vif: f64,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartisanshipTableRow {
    pub group: Leaning,
    pub n_political: usize,
    pub pro_democrat: f64,
    pub anti_democrat: f64,
    pub pro_republican: f64,
    pub anti_republican: f64,
    pub positive_skew: Option<f64>,
    pub negative_skew: Option<f64>,
    pub negative_majority_dem_content: bool,
    pub negative_majority_rep_content: bool,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicTableRow {
    pub topic: String,
    pub n_videos: usize,
    pub dem_share: f64,
    pub rep_share: f64,
    pub difference: f64,
    pub chi_squared: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub question: String,
    pub metric: String,
    pub n_items: usize,
    pub value: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelClassRow {
    pub channel_id: String,
    pub n_labeled: usize,
    pub supplemented: usize,
    pub dem_share: f64,
    pub rep_share: f64,
    pub class: ChannelClass,
    pub reference: Option<Alignment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentRow {
    pub alignment: Alignment,
    pub n_videos: usize,
    pub mean_copartisan: f64,
    pub mean_opposing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingRow {
    pub leaning: Leaning,
    pub week: u32,
    pub political_share: f64,
    pub rolling: f64,
}

/// Every table the analysis produces.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResults {
    pub run_scores: Vec<RunScore>,
    pub pair_skews: Vec<PairSkewRow>,
    /// Unweighted mean of the matched-pair skews.
    pub pooled_skew: Option<f64>,
    pub skew_by_week: Vec<WeekConditionRow>,
    pub monthly_content: Vec<MonthlyRow>,
    pub t_tests: Vec<TTestRow>,
    pub trends: Vec<TrendRow>,
    pub counterfactuals: Vec<CounterfactualRow>,
    pub verified_sweep: Vec<VerifiedSweepRow>,
    pub sensitivity: Vec<SensitivityRow>,
    pub mismatch_channels: Vec<MismatchChannelRow>,
    pub mismatch_test: Vec<MismatchTestRow>,
    pub regression: Vec<RegressionRow>,
    pub vif: Vec<VifRow>,
    pub partisanship: Vec<PartisanshipTableRow>,
    pub topics: Vec<TopicTableRow>,
    pub agreement: Vec<AgreementRow>,
    pub channel_classes: Vec<ChannelClassRow>,
    pub comments: Vec<CommentRow>,
    pub rolling_political: Vec<RollingRow>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Pair,
    Control,
}

struct RunView<'a> {
    run: &'a ExperimentRun,
    role: Role,
    videos: Vec<usize>,
}

impl RunView<'_> {
    fn leaning(&self) -> Leaning {
        self.run.condition.leaning
    }
}

/// Labels and derived alignment of the watched videos.
struct Labels {
    items: HashMap<usize, ItemLabels>,
}

impl Labels {
    fn get(&self, video: usize) -> &ItemLabels {
        &self.items[&video]
    }

    /// Political videos with a resolved stance.
    fn stance(&self, video: usize) -> Option<StanceLabel> {
        let l = self.get(video);
        if l.political {
            l.stance
        } else {
            None
        }
    }

    /// `(alignment, political)` for skew scoring; political videos whose
    /// stance vote did not resolve are left out.
    fn scored(&self, video: usize) -> Option<(Alignment, bool)> {
        let l = self.get(video);
        match (l.political, l.stance) {
            (false, _) => Some((Alignment::Neutral, false)),
            (true, Some(s)) => Some((s.alignment(), true)),
            (true, None) => None,
        }
    }
}

fn raters(opts: &AnalysisOptions) -> (Vec<OracleClassifier>, EnsemblePolicy) {
    let n = opts.labeling.n_raters.max(1);
    let raters: Vec<OracleClassifier> = (0..n)
        .map(|i| {
            OracleClassifier::new(
                format!("rater-{}", i + 1),
                opts.labeling.noise_rate,
                mix(opts.seed, &[tag::LABELING, i as u64]),
            )
        })
        .collect();
    let policy = EnsemblePolicy {
        n_raters: n,
        binary_tiebreaker_rater: (n % 2 == 1 && n > 1).then(|| raters[n - 1].id.clone()),
    };
    (raters, policy)
}

fn label_videos(
    world: &World,
    videos: &BTreeSet<usize>,
    raters: &[OracleClassifier],
    policy: &EnsemblePolicy,
) -> Result<Vec<(usize, ItemLabels)>, AnalysisError> {
    let refs: Vec<&dyn Classifier> = raters.iter().map(|r| r as &dyn Classifier).collect();
    let list: Vec<usize> = videos.iter().copied().collect();
    list.par_iter()
        .map(|&v| {
            label_item(&LabelItem::from(world.video(v)), &refs, policy)
                .map(|l| (v, l))
                .map_err(|e| AnalysisError::InvalidSpec(format!("labeling {}: {e}", world.video(v).video_id)))
        })
        .collect()
}

fn t_row(comparison: &str, group_a: &str, a: &[f64], group_b: &str, b: &[f64]) -> TTestRow {
    let base = TTestRow {
        comparison: comparison.into(),
        group_a: group_a.into(),
        group_b: group_b.into(),
        n_a: a.len(),
        n_b: b.len(),
        mean_a: mean(a),
        mean_b: mean(b),
        t: None,
        df: None,
        p: None,
        status: "ok".into(),
    };
    match t_test_independent(a, b, TTestVariant::Welch) {
        Ok(t) => TTestRow {
            t: Some(t.t),
            df: Some(t.df),
            p: Some(t.p),
            ..base
        },
        Err(e) => TTestRow {
            status: e.to_string(),
            ..base
        },
    }
}

fn mean_ci(xs: &[f64]) -> (f64, f64, f64) {
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, f64::NAN, f64::NAN);
    }
    let half = student_t_quantile(0.975, (xs.len() - 1) as f64) * (variance(xs) / xs.len() as f64).sqrt();
    (m, m - half, m + half)
}

fn status_of<T>(r: &Result<T, AnalysisError>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => e.to_string(),
    }
}

/// Runs the whole analysis over a campaign's runs and matched pairs.
pub fn analyze(
    world: &World,
    runs: &[ExperimentRun],
    pairs: &[MatchedPair],
    opts: &AnalysisOptions,
) -> Result<AnalysisResults, AnalysisError> {
    let by_id: HashMap<&RunId, &ExperimentRun> = runs.iter().map(|r| (&r.run_id, r)).collect();
    let resolve = |run: &ExperimentRun, n: usize| -> Result<Vec<usize>, AnalysisError> {
        truncated_recommendations(run, n)
            .into_iter()
            .map(|e| {
                world
                    .find(&e.video_id)
                    .ok_or_else(|| AnalysisError::InvalidSpec(format!("run {} watched unknown video {}", run.run_id, e.video_id)))
            })
            .collect()
    };
    let mut views: Vec<RunView> = Vec::new();
    let mut pair_views: Vec<(usize, usize, &MatchedPair)> = Vec::new();
    for p in pairs {
        let lookup = |id: &RunId| {
            by_id
                .get(id)
                .copied()
                .ok_or_else(|| AnalysisError::InvalidSpec(format!("pair references missing run {id}")))
        };
        let (d, r) = (lookup(&p.dem_run)?, lookup(&p.rep_run)?);
        views.push(RunView {
            run: d,
            role: Role::Pair,
            videos: resolve(d, p.n)?,
        });
        views.push(RunView {
            run: r,
            role: Role::Pair,
            videos: resolve(r, p.n)?,
        });
        pair_views.push((views.len() - 2, views.len() - 1, p));
    }
    for r in runs {
        if r.condition.leaning == Leaning::NeutralControl && r.recommendation_count() >= opts.min_control_length {
            views.push(RunView {
                run: r,
                role: Role::Control,
                videos: resolve(r, usize::MAX)?,
            });
        }
    }

    let (raters, policy) = raters(opts);
    let watched: BTreeSet<usize> = views.iter().flat_map(|v| v.videos.iter().copied()).collect();
    let mut labels = Labels {
        items: label_videos(world, &watched, &raters, &policy)?.into_iter().collect(),
    };

    let mut out = AnalysisResults::default();
    let (channel_rows, channel_class) = classify_channels(world, &watched, &mut labels, &raters, &policy, opts)?;
    out.channel_classes = channel_rows;
    out.agreement = agreement_rows(world, &labels);

    score_runs(&views, &labels, &mut out);
    let pair_skews = pair_skew_rows(&views, &pair_views, &labels);
    let valid: Vec<f64> = pair_skews.iter().filter_map(|p| p.skew).collect();
    out.pooled_skew = (!valid.is_empty()).then(|| mean(&valid));
    out.pair_skews = pair_skews;
    tables_by_condition(&mut out, opts);

    let weekly_observed = weekly_observed_skews(&out.pair_skews);
    let pools = weekly_pools(world, &views, &labels);
    let draws = weekly_draws(&out.run_scores);
    out.counterfactuals = counterfactual_rows(&pools, &draws, &weekly_observed, opts);
    out.verified_sweep = verified_sweep_rows(&pools, &draws, opts);
    out.sensitivity = sensitivity_rows(&pools, out.pooled_skew, opts);

    mismatch_tables(world, &views, &channel_class, opts, &mut out);

    let split_input: Vec<(Leaning, StanceLabel)> = views
        .iter()
        .flat_map(|v| v.videos.iter().filter_map(|&i| labels.stance(i)).map(|s| (v.leaning(), s)))
        .collect();
    out.partisanship = partisanship_split_report(&split_input)
        .into_iter()
        .map(|r| {
            let status = match (r.positive_skew, r.negative_skew) {
                (Some(_), Some(_)) => "ok".to_string(),
                (None, Some(_)) => "insufficient data: no positive-partisan videos".into(),
                (Some(_), None) => "insufficient data: no negative-partisan videos".into(),
                (None, None) => "insufficient data".into(),
            };
            PartisanshipTableRow {
                group: r.group,
                n_political: r.n_political,
                pro_democrat: r.pro_democrat,
                anti_democrat: r.anti_democrat,
                pro_republican: r.pro_republican,
                anti_republican: r.anti_republican,
                positive_skew: r.positive_skew,
                negative_skew: r.negative_skew,
                negative_majority_dem_content: r.negative_majority_dem_content,
                negative_majority_rep_content: r.negative_majority_rep_content,
                status,
            }
        })
        .collect();

    let aligned_watched: Vec<(Alignment, &[String])> = watched
        .iter()
        .filter_map(|&v| labels.stance(v).map(|s| (s.alignment(), world.video(v).topics.as_slice())))
        .collect();
    out.topics = topic_partisan_table(&aligned_watched, opts.topic_min_count)
        .into_iter()
        .map(|r| TopicTableRow {
            topic: r.topic,
            n_videos: r.n_videos,
            dem_share: r.dem_share,
            rep_share: r.rep_share,
            difference: r.difference,
            chi_squared: r.chi_squared.map(|c| c.statistic),
            p: r.chi_squared.map(|c| c.p),
        })
        .collect();

    comment_tables(world, &watched, &labels, &mut out);
    out.rolling_political = rolling_rows(&out.run_scores, opts.rolling_window);
    Ok(out)
}

fn classify_channels(
    world: &World,
    watched: &BTreeSet<usize>,
    labels: &mut Labels,
    raters: &[OracleClassifier],
    policy: &EnsemblePolicy,
    opts: &AnalysisOptions,
) -> Result<(Vec<ChannelClassRow>, HashMap<usize, ChannelClass>), AnalysisError> {
    let lo = &opts.labeling;
    let mut per_channel: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &v in watched {
        per_channel.entry(world.channel_index_of(v)).or_default().push(v);
    }
    let stances_of = |labels: &Labels, vids: &[usize]| -> Vec<StanceLabel> { vids.iter().filter_map(|&v| labels.stance(v)).collect() };
    // channels short of labeled videos get a batch of their newest unwatched ones
    let mut extra: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&c, vids) in &per_channel {
        if stances_of(labels, vids).len() < lo.channel_min_videos {
            let more: Vec<usize> = world
                .channel_videos(c)
                .iter()
                .copied()
                .filter(|v| !watched.contains(v))
                .take(lo.channel_supplement)
                .collect();
            extra.insert(c, more);
        }
    }
    let to_label: BTreeSet<usize> = extra.values().flatten().copied().collect();
    labels.items.extend(label_videos(world, &to_label, raters, policy)?);

    let mut rows = Vec::new();
    let mut classes = HashMap::new();
    for (c, vids) in per_channel {
        let supplement = extra.get(&c).cloned().unwrap_or_default();
        let all: Vec<usize> = vids.iter().chain(&supplement).copied().collect();
        let stances = stances_of(labels, &all);
        let class = classify_channel(&stances, lo.channel_min_videos, lo.channel_threshold);
        let n = stances.len().max(1) as f64;
        let count = |a: Alignment| stances.iter().filter(|s| s.alignment() == a).count() as f64 / n;
        rows.push(ChannelClassRow {
            channel_id: world.channels()[c].channel_id.0.clone(),
            n_labeled: stances.len(),
            supplemented: supplement.len(),
            dem_share: count(Alignment::DemAligned),
            rep_share: count(Alignment::RepAligned),
            class,
            reference: world.channels()[c].alignment,
        });
        classes.insert(c, class);
    }
    Ok((rows, classes))
}

fn agreement_rows(world: &World, labels: &Labels) -> Vec<AgreementRow> {
    let mut rows = Vec::new();
    let mut ids: Vec<&usize> = labels.items.keys().collect();
    ids.sort();
    let mut push = |question: &str, metric: &str, n: usize, r: Result<f64, LabelError>| {
        rows.push(AgreementRow {
            question: question.into(),
            metric: metric.into(),
            n_items: n,
            value: r.as_ref().ok().copied(),
            status: r.err().map_or("ok".into(), |e| e.to_string()),
        })
    };
    for q in [Question::Political, Question::Stance] {
        let matrix: Vec<Vec<String>> = ids
            .iter()
            .filter_map(|&&v| {
                let l = labels.get(v);
                let answers: Vec<String> = l
                    .verdicts
                    .iter()
                    .filter(|x| x.question == q)
                    .map(|x| match x.answer {
                        Answer::Binary(b) => b.to_string(),
                        Answer::Stance(s) => s.as_str().to_string(),
                    })
                    .collect();
                (!answers.is_empty()).then_some(answers)
            })
            .collect();
        // raters × items
        let n_raters = matrix.first().map_or(0, Vec::len);
        let matrix: Vec<Vec<String>> = if matrix.iter().all(|r| r.len() == n_raters) {
            (0..n_raters).map(|j| matrix.iter().map(|r| r[j].clone()).collect()).collect()
        } else {
            Vec::new()
        };
        let n_items = matrix.first().map_or(0, Vec::len);
        let with_missing: Vec<Vec<Option<String>>> = matrix.iter().map(|r| r.iter().cloned().map(Some).collect()).collect();
        push(q.as_str(), "fleiss_kappa", n_items, fleiss_kappa(&matrix));
        push(
            q.as_str(),
            "krippendorff_alpha",
            n_items,
            krippendorff_alpha_nominal(&with_missing),
        );
    }
    // ensemble labels against the simulator's ground truth
    let political: (Vec<bool>, Vec<bool>) = ids
        .iter()
        .map(|&&v| (world.video(v).is_political, labels.get(v).political))
        .unzip();
    let stance: (Vec<StanceLabel>, Vec<StanceLabel>) = ids
        .iter()
        .filter_map(|&&v| {
            let truth = world.video(v);
            let l = labels.get(v);
            match (truth.is_political && l.political, truth.stance, l.stance) {
                (true, Some(t), Some(s)) => Some((t, s)),
                _ => None,
            }
        })
        .unzip();
    for (q, n, cm) in [
        ("political_vs_truth", political.0.len(), confusion_matrix(&political.0, &political.1).map(|c| c.1)),
        ("stance_vs_truth", stance.0.len(), confusion_matrix(&stance.0, &stance.1).map(|c| c.1)),
    ] {
        push(q, "accuracy", n, cm.clone().and_then(|c| accuracy(&c)));
        push(q, "cohen_kappa", n, cm.clone().and_then(|c| cohen_kappa(&c)));
        push(q, "f1_macro", n, cm.and_then(|c| f1_macro(&c)));
    }
    let political_items = ids.iter().filter(|&&&v| labels.get(v).political).count();
    let resolved = ids.iter().filter(|&&&v| labels.stance(v).is_some()).count();
    push(
        "stance",
        "majority_rate",
        political_items,
        if political_items == 0 {
            Err(LabelError::NoVerdicts)
        } else {
            Ok(resolved as f64 / political_items as f64)
        },
    );
    rows
}

fn score_runs(views: &[RunView], labels: &Labels, out: &mut AnalysisResults) {
    for v in views {
        let scored: Vec<(Alignment, bool)> = v.videos.iter().filter_map(|&i| labels.scored(i)).collect();
        let n_political = v.videos.iter().filter(|&&i| labels.get(i).political).count();
        let stanced: Vec<Alignment> = scored.iter().filter(|s| s.1).map(|s| s.0).collect();
        let share = |a: Option<Alignment>| -> Option<f64> {
            let a = a?;
            (!stanced.is_empty()).then(|| stanced.iter().filter(|x| **x == a).count() as f64 / stanced.len() as f64)
        };
        let home = v.leaning().copartisan();
        out.run_scores.push(RunScore {
            run_id: v.run.run_id.0.clone(),
            week: v.run.week,
            condition: v.run.condition.to_string(),
            leaning: v.leaning(),
            role: if v.role == Role::Pair { "pair" } else { "control" }.into(),
            n_recommendations: v.videos.len(),
            n_political,
            political_share: if v.videos.is_empty() {
                0.0
            } else {
                n_political as f64 / v.videos.len() as f64
            },
            ideological_content: ideological_content(&scored).ok(),
            copartisan_share: share(home),
            crosspartisan_share: share(home.map(Alignment::opposite)),
        });
    }
}

fn pair_skew_rows(views: &[RunView], pairs: &[(usize, usize, &MatchedPair)], labels: &Labels) -> Vec<PairSkewRow> {
    pairs
        .iter()
        .map(|&(d, r, p)| {
            let scored: Vec<(Alignment, bool)> = views[d]
                .videos
                .iter()
                .chain(&views[r].videos)
                .filter_map(|&i| labels.scored(i))
                .collect();
            PairSkewRow {
                week: p.week,
                state: p.state.code().into(),
                dem_run: p.dem_run.0.clone(),
                rep_run: p.rep_run.0.clone(),
                n: p.n,
                skew: ideological_content(&scored).ok(),
            }
        })
        .collect()
}

fn tables_by_condition(out: &mut AnalysisResults, opts: &AnalysisOptions) {
    let mut by_week: BTreeMap<(u32, String), Vec<f64>> = BTreeMap::new();
    let mut by_month: BTreeMap<(String, u32), Vec<f64>> = BTreeMap::new();
    let mut overall: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let per_month = opts.weeks_per_month.max(1);
    for r in &out.run_scores {
        if let Some(c) = r.ideological_content {
            by_week.entry((r.week, r.condition.clone())).or_default().push(c);
            by_month.entry((r.condition.clone(), r.week / per_month + 1)).or_default().push(c);
            overall.entry(r.condition.clone()).or_default().push(c);
        }
    }
    out.skew_by_week = by_week
        .into_iter()
        .map(|((week, condition), xs)| {
            let (mean, ci_low, ci_high) = mean_ci(&xs);
            WeekConditionRow {
                week,
                condition,
                n_runs: xs.len(),
                mean,
                ci_low,
                ci_high,
            }
        })
        .collect();
    for (condition, xs) in &overall {
        for ((c, month), m) in by_month.iter().filter(|((c, _), _)| c == condition) {
            out.monthly_content.push(MonthlyRow {
                condition: c.clone(),
                month: month.to_string(),
                n_runs: m.len(),
                mean_content: mean(m),
            });
        }
        out.monthly_content.push(MonthlyRow {
            condition: condition.clone(),
            month: "overall".into(),
            n_runs: xs.len(),
            mean_content: mean(xs),
        });
    }

    let pick = |leaning: Leaning, f: fn(&RunScore) -> Option<f64>| -> Vec<f64> {
        out.run_scores
            .iter()
            .filter(|r| r.leaning == leaning && r.role == "pair")
            .filter_map(f)
            .collect()
    };
    let content: fn(&RunScore) -> Option<f64> = |r| r.ideological_content;
    let co: fn(&RunScore) -> Option<f64> = |r| r.copartisan_share;
    let cross: fn(&RunScore) -> Option<f64> = |r| r.crosspartisan_share;
    let (rep, dem) = ("republican", "democrat");
    out.t_tests.push(t_row(
        "ideological_content",
        rep,
        &pick(Leaning::Republican, content),
        dem,
        &pick(Leaning::Democrat, content),
    ));
    out.t_tests.push(t_row(
        "copartisan_share",
        rep,
        &pick(Leaning::Republican, co),
        dem,
        &pick(Leaning::Democrat, co),
    ));
    out.t_tests.push(t_row(
        "crosspartisan_share",
        rep,
        &pick(Leaning::Republican, cross),
        dem,
        &pick(Leaning::Democrat, cross),
    ));

    for (measure, f) in [("ideological_content", content), ("copartisan_share", co)] {
        let points: Vec<(String, u32, f64)> = out
            .run_scores
            .iter()
            .filter(|r| measure == "ideological_content" || r.leaning.is_partisan())
            .filter_map(|r| f(r).map(|v| (r.condition.clone(), r.week, v)))
            .collect();
        let weeks: BTreeMap<&str, BTreeSet<u32>> = points.iter().fold(BTreeMap::new(), |mut m, (c, w, _)| {
            m.entry(c.as_str()).or_default().insert(*w);
            m
        });
        for (condition, fit) in condition_trends(&points) {
            let n_weeks = weeks.get(condition.as_str()).map_or(0, BTreeSet::len);
            out.trends.push(TrendRow {
                status: status_of(&fit),
                condition,
                measure: measure.into(),
                n_weeks,
                slope: fit.as_ref().ok().map(|f| f.slope),
                intercept: fit.as_ref().ok().map(|f| f.intercept),
                slope_ci_low: fit.as_ref().ok().map(|f| f.slope_ci_low),
                slope_ci_high: fit.as_ref().ok().map(|f| f.slope_ci_high),
            });
        }
    }
}

fn weekly_observed_skews(pairs: &[PairSkewRow]) -> BTreeMap<u32, f64> {
    let mut by_week: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for p in pairs {
        if let Some(s) = p.skew {
            by_week.entry(p.week).or_default().push(s);
        }
    }
    by_week.into_iter().map(|(w, xs)| (w, mean(&xs))).collect()
}

/// Stanced political videos seen by analyzed bots during or before each
/// week that has matched pairs.
fn weekly_pools(world: &World, views: &[RunView], labels: &Labels) -> BTreeMap<u32, Vec<(usize, PoolItem)>> {
    let mut seen: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
    for v in views {
        seen.entry(v.run.week)
            .or_default()
            .extend(v.videos.iter().copied().filter(|&i| labels.stance(i).is_some()));
    }
    let pair_weeks: BTreeSet<u32> = views.iter().filter(|v| v.role == Role::Pair).map(|v| v.run.week).collect();
    let mut cumulative = BTreeSet::new();
    let mut out = BTreeMap::new();
    for (week, vids) in seen {
        cumulative.extend(vids);
        if pair_weeks.contains(&week) {
            let pool = cumulative
                .iter()
                .map(|&i| {
                    let video = world.video(i);
                    (
                        i,
                        PoolItem {
                            stance: labels.stance(i).expect("stanced"),
                            publish_week: video.publish_week,
                            features: features(video, world.channel_of(i)),
                        },
                    )
                })
                .collect();
            out.insert(week, pool);
        }
    }
    out
}

/// Draws per counterfactual rep: the mean number of political
/// recommendations per pair run that week.
fn weekly_draws(scores: &[RunScore]) -> BTreeMap<u32, usize> {
    let mut by_week: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for r in scores.iter().filter(|r| r.role == "pair") {
        by_week.entry(r.week).or_default().push(r.n_political as f64);
    }
    by_week
        .into_iter()
        .map(|(w, xs)| (w, (mean(&xs).round() as usize).max(1)))
        .collect()
}

struct WeeklyCf {
    means: Vec<f64>,
    ses: Vec<f64>,
    expected: Vec<f64>,
    weeks: Vec<u32>,
}

fn run_model(
    pools: &BTreeMap<u32, Vec<(usize, PoolItem)>>,
    draws: &BTreeMap<u32, usize>,
    spec: &CounterfactualModelSpec,
    subset: StanceSubset,
    seed: u64,
) -> Result<WeeklyCf, AnalysisError> {
    let mut acc = WeeklyCf {
        means: Vec::new(),
        ses: Vec::new(),
        expected: Vec::new(),
        weeks: Vec::new(),
    };
    for (&week, pool) in pools {
        let items: Vec<PoolItem> = pool.iter().map(|p| p.1.clone()).filter(|p| subset.admits(p.stance)).collect();
        let weights = pool_weights(&items, spec, week as i32)?;
        let alignments: Vec<Alignment> = items.iter().map(PoolItem::alignment).collect();
        let mut rng = rng_from(mix(seed, &[week as u64]));
        let r = weighted_skew_draws(&alignments, &weights, draws[&week], spec.reps, &mut rng)?;
        acc.means.push(r.mean);
        acc.ses.push(r.std_error);
        acc.expected.push(r.expected);
        acc.weeks.push(week);
    }
    if acc.weeks.is_empty() {
        return Err(AnalysisError::EmptyPool);
    }
    Ok(acc)
}

fn combined_se(ses: &[f64]) -> f64 {
    ses.iter().map(|s| s * s).sum::<f64>().sqrt() / ses.len() as f64
}

fn counterfactual_rows(
    pools: &BTreeMap<u32, Vec<(usize, PoolItem)>>,
    draws: &BTreeMap<u32, usize>,
    observed: &BTreeMap<u32, f64>,
    opts: &AnalysisOptions,
) -> Vec<CounterfactualRow> {
    let mut tasks = Vec::new();
    for (mi, &metric) in opts.metrics.iter().enumerate() {
        for (ri, &recency) in opts.recency_modes.iter().enumerate() {
            for &subset in &opts.subsets {
                tasks.push((mi, ri, metric, recency, subset));
            }
        }
    }
    tasks
        .par_iter()
        .map(|&(mi, ri, metric, recency, subset)| {
            let spec = CounterfactualModelSpec {
                metric,
                recency,
                verified_weight: opts.verified_weight,
                reps: opts.reps,
            };
            let seed = mix(opts.seed, &[tag::COUNTERFACTUAL, mi as u64, ri as u64, subset as u64]);
            let res = run_model(pools, draws, &spec, subset, seed);
            let mut row = CounterfactualRow {
                model: spec.label(),
                metric,
                recency: recency.as_str().into(),
                subset,
                weeks: 0,
                mean: None,
                std_error: None,
                expected: None,
                observed_mean: None,
                t: None,
                df: None,
                p: None,
                status: status_of(&res),
            };
            if let Ok(cf) = res {
                let obs: Vec<f64> = cf.weeks.iter().filter_map(|w| observed.get(w).copied()).collect();
                row.weeks = cf.weeks.len();
                row.mean = Some(mean(&cf.means));
                row.std_error = Some(combined_se(&cf.ses));
                row.expected = Some(mean(&cf.expected));
                row.observed_mean = (!obs.is_empty()).then(|| mean(&obs));
                match t_test_independent(&obs, &cf.means, TTestVariant::Welch) {
                    Ok(t) => {
                        row.t = Some(t.t);
                        row.df = Some(t.df);
                        row.p = Some(t.p);
                    }
                    Err(e) => row.status = format!("t-test: {e}"),
                }
            }
            row
        })
        .collect()
}

fn verified_sweep_rows(
    pools: &BTreeMap<u32, Vec<(usize, PoolItem)>>,
    draws: &BTreeMap<u32, usize>,
    opts: &AnalysisOptions,
) -> Vec<VerifiedSweepRow> {
    opts.verified_sweep
        .par_iter()
        .enumerate()
        .map(|(i, &vw)| {
            let spec = CounterfactualModelSpec {
                metric: Metric::ChannelVerified,
                recency: Recency::None,
                verified_weight: vw,
                reps: opts.reps,
            };
            let res = run_model(pools, draws, &spec, StanceSubset::All, mix(opts.seed, &[tag::COUNTERFACTUAL, 0xEE, i as u64]));
            VerifiedSweepRow {
                verified_weight: vw,
                weeks: res.as_ref().map_or(0, |r| r.weeks.len()),
                mean: res.as_ref().ok().map(|r| mean(&r.means)),
                std_error: res.as_ref().ok().map(|r| combined_se(&r.ses)),
                expected: res.as_ref().ok().map(|r| mean(&r.expected)),
                status: status_of(&res),
            }
        })
        .collect()
}

/// Base distribution for a family from the Dem-aligned side of a metric.
pub fn family_params(family: Family, dem_mean: f64, dem_sd: f64) -> FamilyParams {
    match family {
        Family::Normal => FamilyParams::Normal {
            mean: dem_mean,
            sd: dem_sd,
        },
        Family::Lognormal => FamilyParams::Lognormal {
            mean: dem_mean,
            sigma: (1.0 + (dem_sd / dem_mean).powi(2)).ln().sqrt(),
        },
        Family::Poisson => FamilyParams::Poisson {
            mean: dem_mean,
            resolution: 1000.0,
        },
        Family::Binomial => FamilyParams::Binomial {
            mean: dem_mean.clamp(0.0, 1.0),
            trials: 1000,
        },
    }
}

fn sensitivity_rows(
    pools: &BTreeMap<u32, Vec<(usize, PoolItem)>>,
    target: Option<f64>,
    opts: &AnalysisOptions,
) -> Vec<SensitivityRow> {
    let mut rows = Vec::new();
    let pool: Vec<PoolItem> = pools.values().last().map(|p| p.iter().map(|x| x.1.clone()).collect()).unwrap_or_default();
    let alignments: Vec<Alignment> = pool.iter().map(PoolItem::alignment).collect();
    for (mi, &metric) in opts.sensitivity_metrics.iter().enumerate() {
        let spec = CounterfactualModelSpec {
            metric,
            recency: Recency::None,
            verified_weight: opts.verified_weight,
            reps: 1,
        };
        let values = pool_weights(&pool, &spec, 0);
        for (fi, &family) in opts.sensitivity_families.iter().enumerate() {
            let mut row = SensitivityRow {
                metric,
                family,
                observed_gap: None,
                target_skew: target,
                s_zero: None,
                delta_star: None,
                k: None,
                status: "ok".into(),
            };
            let result = values.clone().and_then(|v| {
                let side = |a: Alignment| -> Vec<f64> { v.iter().zip(&alignments).filter(|x| *x.1 == a).map(|x| *x.0).collect() };
                let (dem, rep) = (side(Alignment::DemAligned), side(Alignment::RepAligned));
                if dem.len() < 2 || rep.is_empty() {
                    return Err(AnalysisError::InsufficientData("pool lacks aligned videos".into()));
                }
                let gap = mean(&rep) - mean(&dem);
                row.observed_gap = Some(gap);
                let target = target.ok_or(AnalysisError::InsufficientData("no observed skew".into()))?;
                let spec = SensitivitySpec {
                    params: family_params(family, mean(&dem), variance(&dem).sqrt()),
                    target_skew: target,
                    mc_trials: opts.mc_trials,
                    search_tolerance: opts.search_tolerance,
                };
                let mut rng = rng_from(mix(opts.seed, &[tag::SENSITIVITY, mi as u64, fi as u64]));
                required_scaling(&alignments, &spec, gap, &mut rng)
            });
            match result {
                Ok(r) => {
                    row.s_zero = Some(r.s_zero);
                    row.delta_star = Some(r.delta_star);
                    row.k = Some(r.k);
                }
                Err(e) => row.status = e.to_string(),
            }
            rows.push(row);
        }
    }
    rows
}

const M1: &[&str] = &["democrat"];
const M2: &[&str] = &[
    "democrat",
    "log_plays",
    "log_likes",
    "log_shares",
    "log_comments",
    "log_channel_followers",
    "channel_verified",
];
const M3: &[&str] = &[
    "democrat",
    "log_plays",
    "log_likes",
    "log_shares",
    "log_comments",
    "log_channel_followers",
    "channel_verified",
    "copartisan_comment_prop",
    "opposing_comment_prop",
];

fn predictor(world: &World, video: usize, leaning: Leaning, name: &str) -> f64 {
    let v = world.video(video);
    let c = world.channel_of(video);
    match name {
        "democrat" => (leaning == Leaning::Democrat) as u8 as f64,
        "log_plays" => (v.plays as f64).ln_1p(),
        "log_likes" => (v.likes as f64).ln_1p(),
        "log_shares" => (v.shares as f64).ln_1p(),
        "log_comments" => (v.comments as f64).ln_1p(),
        "log_channel_followers" => (c.followers as f64).ln_1p(),
        "channel_verified" => c.verified as u8 as f64,
        "copartisan_comment_prop" => v.copartisan_comment_prop,
        "opposing_comment_prop" => v.opposing_comment_prop,
        _ => unreachable!("unknown predictor {name}"),
    }
}

fn mismatch_tables(
    world: &World,
    views: &[RunView],
    classes: &HashMap<usize, ChannelClass>,
    opts: &AnalysisOptions,
    out: &mut AnalysisResults,
) {
    // (video, bot leaning, channel alignment) for every partisan watch of an aligned channel
    let mut watches: Vec<(usize, Leaning, Alignment)> = Vec::new();
    let mut per_channel: BTreeMap<usize, Vec<(Leaning, Alignment)>> = BTreeMap::new();
    for v in views.iter().filter(|v| v.leaning().is_partisan()) {
        for &i in &v.videos {
            let c = world.channel_index_of(i);
            let Some(a) = classes.get(&c).and_then(|k| k.alignment()).filter(|a| *a != Alignment::Neutral) else {
                continue;
            };
            watches.push((i, v.leaning(), a));
            per_channel.entry(c).or_default().push((v.leaning(), a));
        }
    }
    let mut channel_rows: Vec<MismatchChannelRow> = per_channel
        .iter()
        .filter_map(|(&c, w)| {
            mismatch_proportion(w).ok().map(|m| MismatchChannelRow {
                channel_id: world.channels()[c].channel_id.0.clone(),
                alignment: w[0].1,
                n_watches: w.len(),
                mismatch: m,
            })
        })
        .collect();
    channel_rows.sort_by(|a, b| b.n_watches.cmp(&a.n_watches).then_with(|| a.channel_id.cmp(&b.channel_id)));
    out.mismatch_channels = channel_rows;

    let mismatched = |w: &(usize, Leaning, Alignment)| w.1.copartisan() != Some(w.2);
    let count = |a: Alignment, mm: bool| watches.iter().filter(|w| w.2 == a && mismatched(w) == mm).count() as u64;
    let table = [
        [count(Alignment::RepAligned, true), count(Alignment::RepAligned, false)],
        [count(Alignment::DemAligned, true), count(Alignment::DemAligned, false)],
    ];
    let chi = chi_squared_test(&table.iter().map(|r| r.iter().map(|x| *x as f64).collect()).collect::<Vec<_>>());
    out.mismatch_test.push(MismatchTestRow {
        rep_channels_mismatched: table[0][0],
        rep_channels_matched: table[0][1],
        dem_channels_mismatched: table[1][0],
        dem_channels_matched: table[1][1],
        chi_squared: chi.as_ref().ok().map(|c| c.statistic),
        df: chi.as_ref().ok().map(|c| c.df),
        p: chi.as_ref().ok().map(|c| c.p),
        status: status_of(&chi),
    });

    let y: Vec<f64> = watches.iter().map(|w| mismatched(w) as u8 as f64).collect();
    for (model, terms) in [("m1", M1), ("m2", M2), ("m3", M3)] {
        if watches.is_empty() {
            break;
        }
        let raw = DMatrix::from_fn(watches.len(), terms.len(), |i, j| predictor(world, watches[i].0, watches[i].1, terms[j]));
        let kept: Vec<usize> = if terms.len() >= 2 {
            match vif_screen(&raw, opts.vif_threshold) {
                Ok(s) => {
                    for (j, name) in terms.iter().enumerate() {
                        out.vif.push(VifRow {
                            model: model.into(),
                            term: name.to_string(),
                            vif: s.vif[j],
                            kept: s.kept.contains(&j),
                        });
                    }
                    s.kept
                }
                Err(_) => (0..terms.len()).collect(),
            }
        } else {
            vec![0]
        };
        let mut names = vec!["intercept".to_string()];
        names.extend(kept.iter().map(|&j| terms[j].to_string()));
        let x = DMatrix::from_fn(watches.len(), names.len(), |i, j| if j == 0 { 1.0 } else { raw[(i, kept[j - 1])] });
        let (fit, ridge) = match logistic_fit(&x, &names, &y, 0.0) {
            Err(AnalysisError::CompleteSeparation) => (logistic_fit(&x, &names, &y, opts.fallback_ridge), opts.fallback_ridge),
            other => (other, 0.0),
        };
        if let Ok(fit) = fit {
            for t in &fit.terms {
                out.regression.push(RegressionRow {
                    model: model.into(),
                    term: t.name.clone(),
                    coefficient: t.coefficient,
                    std_error: t.std_error,
                    z: t.z,
                    p: t.p,
                    odds_ratio: t.odds_ratio,
                    or_ci_low: t.or_ci_low,
                    or_ci_high: t.or_ci_high,
                    ridge,
                    converged: fit.converged,
                    iterations: fit.iterations,
                    log_likelihood: fit.log_likelihood,
                    n: fit.n,
                });
            }
        }
    }
}

fn comment_tables(world: &World, watched: &BTreeSet<usize>, labels: &Labels, out: &mut AnalysisResults) {
    let mut by: BTreeMap<Alignment, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for &v in watched {
        let Some(a) = labels.stance(v).map(StanceLabel::alignment).filter(|a| *a != Alignment::Neutral) else {
            continue;
        };
        let video = world.video(v);
        let e = by.entry(a).or_default();
        e.0.push(video.copartisan_comment_prop);
        e.1.push(video.opposing_comment_prop);
    }
    for (a, (co, opp)) in &by {
        out.comments.push(CommentRow {
            alignment: *a,
            n_videos: co.len(),
            mean_copartisan: mean(co),
            mean_opposing: mean(opp),
        });
    }
    let empty = (Vec::new(), Vec::new());
    let rep = by.get(&Alignment::RepAligned).unwrap_or(&empty);
    let dem = by.get(&Alignment::DemAligned).unwrap_or(&empty);
    out.t_tests.push(t_row("opposing_comment_prop", "rep_aligned", &rep.1, "dem_aligned", &dem.1));
}

fn rolling_rows(scores: &[RunScore], window: usize) -> Vec<RollingRow> {
    let mut by: BTreeMap<Leaning, BTreeMap<u32, Vec<f64>>> = BTreeMap::new();
    for r in scores {
        by.entry(r.leaning).or_default().entry(r.week).or_default().push(r.political_share);
    }
    let mut rows = Vec::new();
    for (leaning, weeks) in by {
        let series: Vec<f64> = weeks.values().map(|v| mean(v)).collect();
        let rolled = rolling_average(&series, window);
        for ((week, _), (share, roll)) in weeks.iter().zip(series.iter().zip(rolled)) {
            rows.push(RollingRow {
                leaning,
                week: *week,
                political_share: *share,
                rolling: roll,
            });
        }
    }
    rows
}
