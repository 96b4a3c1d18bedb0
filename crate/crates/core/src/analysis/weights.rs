//! Metric columns, min-max normalization, recency scaling and first
//! principal component weights for the counterfactual null models.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::model::{derived_from_counts, ChannelRecord, VideoRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Likes,
    LikesPerRec,
    Comments,
    CommentsPerRec,
    Plays,
    Shares,
    EngagementRate,
    VideoLength,
    ChannelFollowers,
    ChannelCumulLikes,
    ChannelVideoCount,
    ChannelVerified,
    CopartisanCommentProp,
    OpposingCommentProp,
    CombinedVideo,
    CombinedChannel,
    CombinedAll,
    /// Comments, likes, shares and plays.
    CombinedLSPC,
}

use Metric::*;

impl Metric {
    /// Single metrics, in feature-vector order.
    pub const BASE: [Metric; 14] = [
        Likes,
        LikesPerRec,
        Comments,
        CommentsPerRec,
        Plays,
        Shares,
        EngagementRate,
        VideoLength,
        ChannelFollowers,
        ChannelCumulLikes,
        ChannelVideoCount,
        ChannelVerified,
        CopartisanCommentProp,
        OpposingCommentProp,
    ];

    pub const ALL: [Metric; 18] = [
        Likes,
        LikesPerRec,
        Comments,
        CommentsPerRec,
        Plays,
        Shares,
        EngagementRate,
        VideoLength,
        ChannelFollowers,
        ChannelCumulLikes,
        ChannelVideoCount,
        ChannelVerified,
        CopartisanCommentProp,
        OpposingCommentProp,
        CombinedVideo,
        CombinedChannel,
        CombinedAll,
        CombinedLSPC,
    ];

    pub fn feature_index(self) -> Option<usize> {
        Self::BASE.iter().position(|m| *m == self)
    }

    /// Columns a combined score is built from; empty for single metrics.
    pub fn components(self) -> &'static [Metric] {
        match self {
            CombinedVideo => &[
                Likes,
                LikesPerRec,
                Comments,
                CommentsPerRec,
                Plays,
                Shares,
                EngagementRate,
                VideoLength,
                CopartisanCommentProp,
                OpposingCommentProp,
            ],
            CombinedChannel => &[ChannelFollowers, ChannelCumulLikes, ChannelVideoCount, ChannelVerified],
            CombinedAll => &Self::BASE,
            CombinedLSPC => &[Comments, Likes, Shares, Plays],
            _ => &[],
        }
    }

    pub fn is_combined(self) -> bool {
        !self.components().is_empty()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Likes => "likes",
            LikesPerRec => "likes_per_rec",
            Comments => "comments",
            CommentsPerRec => "comments_per_rec",
            Plays => "plays",
            Shares => "shares",
            EngagementRate => "engagement_rate",
            VideoLength => "video_length",
            ChannelFollowers => "channel_followers",
            ChannelCumulLikes => "channel_cumulative_likes",
            ChannelVideoCount => "channel_video_count",
            ChannelVerified => "channel_verified",
            CopartisanCommentProp => "copartisan_comment_prop",
            OpposingCommentProp => "opposing_comment_prop",
            CombinedVideo => "combined_video",
            CombinedChannel => "combined_channel",
            CombinedAll => "combined_all",
            CombinedLSPC => "combined_lspc",
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        Self::ALL.into_iter().find(|m| m.as_str() == s.trim())
    }
}

/// Raw single-metric values of a video, in [`Metric::BASE`] order.
/// Verification is encoded as 0 or 1.
pub fn features(video: &VideoRecord, channel: &ChannelRecord) -> [f64; 14] {
    let d = derived_from_counts(video.plays, video.shares, video.likes, video.comments)
        .unwrap_or_else(|_| derived_from_counts(video.plays, video.plays, video.likes, video.comments).expect("valid"));
    [
        video.likes as f64,
        d.likes_per_rec,
        video.comments as f64,
        d.comments_per_rec,
        video.plays as f64,
        video.shares as f64,
        d.engagement_rate,
        video.duration_secs,
        channel.followers as f64,
        channel.cumulative_likes as f64,
        channel.video_count as f64,
        if channel.verified { 1.0 } else { 0.0 },
        video.copartisan_comment_prop,
        video.opposing_comment_prop,
    ]
}

/// `(x - min) / (max - min)`; a constant input maps to all ones.
pub fn minmax_normalize(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !(hi > lo) {
        return vec![1.0; values.len()];
    }
    values.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Recency {
    #[default]
    None,
    Linear,
    /// `lambda` is the decay rate per week.
    Exponential { lambda: f64 },
}

impl Recency {
    pub fn exponential() -> Self {
        Recency::Exponential {
            lambda: std::f64::consts::LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Recency::None => "none",
            Recency::Linear => "linear",
            Recency::Exponential { .. } => "exponential",
        }
    }
}

/// Down-weights older videos: `w / (1 + age)` or `w * exp(-lambda * age)`.
pub fn recency_scale(weight: f64, age_weeks: f64, mode: Recency) -> f64 {
    match mode {
        Recency::None => weight,
        Recency::Linear => weight / (1.0 + age_weeks),
        Recency::Exponential { lambda } => weight * (-lambda * age_weeks).exp(),
    }
}

fn rayleigh_residual(c: &DMatrix<f64>, v: &DVector<f64>) -> (f64, f64) {
    let cv = c * v;
    let lambda = v.dot(&cv);
    (lambda, (cv - v * lambda).norm())
}

fn power_iterate(c: &DMatrix<f64>, start: DVector<f64>, tol: f64) -> (DVector<f64>, f64, f64) {
    let mut v = start.normalize();
    let (mut lambda, mut resid) = rayleigh_residual(c, &v);
    for _ in 0..20_000 {
        if resid <= tol {
            break;
        }
        let w = c * &v;
        let norm = w.norm();
        if norm == 0.0 {
            break;
        }
        v = w / norm;
        (lambda, resid) = rayleigh_residual(c, &v);
    }
    // Inverse iteration polishes slow power-iteration tails.
    for _ in 0..4 {
        if resid <= tol {
            break;
        }
        let mut shifted = c.clone();
        for k in 0..c.nrows() {
            shifted[(k, k)] -= lambda;
        }
        let Some(w) = shifted.lu().solve(&v) else { break };
        let norm = w.norm();
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        let cand = w / norm;
        let (l2, r2) = rayleigh_residual(c, &cand);
        if r2 < resid {
            (v, lambda, resid) = (cand, l2, r2);
        } else {
            break;
        }
    }
    (v, lambda, resid)
}

/// Loadings of the first principal component of the columns' covariance,
/// sign-flipped to a positive sum and rescaled to sum to 1.
///
/// The leading eigenvector is found by power iteration from several start
/// vectors (all ones, a harmonic vector, and each axis), keeping the one
/// with the largest Rayleigh quotient; the final eigen-residual is below
/// `1e-10` times the spectral scale.
pub fn pca_first_component_weights(matrix: &DMatrix<f64>) -> Result<Vec<f64>, AnalysisError> {
    let (n, p) = matrix.shape();
    if n < 2 || p < 2 {
        return Err(AnalysisError::InsufficientData("PCA needs at least two rows and two columns".into()));
    }
    let means = matrix.row_mean();
    let mut centered = matrix.clone();
    for mut row in centered.row_iter_mut() {
        row -= &means;
    }
    let cov = centered.tr_mul(&centered) / (n as f64 - 1.0);
    let scale = cov.diagonal().iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if scale == 0.0 {
        return Err(AnalysisError::ZeroVariance);
    }
    let tol = 1e-14 * scale;
    let mut starts = vec![
        DVector::from_element(p, 1.0),
        DVector::from_fn(p, |i, _| 1.0 / (i as f64 + 1.0)),
    ];
    starts.extend((0..p).map(|i| DVector::from_fn(p, |k, _| if k == i { 1.0 } else { 0.0 })));
    let mut best: Option<(DVector<f64>, f64, f64)> = None;
    for s in starts {
        let cand = power_iterate(&cov, s, tol);
        // prefer the larger eigenvalue; break near-ties by residual
        let better = match &best {
            None => true,
            Some(b) => cand.1 > b.1 + 1e-12 * scale || ((cand.1 - b.1).abs() <= 1e-12 * scale && cand.2 < b.2),
        };
        if better {
            best = Some(cand);
        }
    }
    let (mut v, _, resid) = best.expect("at least one start");
    if resid > 1e-10 * scale {
        return Err(AnalysisError::Nonconvergence { iterations: 20_000 });
    }
    let sum = v.sum();
    if sum.abs() < 1e-12 {
        return Err(AnalysisError::DegenerateLoadings);
    }
    if sum < 0.0 {
        v = -v;
    }
    let sum = v.sum();
    Ok(v.iter().map(|x| x / sum).collect())
}
