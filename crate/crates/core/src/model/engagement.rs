use serde::{Deserialize, Serialize};

use super::{ModelError, VideoRecord};

/// Engagement ratios derived from a video's raw counters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedEngagement {
    /// Plays that came through the feed rather than through shares.
    pub recommendations: u64,
    pub likes_per_rec: f64,
    pub comments_per_rec: f64,
    /// (likes + comments + shares) / plays
    pub engagement_rate: f64,
}

/// Ratio with the zero-denominator sentinel: `x / 0` is `0`.
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn derived_metrics(video: &VideoRecord) -> Result<DerivedEngagement, ModelError> {
    derived_from_counts(video.plays, video.shares, video.likes, video.comments)
}

pub fn derived_from_counts(
    plays: u64,
    shares: u64,
    likes: u64,
    comments: u64,
) -> Result<DerivedEngagement, ModelError> {
    if shares > plays {
        return Err(ModelError::InvalidEngagement { plays, shares });
    }
    let recommendations = plays - shares;
    Ok(DerivedEngagement {
        recommendations,
        likes_per_rec: ratio(likes, recommendations),
        comments_per_rec: ratio(comments, recommendations),
        engagement_rate: ratio(likes + comments + shares, plays),
    })
}
