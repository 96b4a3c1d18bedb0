use serde::{Deserialize, Serialize};

use super::LabelError;
use crate::model::{alignment_of, Alignment, StanceLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelClass {
    DemAligned,
    RepAligned,
    Unaligned,
    /// Too few labeled videos; fetch more and classify again.
    NeedsSupplement,
}

impl ChannelClass {
    /// The alignment stored on a `ChannelRecord`; unaligned channels are
    /// recorded as `Neutral`, unclassified ones as `None`.
    pub fn alignment(self) -> Option<Alignment> {
        match self {
            ChannelClass::DemAligned => Some(Alignment::DemAligned),
            ChannelClass::RepAligned => Some(Alignment::RepAligned),
            ChannelClass::Unaligned => Some(Alignment::Neutral),
            ChannelClass::NeedsSupplement => None,
        }
    }
}

/// Classifies a channel from the stances of its labeled videos.
///
/// Neutral videos count in the denominator. The threshold comparison is
/// strict, so exactly 75% aligned is `Unaligned`.
pub fn classify_channel(stances: &[StanceLabel], min_videos: usize, threshold: f64) -> ChannelClass {
    if stances.len() < min_videos || stances.is_empty() {
        return ChannelClass::NeedsSupplement;
    }
    let n = stances.len() as f64;
    let dem = stances.iter().filter(|s| alignment_of(**s) == Alignment::DemAligned).count() as f64;
    let rep = stances.iter().filter(|s| alignment_of(**s) == Alignment::RepAligned).count() as f64;
    if dem / n > threshold {
        ChannelClass::DemAligned
    } else if rep / n > threshold {
        ChannelClass::RepAligned
    } else {
        ChannelClass::Unaligned
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommentProportions {
    pub copartisan: f64,
    pub opposing: f64,
    pub neutral: f64,
}

/// Shares of a video's comments aligned with, against, and neutral to the
/// video's own alignment.
pub fn comment_alignment_proportions(
    video: Alignment,
    comments: &[StanceLabel],
) -> Result<CommentProportions, LabelError> {
    if video == Alignment::Neutral {
        return Err(LabelError::NeutralVideo);
    }
    if comments.is_empty() {
        return Err(LabelError::EmptyComments);
    }
    let (mut co, mut opp) = (0usize, 0usize);
    for c in comments {
        let a = alignment_of(*c);
        if a == video {
            co += 1;
        } else if a == video.opposite() {
            opp += 1;
        }
    }
    let n = comments.len();
    Ok(CommentProportions {
        copartisan: co as f64 / n as f64,
        opposing: opp as f64 / n as f64,
        neutral: (n - co - opp) as f64 / n as f64,
    })
}
