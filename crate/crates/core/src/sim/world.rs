use std::collections::{HashMap, HashSet};

use super::SimError;
use crate::model::{Alignment, ChannelId, ChannelRecord, VideoId, VideoRecord};

/// An immutable content pool with lookup indexes.
#[derive(Debug, Clone)]
pub struct World {
    videos: Vec<VideoRecord>,
    channels: Vec<ChannelRecord>,
    video_index: HashMap<VideoId, usize>,
    video_channel: Vec<usize>,
    // newest first, ties by video id
    channel_videos: Vec<Vec<usize>>,
}

impl World {
    pub fn new(videos: Vec<VideoRecord>, channels: Vec<ChannelRecord>) -> Result<Self, SimError> {
        let channel_index: HashMap<&ChannelId, usize> =
            channels.iter().enumerate().map(|(i, c)| (&c.channel_id, i)).collect();
        let mut video_index = HashMap::with_capacity(videos.len());
        let mut video_channel = Vec::with_capacity(videos.len());
        let mut channel_videos = vec![Vec::new(); channels.len()];
        for (i, v) in videos.iter().enumerate() {
            if video_index.insert(v.video_id.clone(), i).is_some() {
                return Err(SimError::InvalidSpec(format!("duplicate video id {}", v.video_id)));
            }
            let c = *channel_index
                .get(&v.channel_id)
                .ok_or_else(|| SimError::InvalidSpec(format!("video {} has unknown channel {}", v.video_id, v.channel_id)))?;
            video_channel.push(c);
            channel_videos[c].push(i);
        }
        for list in &mut channel_videos {
            list.sort_by(|&a, &b| {
                videos[b]
                    .publish_week
                    .cmp(&videos[a].publish_week)
                    .then_with(|| videos[a].video_id.cmp(&videos[b].video_id))
            });
        }
        Ok(Self {
            videos,
            channels,
            video_index,
            video_channel,
            channel_videos,
        })
    }

    pub fn videos(&self) -> &[VideoRecord] {
        &self.videos
    }

    pub fn channels(&self) -> &[ChannelRecord] {
        &self.channels
    }

    pub fn video(&self, idx: usize) -> &VideoRecord {
        &self.videos[idx]
    }

    pub fn find(&self, id: &VideoId) -> Option<usize> {
        self.video_index.get(id).copied()
    }

    pub fn channel_of(&self, video_idx: usize) -> &ChannelRecord {
        &self.channels[self.video_channel[video_idx]]
    }

    pub fn channel_index_of(&self, video_idx: usize) -> usize {
        self.video_channel[video_idx]
    }

    /// All of a channel's videos, newest first.
    pub fn channel_videos(&self, channel: usize) -> &[usize] {
        &self.channel_videos[channel]
    }

    pub fn video_ids(&self) -> HashSet<VideoId> {
        self.video_index.keys().cloned().collect()
    }

    /// Indexes of channels classified with the given alignment.
    pub fn channels_aligned(&self, alignment: Alignment) -> Vec<usize> {
        (0..self.channels.len())
            .filter(|&c| self.channels[c].alignment == Some(alignment))
            .collect()
    }

    /// Up to `limit` of the channel's videos published by `week`, newest first.
    pub fn recent_videos(&self, channel: usize, week: i32, limit: usize) -> impl Iterator<Item = usize> + '_ {
        self.channel_videos[channel]
            .iter()
            .copied()
            .filter(move |&i| self.videos[i].publish_week <= week)
            .take(limit)
    }
}
