//! A synthetic short-video platform with planted, configurable partisan bias.
//!
//! The simulator is a validation instrument. It does not model any real
//! platform's ranking; it gives the audit pipeline a ground truth to recover.

mod pool;
mod recommender;
mod world;

use thiserror::Error;

pub use pool::{generate_pool, ContentPoolSpec, MetricDist, TopicSpec};
pub use recommender::{BotState, Platform, Recommender, RecommenderParams};
pub use world::World;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("no videos available to recommend")]
    EmptyPool,
}
