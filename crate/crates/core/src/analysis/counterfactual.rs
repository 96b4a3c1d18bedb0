//! Engagement-weighted sampling baselines: what an algorithm with no
//! ideological preference would have shown, given the videos available.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::weights::{minmax_normalize, pca_first_component_weights, recency_scale, Metric, Recency};
use super::AnalysisError;
use crate::model::{Alignment, StanceLabel};
use crate::seed::{mix, rng_from, tag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualModelSpec {
    pub metric: Metric,
    pub recency: Recency,
    /// Weight of verified channels; unverified ones get `1 - verified_weight`.
    pub verified_weight: f64,
    pub reps: usize,
}

impl Default for CounterfactualModelSpec {
    fn default() -> Self {
        Self {
            metric: Metric::Likes,
            recency: Recency::None,
            verified_weight: 0.9,
            reps: 100,
        }
    }
}

impl CounterfactualModelSpec {
    pub fn new(metric: Metric, recency: Recency) -> Self {
        Self {
            metric,
            recency,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(0.5..=1.0).contains(&self.verified_weight) {
            return Err(AnalysisError::InvalidSpec(format!(
                "verified_weight {} outside [0.5, 1]",
                self.verified_weight
            )));
        }
        if self.reps == 0 {
            return Err(AnalysisError::InvalidSpec("reps must be at least 1".into()));
        }
        if let Recency::Exponential { lambda } = self.recency {
            if !(lambda.is_finite() && lambda >= 0.0) {
                return Err(AnalysisError::InvalidSpec(format!("bad decay rate {lambda}")));
            }
        }
        Ok(())
    }

    /// Row label such as `likes/linear`.
    pub fn label(&self) -> String {
        format!("{}/{}", self.metric.as_str(), self.recency.as_str())
    }
}

/// Which stances a counterfactual pool keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StanceSubset {
    All,
    Positive,
    Negative,
}

impl StanceSubset {
    pub fn admits(self, stance: StanceLabel) -> bool {
        match self {
            StanceSubset::All => true,
            StanceSubset::Positive => stance.is_positive_partisan(),
            StanceSubset::Negative => stance.is_negative_partisan(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StanceSubset::All => "all",
            StanceSubset::Positive => "positive",
            StanceSubset::Negative => "negative",
        }
    }
}

/// One candidate video in a counterfactual pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolItem {
    pub stance: StanceLabel,
    pub publish_week: i32,
    /// Raw metric values in [`Metric::BASE`] order.
    pub features: [f64; 14],
}

impl PoolItem {
    pub fn alignment(&self) -> Alignment {
        self.stance.alignment()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualResult {
    pub mean: f64,
    /// Standard error of the mean over reps; NaN for a single rep.
    pub std_error: f64,
    /// `(sum of Rep weights - sum of Dem weights) / total weight`
    pub expected: f64,
    pub reps: usize,
    pub draws: usize,
}

fn column(pool: &[PoolItem], metric: Metric, verified_weight: Option<f64>) -> Vec<f64> {
    let k = metric.feature_index().expect("single metric");
    match (metric, verified_weight) {
        (Metric::ChannelVerified, Some(vw)) => pool
            .iter()
            .map(|p| if p.features[k] > 0.5 { vw } else { 1.0 - vw })
            .collect(),
        _ => minmax_normalize(&pool.iter().map(|p| p.features[k]).collect::<Vec<_>>()),
    }
}

/// Sampling weights of every pool item for a model, before recency scaling
/// is applied relative to `target_week`.
pub fn pool_weights(pool: &[PoolItem], spec: &CounterfactualModelSpec, target_week: i32) -> Result<Vec<f64>, AnalysisError> {
    spec.validate()?;
    if pool.is_empty() {
        return Err(AnalysisError::EmptyPool);
    }
    let base = if spec.metric.is_combined() {
        let comps = spec.metric.components();
        let cols: Vec<Vec<f64>> = comps.iter().map(|m| column(pool, *m, None)).collect();
        let matrix = DMatrix::from_fn(pool.len(), comps.len(), |i, j| cols[j][i]);
        let loadings = pca_first_component_weights(&matrix)?;
        let score: Vec<f64> = (0..pool.len())
            .map(|i| loadings.iter().zip(&cols).map(|(w, c)| w * c[i]).sum())
            .collect();
        minmax_normalize(&score)
    } else {
        column(pool, spec.metric, Some(spec.verified_weight))
    };
    Ok(pool
        .iter()
        .zip(base)
        .map(|(p, w)| recency_scale(w, (target_week - p.publish_week).max(0) as f64, spec.recency))
        .collect())
}

fn check_weights(alignments: &[Alignment], weights: &[f64]) -> Result<f64, AnalysisError> {
    if alignments.is_empty() {
        return Err(AnalysisError::EmptyPool);
    }
    if alignments.len() != weights.len() {
        return Err(AnalysisError::InvalidSpec("alignments and weights differ in length".into()));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(AnalysisError::InvalidSpec("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return Err(AnalysisError::AllZeroWeights);
    }
    Ok(total)
}

/// Closed-form expected skew of one weighted draw.
pub fn expected_skew(alignments: &[Alignment], weights: &[f64]) -> Result<f64, AnalysisError> {
    let total = check_weights(alignments, weights)?;
    let net: f64 = alignments.iter().zip(weights).map(|(a, w)| a.sign() * w).sum();
    Ok(net / total)
}

/// Draws indexes with probability proportional to their weight.
#[derive(Debug, Clone)]
pub struct WeightedSampler {
    cumulative: Vec<f64>,
}

impl WeightedSampler {
    pub fn new(weights: &[f64]) -> Result<Self, AnalysisError> {
        if weights.is_empty() {
            return Err(AnalysisError::EmptyPool);
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(AnalysisError::InvalidSpec("weights must be finite and non-negative".into()));
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if acc == 0.0 {
            return Err(AnalysisError::AllZeroWeights);
        }
        Ok(Self { cumulative })
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let u = rng.random::<f64>() * total;
        self.cumulative.partition_point(|c| *c <= u).min(self.cumulative.len() - 1)
    }
}

/// Skew of each of `reps` independent samples of `draws` weighted draws
/// with replacement. Rep `r` uses its own stream derived from one base
/// seed taken from `rng`, so the result does not depend on thread count.
pub fn rep_skews<R: RngCore>(
    alignments: &[Alignment],
    weights: &[f64],
    draws: usize,
    reps: usize,
    rng: &mut R,
) -> Result<Vec<f64>, AnalysisError> {
    check_weights(alignments, weights)?;
    if draws == 0 || reps == 0 {
        return Err(AnalysisError::InvalidSpec("draws and reps must be at least 1".into()));
    }
    let sampler = WeightedSampler::new(weights)?;
    let base: u64 = rng.random();
    Ok((0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from(mix(base, &[tag::COUNTERFACTUAL, r as u64]));
            let net: i64 = (0..draws).map(|_| alignments[sampler.sample(&mut rng)].sign() as i64).sum();
            net as f64 / draws as f64
        })
        .collect())
}

/// Mean and standard error of [`rep_skews`], with the closed-form
/// expectation alongside.
pub fn weighted_skew_draws<R: RngCore>(
    alignments: &[Alignment],
    weights: &[f64],
    draws: usize,
    reps: usize,
    rng: &mut R,
) -> Result<CounterfactualResult, AnalysisError> {
    let expected = expected_skew(alignments, weights)?;
    let skews = rep_skews(alignments, weights, draws, reps, rng)?;
    let mean = skews.iter().sum::<f64>() / reps as f64;
    let std_error = if reps > 1 {
        let var = skews.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        (var / reps as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(CounterfactualResult {
        mean,
        std_error,
        expected,
        reps,
        draws,
    })
}

/// Counterfactual skew of `pool` under one model, drawing `draws` videos
/// per rep.
pub fn counterfactual_skew<R: RngCore>(
    pool: &[PoolItem],
    spec: &CounterfactualModelSpec,
    target_week: i32,
    draws: usize,
    rng: &mut R,
) -> Result<CounterfactualResult, AnalysisError> {
    let weights = pool_weights(pool, spec, target_week)?;
    let alignments: Vec<Alignment> = pool.iter().map(PoolItem::alignment).collect();
    weighted_skew_draws(&alignments, &weights, draws, spec.reps, rng)
}
