//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use puppet_audit::analysis::{FamilyParams, Metric, PoolItem, Recency};
use puppet_audit::model::{Alignment, StanceLabel};
use puppet_audit::seed::rng_from;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Binomial, Distribution, LogNormal, Normal, Poisson};

pub fn sign(a: Alignment) -> f64 {
    match a {
        Alignment::RepAligned => 1.0,
        Alignment::DemAligned => -1.0,
        Alignment::Neutral => 0.0,
    }
}

/// `(sum of Rep weights - sum of Dem weights) / sum of weights`.
pub fn closed_form_skew(alignments: &[Alignment], weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    alignments.iter().zip(weights).map(|(a, w)| sign(*a) * w).sum::<f64>() / total
}

pub fn minmax(xs: &[f64]) -> Vec<f64> {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        vec![1.0; xs.len()]
    } else {
        xs.iter().map(|x| (x - lo) / (hi - lo)).collect()
    }
}

/// First principal component loadings by dense symmetric eigensolve,
/// sign-fixed to a positive sum and scaled to sum to one.
pub fn pca_oracle(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows() as f64;
    let means: Vec<f64> = (0..m.ncols()).map(|j| m.column(j).sum() / n).collect();
    let centered = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] - means[j]);
    let cov = centered.transpose() * &centered / (n - 1.0);
    let eig = SymmetricEigen::new(cov);
    let top = eig.eigenvalues.imax();
    let v: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

/// Sampling weights of a pool under one model, computed from the
/// definitions: min-max per metric, PCA-weighted score for combined
/// metrics, verified mapping, then recency.
pub fn oracle_weights(pool: &[PoolItem], metric: Metric, recency: Recency, verified_weight: f64, week: i32) -> Vec<f64> {
    let col = |m: Metric| -> Vec<f64> {
        let k = m.feature_index().unwrap();
        pool.iter().map(|p| p.features[k]).collect()
    };
    let base = if metric.is_combined() {
        let cols: Vec<Vec<f64>> = metric.components().iter().map(|m| minmax(&col(*m))).collect();
        let mat = DMatrix::from_fn(pool.len(), cols.len(), |i, j| cols[j][i]);
        let w = pca_oracle(&mat);
        let score: Vec<f64> = (0..pool.len()).map(|i| (0..cols.len()).map(|j| w[j] * cols[j][i]).sum()).collect();
        minmax(&score)
    } else if metric == Metric::ChannelVerified {
        col(metric)
            .iter()
            .map(|v| if *v == 1.0 { verified_weight } else { 1.0 - verified_weight })
            .collect()
    } else {
        minmax(&col(metric))
    };
    pool.iter()
        .zip(base)
        .map(|(p, w)| {
            let age = (week - p.publish_week).max(0) as f64;
            match recency {
                Recency::None => w,
                Recency::Linear => w / (1.0 + age),
                Recency::Exponential { lambda } => w * (-lambda * age).exp(),
            }
        })
        .collect()
}

/// A random pool with every stance represented.
pub fn random_pool(seed: u64, n: usize) -> Vec<PoolItem> {
    let mut rng = rng_from(seed);
    (0..n)
        .map(|i| {
            let stance = if i < 5 { StanceLabel::ALL[i] } else { *StanceLabel::ALL.choose(&mut rng).unwrap() };
            let mut features = [0.0; 14];
            for (k, f) in features.iter_mut().enumerate() {
                *f = match k {
                    11 => f64::from(rng.random_bool(0.3)),
                    12 | 13 => rng.random(),
                    _ => (rng.random::<f64>() * 8.0).exp().round(),
                };
            }
            PoolItem {
                stance,
                publish_week: rng.random_range(-6..=4),
                features,
            }
        })
        .collect()
}

/// Exact distribution of the net Rep-minus-Dem count over all ordered
/// sequences of `n` draws.
pub fn enumerate_net_counts(alignments: &[Alignment], weights: &[f64], n: usize) -> BTreeMap<i64, f64> {
    let total: f64 = weights.iter().sum();
    let k = weights.len();
    let mut out = BTreeMap::new();
    for code in 0..k.pow(n as u32) {
        let (mut c, mut p, mut net) = (code, 1.0, 0i64);
        for _ in 0..n {
            let i = c % k;
            c /= k;
            p *= weights[i] / total;
            net += sign(alignments[i]) as i64;
        }
        *out.entry(net).or_insert(0.0) += p;
    }
    out
}

/// One latent metric value from a family with the given mean, sampled
/// directly with `rand_distr`.
pub fn sample_family<R: Rng>(params: FamilyParams, mean: f64, rng: &mut R) -> f64 {
    match params {
        FamilyParams::Normal { sd, .. } => Normal::new(mean, sd).unwrap().sample(rng),
        FamilyParams::Lognormal { sigma, .. } => LogNormal::new(mean.ln() - sigma * sigma / 2.0, sigma).unwrap().sample(rng),
        FamilyParams::Poisson { resolution, .. } => Poisson::new(mean * resolution).unwrap().sample(rng) / resolution,
        FamilyParams::Binomial { trials, .. } => Binomial::new(trials, mean).unwrap().sample(rng) as f64 / trials as f64,
    }
}

/// A planted platform: Rep-aligned items draw their latent metric with
/// the mean shifted by `delta`, and `draws` recommendations are sampled
/// with probability proportional to the min-max normalized metric. Returns
/// the mean observed skew over `trials` independent pools.
pub fn planted_skew(alignments: &[Alignment], params: FamilyParams, delta: f64, trials: usize, draws: usize, seed: u64) -> f64 {
    let base = params.mean();
    let mut rng = rng_from(seed);
    let mut sum = 0.0;
    for _ in 0..trials {
        let values: Vec<f64> = alignments
            .iter()
            .map(|a| {
                let m = if *a == Alignment::RepAligned { base + delta } else { base };
                sample_family(params, m, &mut rng)
            })
            .collect();
        let index = WeightedIndex::new(minmax(&values)).unwrap();
        let net: i64 = (0..draws).map(|_| sign(alignments[index.sample(&mut rng)]) as i64).sum();
        sum += net as f64 / draws as f64;
    }
    sum / trials as f64
}

/// Logistic data from known coefficients; column 0 is the intercept.
pub fn logistic_data(beta: &[f64], n: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>) {
    let mut rng = rng_from(seed);
    let p = beta.len();
    let x = DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { Normal::new(0.0, 1.0).unwrap().sample(&mut rng) });
    let eta = &x * DVector::from_column_slice(beta);
    let y = eta.iter().map(|e| f64::from(rng.random::<f64>() < 1.0 / (1.0 + (-e).exp()))).collect();
    (x, y)
}

pub fn alternating(n: usize) -> Vec<Alignment> {
    (0..n)
        .map(|i| if i % 2 == 0 { Alignment::DemAligned } else { Alignment::RepAligned })
        .collect()
}
