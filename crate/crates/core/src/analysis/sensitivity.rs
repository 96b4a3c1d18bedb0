//! How large would a latent engagement gap between Rep- and Dem-aligned
//! videos have to be to explain an observed skew on its own?
//!
//! `s(delta)` is the expected skew of a weighted draw when every Rep-aligned
//! item's latent metric comes from the base family with its mean shifted by
//! `delta`. Latent draws use common random numbers: each (trial, item) pair
//! owns one fixed normal or uniform variate, mapped through the family's
//! inverse CDF, so `s` is a deterministic, non-decreasing function of
//! `delta` for a fixed seed.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::weights::minmax_normalize;
use super::AnalysisError;
use crate::model::Alignment;
use crate::seed::{mix, rng_from, tag};
use crate::special::{beta_reg, gamma_q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Binomial,
    Lognormal,
    Normal,
    Poisson,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Binomial, Family::Lognormal, Family::Normal, Family::Poisson];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Binomial => "binomial",
            Family::Lognormal => "lognormal",
            Family::Normal => "normal",
            Family::Poisson => "poisson",
        }
    }
}

/// Base (Dem-arm) distribution. Every family is parameterized by its mean,
/// which is the only thing the Rep arm changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    Normal { mean: f64, sd: f64 },
    /// `sigma` is the log-scale standard deviation.
    Lognormal { mean: f64, sigma: f64 },
    /// Value `X / resolution` with `X ~ Poisson(mean * resolution)`.
    Poisson { mean: f64, resolution: f64 },
    /// Value `X / trials` with `X ~ Binomial(trials, mean)`.
    Binomial { mean: f64, trials: u64 },
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::Normal { .. } => Family::Normal,
            FamilyParams::Lognormal { .. } => Family::Lognormal,
            FamilyParams::Poisson { .. } => Family::Poisson,
            FamilyParams::Binomial { .. } => Family::Binomial,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            FamilyParams::Normal { mean, .. }
            | FamilyParams::Lognormal { mean, .. }
            | FamilyParams::Poisson { mean, .. }
            | FamilyParams::Binomial { mean, .. } => mean,
        }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let ok = match *self {
            FamilyParams::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            FamilyParams::Lognormal { mean, sigma } => mean > 0.0 && mean.is_finite() && sigma > 0.0 && sigma.is_finite(),
            FamilyParams::Poisson { mean, resolution } => mean >= 0.0 && mean.is_finite() && resolution > 0.0 && (mean * resolution) < 1e7,
            FamilyParams::Binomial { mean, trials } => (0.0..=1.0).contains(&mean) && trials >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(AnalysisError::InvalidSpec(format!("bad family parameters {self:?}")))
        }
    }

    /// Admissible range of the mean shift.
    fn delta_bounds(&self) -> (f64, f64) {
        let m = self.mean();
        match self {
            FamilyParams::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            FamilyParams::Lognormal { .. } => (-m * (1.0 - 1e-9), f64::INFINITY),
            FamilyParams::Poisson { resolution, .. } => (-m, 1e7 / resolution - m),
            FamilyParams::Binomial { .. } => (-m, 1.0 - m),
        }
    }

    fn uses_normal_latent(&self) -> bool {
        matches!(self, FamilyParams::Normal { .. } | FamilyParams::Lognormal { .. })
    }

    fn with_mean(&self, mean: f64) -> Self {
        let mut p = *self;
        match &mut p {
            FamilyParams::Normal { mean: m, .. }
            | FamilyParams::Lognormal { mean: m, .. }
            | FamilyParams::Poisson { mean: m, .. }
            | FamilyParams::Binomial { mean: m, .. } => *m = mean,
        }
        p
    }
}

/// Inverse CDF of one fixed distribution, applied to a latent variate.
enum Quantile {
    Normal { mean: f64, sd: f64 },
    Lognormal { mu: f64, sigma: f64 },
    /// Discrete: `cdf[i] = P(X <= lo + i)`, values scaled by `scale`.
    Table { lo: u64, cdf: Vec<f64>, scale: f64 },
}

fn discrete_table(lo: u64, hi: u64, scale: f64, cdf_at: impl Fn(u64) -> f64) -> Quantile {
    Quantile::Table {
        lo,
        cdf: (lo..=hi).map(cdf_at).collect(),
        scale,
    }
}

impl Quantile {
    fn new(p: &FamilyParams) -> Self {
        match *p {
            FamilyParams::Normal { mean, sd } => Quantile::Normal { mean, sd },
            FamilyParams::Lognormal { mean, sigma } => Quantile::Lognormal {
                mu: mean.ln() - 0.5 * sigma * sigma,
                sigma,
            },
            FamilyParams::Poisson { mean, resolution } => {
                let lambda = mean * resolution;
                if lambda == 0.0 {
                    return Quantile::Table { lo: 0, cdf: vec![1.0], scale: 1.0 / resolution };
                }
                let spread = 12.0 * lambda.sqrt() + 12.0;
                let lo = (lambda - spread).max(0.0).floor() as u64;
                let hi = (lambda + spread).ceil() as u64;
                discrete_table(lo, hi, 1.0 / resolution, |k| gamma_q(k as f64 + 1.0, lambda))
            }
            FamilyParams::Binomial { mean, trials } => {
                let n = trials;
                if mean <= 0.0 {
                    return Quantile::Table { lo: 0, cdf: vec![1.0], scale: 1.0 / n as f64 };
                }
                if mean >= 1.0 {
                    return Quantile::Table { lo: n, cdf: vec![1.0], scale: 1.0 / n as f64 };
                }
                let sd = (n as f64 * mean * (1.0 - mean)).sqrt();
                let centre = n as f64 * mean;
                let lo = (centre - 12.0 * sd - 12.0).max(0.0).floor() as u64;
                let hi = ((centre + 12.0 * sd + 12.0).ceil() as u64).min(n);
                discrete_table(lo, hi, 1.0 / n as f64, |k| {
                    if k >= n {
                        1.0
                    } else {
                        beta_reg((n - k) as f64, k as f64 + 1.0, 1.0 - mean)
                    }
                })
            }
        }
    }

    fn apply(&self, latent: f64) -> f64 {
        match self {
            Quantile::Normal { mean, sd } => mean + sd * latent,
            Quantile::Lognormal { mu, sigma } => (mu + sigma * latent).exp(),
            Quantile::Table { lo, cdf, scale } => {
                let i = cdf.partition_point(|c| *c < latent).min(cdf.len() - 1);
                (lo + i as u64) as f64 * scale
            }
        }
    }
}

/// Skew of the draw implied by one set of latent metric values.
fn closed_form_skew(alignments: &[Alignment], values: &[f64]) -> f64 {
    let w = minmax_normalize(values);
    let total: f64 = w.iter().sum();
    let net: f64 = alignments.iter().zip(&w).map(|(a, w)| a.sign() * w).sum();
    net / total
}

/// `s(delta)` with its common random numbers fixed at construction.
pub struct SkewCurve {
    alignments: Vec<Alignment>,
    params: FamilyParams,
    trials: usize,
    latents: Vec<f64>,
    base_values: Vec<f64>,
}

impl SkewCurve {
    pub fn new<R: RngCore>(alignments: &[Alignment], params: FamilyParams, trials: usize, rng: &mut R) -> Result<Self, AnalysisError> {
        params.validate()?;
        if alignments.len() < 2 {
            return Err(AnalysisError::EmptyPool);
        }
        if trials == 0 {
            return Err(AnalysisError::InvalidSpec("mc_trials must be at least 1".into()));
        }
        let n = alignments.len();
        let base: u64 = rng.random();
        let normal = params.uses_normal_latent();
        let latents: Vec<f64> = (0..trials)
            .into_par_iter()
            .flat_map_iter(|t| {
                let mut r = rng_from(mix(base, &[tag::SENSITIVITY, t as u64]));
                (0..n)
                    .map(|_| {
                        if normal {
                            r.sample::<f64, _>(StandardNormal)
                        } else {
                            // open interval keeps the quantile lookup finite
                            (r.random::<f64>() + f64::EPSILON).min(1.0 - f64::EPSILON)
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let q = Quantile::new(&params);
        let base_values = latents.iter().map(|z| q.apply(*z)).collect();
        Ok(Self {
            alignments: alignments.to_vec(),
            params,
            trials,
            latents,
            base_values,
        })
    }

    pub fn params(&self) -> FamilyParams {
        self.params
    }

    /// Mean over trials of the closed-form skew with Rep-aligned means
    /// shifted by `delta`.
    pub fn eval(&self, delta: f64) -> f64 {
        let shifted = Quantile::new(&self.params.with_mean(self.params.mean() + delta));
        let n = self.alignments.len();
        let per_trial: Vec<f64> = (0..self.trials)
            .into_par_iter()
            .map(|t| {
                let range = t * n..(t + 1) * n;
                let values: Vec<f64> = self.alignments
                    .iter()
                    .zip(&self.latents[range.clone()])
                    .zip(&self.base_values[range])
                    .map(|((a, z), b)| if *a == Alignment::RepAligned { shifted.apply(*z) } else { *b })
                    .collect();
                closed_form_skew(&self.alignments, &values)
            })
            .collect();
        per_trial.iter().sum::<f64>() / self.trials as f64
    }

    fn bounds(&self) -> (f64, f64) {
        self.params.delta_bounds()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySpec {
    pub params: FamilyParams,
    pub target_skew: f64,
    pub mc_trials: usize,
    pub search_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub family: Family,
    /// Mean shift at which the curve meets the target.
    pub delta_star: f64,
    /// `delta_star / observed_gap`
    pub k: f64,
    /// Curve value at `delta_star`.
    pub skew_at_delta: f64,
    pub s_zero: f64,
    pub evaluations: usize,
}

/// Evaluates the curve over a grid of mean shifts, sharing latents.
pub fn sensitivity_curve<R: RngCore>(
    alignments: &[Alignment],
    params: FamilyParams,
    deltas: &[f64],
    mc_trials: usize,
    rng: &mut R,
) -> Result<Vec<f64>, AnalysisError> {
    let curve = SkewCurve::new(alignments, params, mc_trials, rng)?;
    Ok(deltas.iter().map(|d| curve.eval(*d)).collect())
}

/// Finds `delta*` with `|s(delta*) - target| < tolerance` by doubling
/// outward from `|observed_gap|` and then bisecting, and returns
/// `k = delta* / observed_gap`.
pub fn required_scaling<R: RngCore>(
    alignments: &[Alignment],
    spec: &SensitivitySpec,
    observed_gap: f64,
    rng: &mut R,
) -> Result<ScalingResult, AnalysisError> {
    if observed_gap == 0.0 || !observed_gap.is_finite() {
        return Err(AnalysisError::InvalidSpec("observed metric gap must be non-zero".into()));
    }
    if !(spec.search_tolerance > 0.0) {
        return Err(AnalysisError::InvalidSpec("search tolerance must be positive".into()));
    }
    let curve = SkewCurve::new(alignments, spec.params, spec.mc_trials, rng)?;
    search(&curve, spec.target_skew, spec.search_tolerance, observed_gap)
}

fn search(curve: &SkewCurve, target: f64, tol: f64, gap: f64) -> Result<ScalingResult, AnalysisError> {
    let mut evaluations = 1;
    let s0 = curve.eval(0.0);
    let done = |delta: f64, s: f64, evaluations: usize| ScalingResult {
        family: curve.params().family(),
        delta_star: delta,
        k: delta / gap,
        skew_at_delta: s,
        s_zero: s0,
        evaluations,
    };
    if (s0 - target).abs() < tol {
        return Ok(done(0.0, s0, evaluations));
    }
    let dir = if target > s0 { 1.0 } else { -1.0 };
    let (lo_bound, hi_bound) = curve.bounds();
    let limit = if dir > 0.0 { hi_bound } else { lo_bound };
    // bracket [inner, outer] in the search direction, s(inner) short of target
    let (mut inner, mut s_inner) = (0.0, s0);
    let mut step = gap.abs();
    let (mut outer, mut s_outer);
    loop {
        let mut cand = dir * step;
        let at_limit = cand.abs() >= limit.abs();
        if at_limit {
            cand = limit;
        }
        let s = curve.eval(cand);
        evaluations += 1;
        if dir * (s - s_inner) < -1e-12 {
            return Err(AnalysisError::NonMonotone);
        }
        if (s - target).abs() < tol {
            return Ok(done(cand, s, evaluations));
        }
        if dir * (s - target) > 0.0 {
            (outer, s_outer) = (cand, s);
            break;
        }
        (inner, s_inner) = (cand, s);
        if at_limit || step > 1e300 {
            let (low, high) = if dir > 0.0 { (s0, s) } else { (s, s0) };
            return Err(AnalysisError::Unreachable { target, low, high });
        }
        step *= 2.0;
    }
    let mut best = if (s_inner - target).abs() < (s_outer - target).abs() { (inner, s_inner) } else { (outer, s_outer) };
    for _ in 0..100 {
        let mid = 0.5 * (inner + outer);
        if mid == inner || mid == outer {
            break;
        }
        let s = curve.eval(mid);
        evaluations += 1;
        if dir * (s - s_inner) < -1e-12 || dir * (s_outer - s) < -1e-12 {
            return Err(AnalysisError::NonMonotone);
        }
        if (s - target).abs() < (best.1 - target).abs() {
            best = (mid, s);
        }
        if (s - target).abs() < tol {
            break;
        }
        if dir * (s - target) < 0.0 {
            (inner, s_inner) = (mid, s);
        } else {
            (outer, s_outer) = (mid, s);
        }
        if (outer - inner).abs() <= 1e-12 * gap.abs() {
            break;
        }
    }
    Ok(done(best.0, best.1, evaluations))
}
