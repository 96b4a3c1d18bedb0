//! Statistics over labeled watch logs: ideological skew, counterfactual null
//! models, sensitivity search, hypothesis tests and regressions.

mod counterfactual;
mod regression;
mod sensitivity;
mod skew;
mod stats;
mod weights;

pub mod pipeline;



use thiserror::Error;

pub use counterfactual::{
    counterfactual_skew, expected_skew, pool_weights, rep_skews, weighted_skew_draws, CounterfactualModelSpec, CounterfactualResult,
    PoolItem, StanceSubset, WeightedSampler,
};
pub use regression::{
    linear_fit, logistic_fit, logistic_log_likelihood, logistic_score, ols, vif_scores, vif_screen, LineFit, OlsFit,
    RegressionFit, Term, VifScreen, LOGISTIC_TOL,
};
pub use sensitivity::{
    required_scaling, sensitivity_curve, Family, FamilyParams, ScalingResult, SensitivitySpec, SkewCurve,
};
pub use skew::{
    condition_trends, ideological_content, mismatch_proportion, partisanship_split_report, rolling_average,
    topic_partisan_table, PartisanshipRow, TopicRow,
};
pub use stats::{chi_squared_test, mean, t_test_independent, variance, ChiSquared, TTest, TTestVariant};
pub use weights::{features, minmax_normalize, pca_first_component_weights, recency_scale, Metric, Recency};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("no political content")]
    NoPoliticalContent,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("every column is constant")]
    ZeroVariance,
    #[error("principal component loadings sum to zero")]
    DegenerateLoadings,
    #[error("empty pool")]
    EmptyPool,
    #[error("every pool weight is zero")]
    AllZeroWeights,
    #[error("target skew {target} outside attainable range [{low}, {high}]")]
    Unreachable { target: f64, low: f64, high: f64 },
    #[error("sampled skew is not monotone in the mean gap; increase trials")]
    NonMonotone,
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("contingency table has a zero expected cell")]
    ZeroExpectedCell,
    #[error("singular design: {0}")]
    SingularDesign(String),
    #[error("no convergence after {iterations} iterations")]
    Nonconvergence { iterations: usize },
    #[error("complete separation; set ridge > 0")]
    CompleteSeparation,
    #[error("no watches by partisan-conditioned bots")]
    NoPartisanWatches,
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}
