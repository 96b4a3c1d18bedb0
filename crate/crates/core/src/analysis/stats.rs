//! Two-sample t-tests and the chi-squared test of independence.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::special::{chi_squared_sf, student_t_two_sided_p};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestVariant {
    #[default]
    Welch,
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n - 1 denominator).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn t_test_independent(a: &[f64], b: &[f64], variant: TTestVariant) -> Result<TTest, AnalysisError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(AnalysisError::DegenerateSample("each sample needs at least two values".into()));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(AnalysisError::DegenerateSample("non-finite value".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (variance(a), variance(b));
    let (se2, df) = match variant {
        TTestVariant::Welch => {
            let (qa, qb) = (va / na, vb / nb);
            let se2 = qa + qb;
            (se2, se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0)))
        }
        TTestVariant::Pooled => {
            let df = na + nb - 2.0;
            let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
            (sp2 * (1.0 / na + 1.0 / nb), df)
        }
    };
    if !(se2 > 0.0) {
        return Err(AnalysisError::DegenerateSample("both samples are constant".into()));
    }
    let t = (ma - mb) / se2.sqrt();
    Ok(TTest {
        t,
        df,
        p: student_t_two_sided_p(t, df),
        mean_a: ma,
        mean_b: mb,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquared {
    pub statistic: f64,
    pub df: f64,
    pub p: f64,
}

/// Pearson's chi-squared test on an `r × c` contingency table, without
/// continuity correction.
pub fn chi_squared_test(observed: &[Vec<f64>]) -> Result<ChiSquared, AnalysisError> {
    let r = observed.len();
    let c = observed.first().map_or(0, Vec::len);
    if r < 2 || c < 2 || observed.iter().any(|row| row.len() != c) {
        return Err(AnalysisError::InsufficientData("contingency table must be at least 2x2".into()));
    }
    let rows: Vec<f64> = observed.iter().map(|row| row.iter().sum()).collect();
    let cols: Vec<f64> = (0..c).map(|j| observed.iter().map(|row| row[j]).sum()).collect();
    let total: f64 = rows.iter().sum();
    let mut stat = 0.0;
    for i in 0..r {
        for j in 0..c {
            let e = rows[i] * cols[j] / total;
            if !(e > 0.0) {
                return Err(AnalysisError::ZeroExpectedCell);
            }
            let d = observed[i][j] - e;
            stat += d * d / e;
        }
    }
    let df = ((r - 1) * (c - 1)) as f64;
    Ok(ChiSquared {
        statistic: stat,
        df,
        p: chi_squared_sf(stat, df),
    })
}
