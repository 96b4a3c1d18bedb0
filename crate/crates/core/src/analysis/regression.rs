//! Least squares, variance inflation factors and ridge-capable logistic
//! regression fitted by iteratively reweighted least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::special::{normal_sf, student_t_quantile, Z_975};

/// Simple linear regression of `ys` on `xs` with a 95% slope interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub slope_ci_low: f64,
    pub slope_ci_high: f64,
    pub n: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit, AnalysisError> {
    if xs.len() != ys.len() {
        return Err(AnalysisError::InsufficientData("x and y lengths differ".into()));
    }
    let n = xs.len();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if n < 2 || !(sxx > 0.0) {
        return Err(AnalysisError::InsufficientData("need at least two distinct x values".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (se, half) = if n > 2 {
        let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let se = (ssr / (nf - 2.0) / sxx).sqrt();
        (se, student_t_quantile(0.975, nf - 2.0) * se)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_se: se,
        slope_ci_low: slope - half,
        slope_ci_high: slope + half,
        n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub residual_ss: f64,
    pub total_ss: f64,
    pub r_squared: f64,
}

/// Minimum-norm least squares through the SVD; works for rank-deficient
/// designs.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit, AnalysisError> {
    if x.nrows() != y.len() || x.nrows() == 0 {
        return Err(AnalysisError::InsufficientData("design and response sizes differ".into()));
    }
    let svd = x.clone().svd(true, true);
    let beta = svd
        .solve(y, 1e-12)
        .map_err(|e| AnalysisError::SingularDesign(e.to_string()))?;
    let resid = y - x * &beta;
    let my = y.mean();
    let total_ss: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let residual_ss = resid.norm_squared();
    let r_squared = if total_ss > 0.0 { 1.0 - residual_ss / total_ss } else { 1.0 };
    Ok(OlsFit {
        coefficients: beta,
        residual_ss,
        total_ss,
        r_squared,
    })
}

/// `1 / (1 - R²_j)` for each column, where `R²_j` comes from regressing
/// column `j` on the other columns plus an intercept. Exact collinearity is
/// reported as `+∞`.
pub fn vif_scores(design: &DMatrix<f64>) -> Result<Vec<f64>, AnalysisError> {
    let (n, p) = design.shape();
    if p < 2 {
        return Err(AnalysisError::InsufficientData("VIF needs at least two columns".into()));
    }
    if n <= p {
        return Err(AnalysisError::InsufficientData("VIF needs more rows than columns".into()));
    }
    let mut out = Vec::with_capacity(p);
    for j in 0..p {
        let y = design.column(j).into_owned();
        let mut x = DMatrix::from_element(n, p, 1.0);
        for (k, c) in (0..p).filter(|&c| c != j).enumerate() {
            x.set_column(k + 1, &design.column(c));
        }
        let fit = ols(&x, &y)?;
        if fit.total_ss == 0.0 || fit.r_squared > 1.0 - 1e-10 {
            out.push(f64::INFINITY);
        } else {
            out.push(1.0 / (1.0 - fit.r_squared));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifScreen {
    /// Surviving column indexes, in input order.
    pub kept: Vec<usize>,
    /// Dropped columns with the VIF they had when dropped.
    pub dropped: Vec<(usize, f64)>,
    /// Final VIF of each kept column.
    pub vif: Vec<f64>,
}

/// Drops the column with the largest VIF while any VIF is at or above
/// `threshold`, recomputing after each drop.
pub fn vif_screen(design: &DMatrix<f64>, threshold: f64) -> Result<VifScreen, AnalysisError> {
    let mut kept: Vec<usize> = (0..design.ncols()).collect();
    let mut dropped = Vec::new();
    loop {
        if kept.len() < 2 {
            let vif = vec![1.0; kept.len()];
            return Ok(VifScreen { kept, dropped, vif });
        }
        let sub = design.select_columns(&kept);
        let vif = vif_scores(&sub)?;
        let (worst, &v) = vif
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("at least two columns");
        if v < threshold {
            return Ok(VifScreen { kept, dropped, vif });
        }
        dropped.push((kept.remove(worst), v));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub z: f64,
    pub p: f64,
    pub odds_ratio: f64,
    pub or_ci_low: f64,
    pub or_ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub terms: Vec<Term>,
    pub converged: bool,
    pub iterations: usize,
    /// Penalized log-likelihood at the solution (plain when `ridge = 0`).
    pub log_likelihood: f64,
    pub n: usize,
}

impl RegressionFit {
    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn coefficients(&self) -> DVector<f64> {
        DVector::from_iterator(self.terms.len(), self.terms.iter().map(|t| t.coefficient))
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `Σ y η - log(1 + e^η) - ridge/2 ‖β‖²`.
pub fn logistic_log_likelihood(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>, ridge: f64) -> f64 {
    let eta = x * beta;
    let ll: f64 = eta.iter().zip(y).map(|(e, yi)| yi * e - softplus(*e)).sum();
    ll - 0.5 * ridge * beta.norm_squared()
}

/// Gradient of [`logistic_log_likelihood`].
pub fn logistic_score(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>, ridge: f64) -> DVector<f64> {
    let eta = x * beta;
    let resid = DVector::from_iterator(y.len(), eta.iter().zip(y).map(|(e, yi)| yi - sigmoid(*e)));
    x.tr_mul(&resid) - beta * ridge
}

fn information(x: &DMatrix<f64>, beta: &DVector<f64>, ridge: f64) -> DMatrix<f64> {
    let eta = x * beta;
    let mut xw = x.clone();
    for (i, e) in eta.iter().enumerate() {
        let p = sigmoid(*e);
        let w = p * (1.0 - p);
        xw.row_mut(i).scale_mut(w);
    }
    let mut h = x.tr_mul(&xw);
    for k in 0..h.nrows() {
        h[(k, k)] += ridge;
    }
    h
}

pub const LOGISTIC_TOL: f64 = 1e-8;
const MAX_ITER: usize = 100;
const SEPARATION_ETA: f64 = 40.0;

/// Maximizes the ridge-penalized log-likelihood by Newton steps with step
/// halving. Converged means every score component is below `1e-8` in
/// magnitude. Standard errors come from the inverse observed information.
///
/// The penalty applies to every column, intercept included; callers who want
/// an unpenalized intercept should pass `ridge = 0`.
pub fn logistic_fit(x: &DMatrix<f64>, names: &[String], y: &[f64], ridge: f64) -> Result<RegressionFit, AnalysisError> {
    let (n, p) = x.shape();
    if names.len() != p || y.len() != n {
        return Err(AnalysisError::InsufficientData("names, design and outcomes disagree in size".into()));
    }
    if n == 0 || p == 0 {
        return Err(AnalysisError::InsufficientData("empty design".into()));
    }
    if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(AnalysisError::InsufficientData("outcomes must be 0 or 1".into()));
    }
    if !(ridge >= 0.0) {
        return Err(AnalysisError::InsufficientData("ridge must be non-negative".into()));
    }
    let mut beta = DVector::zeros(p);
    let mut ll = logistic_log_likelihood(x, y, &beta, ridge);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        let score = logistic_score(x, y, &beta, ridge);
        if score.amax() < LOGISTIC_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let h = information(x, &beta, ridge);
        let step = h
            .cholesky()
            .ok_or_else(|| AnalysisError::SingularDesign("information matrix is not positive definite".into()))?
            .solve(&score);
        let mut t = 1.0;
        let mut next = &beta + &step;
        let mut next_ll = logistic_log_likelihood(x, y, &next, ridge);
        while next_ll < ll - 1e-12 * ll.abs() && t > 1e-10 {
            t *= 0.5;
            next = &beta + &step * t;
            next_ll = logistic_log_likelihood(x, y, &next, ridge);
        }
        beta = next;
        ll = next_ll;
        if ridge == 0.0 && (x * &beta).amax() > SEPARATION_ETA {
            return Err(AnalysisError::CompleteSeparation);
        }
    }
    if !converged {
        return Err(AnalysisError::Nonconvergence { iterations });
    }
    let cov = information(x, &beta, ridge)
        .try_inverse()
        .ok_or_else(|| AnalysisError::SingularDesign("information matrix is singular".into()))?;
    let terms = names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let b = beta[k];
            let se = cov[(k, k)].sqrt();
            let z = b / se;
            Term {
                name: name.clone(),
                coefficient: b,
                std_error: se,
                z,
                p: 2.0 * normal_sf(z.abs()),
                odds_ratio: b.exp(),
                or_ci_low: (b - Z_975 * se).exp(),
                or_ci_high: (b + Z_975 * se).exp(),
            }
        })
        .collect();
    Ok(RegressionFit {
        terms,
        converged,
        iterations,
        log_likelihood: ll,
        n,
    })
}
