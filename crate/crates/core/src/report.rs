//! CSV emission for analysis tables.
//!
//! Every file starts with a comment line naming the producing version and
//! table schema, then a header row:
//!
//! ```text
//! # puppet-audit 0.1.0 / skew_by_week v1
//! week,condition,n_runs,mean,ci_low,ci_high
//! ```
//!
//! Missing values are empty cells. Floats use the shortest representation
//! that round-trips, so identical results give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::pipeline::AnalysisResults;

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown table {0:?}")]
    UnknownTable(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Comment line that opens every table.
pub fn banner(table: &str) -> String {
    format!("# puppet-audit {} / {table} {SCHEMA_VERSION}\n", env!("CARGO_PKG_VERSION"))
}

/// Renders one table. The header comes from `columns`, so an empty table
/// still names its columns.
pub fn render_table<R: Serialize>(name: &str, columns: &[&str], rows: &[R]) -> Result<Vec<u8>, ReportError> {
    let mut buf = banner(name).into_bytes();
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut buf);
        w.write_record(columns)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub key: String,
    pub value: String,
}

fn summary(r: &AnalysisResults) -> Vec<SummaryRow> {
    let row = |k: &str, v: String| SummaryRow { key: k.into(), value: v };
    let count = |role: &str| r.run_scores.iter().filter(|s| s.role == role).count();
    vec![
        row("matched_pairs", r.pair_skews.len().to_string()),
        row("pair_runs", count("pair").to_string()),
        row("control_runs", count("control").to_string()),
        row("pooled_skew", r.pooled_skew.map_or(String::new(), |s| s.to_string())),
    ]
}

macro_rules! tables {
    ($($name:literal => |$r:ident| $rows:expr, [$($col:literal),* $(,)?];)*) => {
        /// Names of every table, in emission order.
        pub const TABLES: &[&str] = &[$($name),*];

        /// Column names of a table.
        pub fn columns(name: &str) -> Option<&'static [&'static str]> {
            match name {
                $($name => Some(&[$($col),*]),)*
                _ => None,
            }
        }

        fn render_named(results: &AnalysisResults, name: &str) -> Result<Vec<u8>, ReportError> {
            match name {
                $($name => {
                    let $r = results;
                    render_table(name, &[$($col),*], &$rows)
                })*
                _ => Err(ReportError::UnknownTable(name.to_string())),
            }
        }
    };
}

tables! {
    "summary" => |r| summary(r), ["key", "value"];
    "run_scores" => |r| r.run_scores, [
        "run_id", "week", "condition", "leaning", "role", "n_recommendations", "n_political",
        "political_share", "ideological_content", "copartisan_share", "crosspartisan_share",
    ];
    "pair_skews" => |r| r.pair_skews, ["week", "state", "dem_run", "rep_run", "n", "skew"];
    "skew_by_week" => |r| r.skew_by_week, ["week", "condition", "n_runs", "mean", "ci_low", "ci_high"];
    "monthly_content" => |r| r.monthly_content, ["condition", "month", "n_runs", "mean_content"];
    "t_tests" => |r| r.t_tests, [
        "comparison", "group_a", "group_b", "n_a", "n_b", "mean_a", "mean_b", "t", "df", "p", "status",
    ];
    "trends" => |r| r.trends, [
        "condition", "measure", "n_weeks", "slope", "intercept", "slope_ci_low", "slope_ci_high", "status",
    ];
    "counterfactuals" => |r| r.counterfactuals, [
        "model", "metric", "recency", "subset", "weeks", "mean", "std_error", "expected", "observed_mean",
        "t", "df", "p", "status",
    ];
    "verified_sweep" => |r| r.verified_sweep, ["verified_weight", "weeks", "mean", "std_error", "expected", "status"];
    "sensitivity" => |r| r.sensitivity, [
        "metric", "family", "observed_gap", "target_skew", "s_zero", "delta_star", "k", "status",
    ];
    "mismatch_channels" => |r| r.mismatch_channels, ["channel_id", "alignment", "n_watches", "mismatch"];
    "mismatch_test" => |r| r.mismatch_test, [
        "rep_channels_mismatched", "rep_channels_matched", "dem_channels_mismatched", "dem_channels_matched",
        "chi_squared", "df", "p", "status",
    ];
    "regression" => |r| r.regression, [
        "model", "term", "coefficient", "std_error", "z", "p", "odds_ratio", "or_ci_low", "or_ci_high",
        "ridge", "converged", "iterations", "log_likelihood", "n",
    ];
    "vif" => |r| r.vif, ["model", "term", "vif", "kept"];
    "partisanship" => |r| r.partisanship, [
        "group", "n_political", "pro_democrat", "anti_democrat", "pro_republican", "anti_republican",
        "positive_skew", "negative_skew", "negative_majority_dem_content", "negative_majority_rep_content",
        "status",
    ];
    "topics" => |r| r.topics, ["topic", "n_videos", "dem_share", "rep_share", "difference", "chi_squared", "p"];
    "agreement" => |r| r.agreement, ["question", "metric", "n_items", "value", "status"];
    "channel_classes" => |r| r.channel_classes, [
        "channel_id", "n_labeled", "supplemented", "dem_share", "rep_share", "class", "reference",
    ];
    "comments" => |r| r.comments, ["alignment", "n_videos", "mean_copartisan", "mean_opposing"];
    "rolling_political" => |r| r.rolling_political, ["leaning", "week", "political_share", "rolling"];
}

/// Renders one named table.
pub fn render(results: &AnalysisResults, name: &str) -> Result<Vec<u8>, ReportError> {
    render_named(results, name)
}

/// Writes `<name>.csv` into `dir` for each selected table (all when
/// `select` is `None`) and returns the written paths.
pub fn write_tables(results: &AnalysisResults, dir: &Path, select: Option<&[String]>) -> Result<Vec<PathBuf>, ReportError> {
    let names: Vec<String> = match select {
        Some(s) => s.to_vec(),
        None => TABLES.iter().map(|s| s.to_string()).collect(),
    };
    for n in &names {
        if columns(n).is_none() {
            return Err(ReportError::UnknownTable(n.clone()));
        }
    }
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for n in names {
        let path = dir.join(format!("{n}.csv"));
        fs::write(&path, render_named(results, &n)?)?;
        paths.push(path);
    }
    Ok(paths)
}
