use rayon::prelude::*;

use super::{cosine_similarity, Embedder, HeadlineCorpus, MisinfoError, Transcript};
use crate::model::StanceLabel;

pub const DEFAULT_THRESHOLDS: [f64; 4] = [0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq)]
pub struct MisinfoRow {
    pub stance: StanceLabel,
    pub n_transcripts: usize,
    /// One count per threshold.
    pub matches: Vec<usize>,
    /// `100 * matches / n_transcripts`, or 0 with no transcripts.
    pub percent: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisinfoReport {
    pub thresholds: Vec<f64>,
    /// One row per stance, in `StanceLabel::ALL` order.
    pub rows: Vec<MisinfoRow>,
    /// Best headline similarity of each transcript, in input order.
    pub max_similarity: Vec<f64>,
}

impl MisinfoReport {
    /// Wide CSV: one row per stance, one percentage column per threshold.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut out = crate::report::banner("misinfo");
        out.push_str("stance,n_transcripts");
        for t in &self.thresholds {
            out.push_str(&format!(",pct_ge_{t}"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{}", r.stance, r.n_transcripts));
            for p in &r.percent {
                out.push_str(&format!(",{p}"));
            }
            out.push('\n');
        }
        out.into_bytes()
    }
}

/// Percentage of each stance's transcripts whose best headline similarity
/// reaches each threshold.
pub fn misinfo_report(
    transcripts: &[Transcript],
    corpus: &HeadlineCorpus,
    thresholds: &[f64],
    embedder: &dyn Embedder,
) -> Result<MisinfoReport, MisinfoError> {
    if thresholds.iter().any(|t| !(-1.0..=1.0).contains(t)) || thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(MisinfoError::BadThresholds);
    }
    if corpus.headlines.is_empty() {
        return Err(MisinfoError::EmptyCorpus);
    }
    let heads = corpus
        .headlines
        .par_iter()
        .map(|h| embedder.embed(&h.text))
        .collect::<Result<Vec<_>, _>>()?;
    let max_similarity = transcripts
        .par_iter()
        .map(|t| {
            let v = embedder.embed(&t.text)?;
            heads.iter().try_fold(f64::NEG_INFINITY, |m, h| Ok(m.max(cosine_similarity(&v, h)?)))
        })
        .collect::<Result<Vec<f64>, MisinfoError>>()?;
    let rows = StanceLabel::ALL
        .iter()
        .map(|&stance| {
            let sims: Vec<f64> = transcripts
                .iter()
                .zip(&max_similarity)
                .filter(|(t, _)| t.stance == stance)
                .map(|(_, s)| *s)
                .collect();
            let n = sims.len();
            let matches: Vec<usize> = thresholds.iter().map(|&t| sims.iter().filter(|&&s| s >= t).count()).collect();
            let percent = matches
                .iter()
                .map(|&m| if n == 0 { 0.0 } else { 100.0 * m as f64 / n as f64 })
                .collect();
            MisinfoRow {
                stance,
                n_transcripts: n,
                matches,
                percent,
            }
        })
        .collect();
    Ok(MisinfoReport {
        thresholds: thresholds.to_vec(),
        rows,
        max_similarity,
    })
}
