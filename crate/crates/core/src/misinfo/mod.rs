//! Screening transcripts against a corpus of debunked headlines.
//!
//! A transcript matches at threshold `t` when its most similar headline has
//! cosine similarity `>= t`.
//!
//! ```
//! use puppet_audit::misinfo::{cosine_similarity, Embedder, HashedBagOfTokens};
//!
//! let e = HashedBagOfTokens::default();
//! let a = e.embed("The ballots were shredded").unwrap();
//! let b = e.embed("ballots were SHREDDED, the").unwrap();
//! assert!((cosine_similarity(&a, &b).unwrap() - 1.0).abs() < 1e-12);
//! ```

mod corpus;
mod embed;
mod report;

use thiserror::Error;

pub use corpus::{parse_corpus, read_corpus, read_transcripts, Headline, HeadlineCorpus, Transcript, DEFAULT_RATINGS};
pub use embed::{cosine_similarity, fnv1a, tokens, Embedder, EmbeddingVector, HashedBagOfTokens, DEFAULT_DIM};
pub use report::{misinfo_report, MisinfoReport, MisinfoRow, DEFAULT_THRESHOLDS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MisinfoError {
    #[error("text has no tokens")]
    EmptyText,
    #[error("zero vector")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("non-finite embedding entry")]
    NonFinite,
    #[error("thresholds must be sorted ascending within [-1, 1]")]
    BadThresholds,
    #[error("empty headline corpus")]
    EmptyCorpus,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}
