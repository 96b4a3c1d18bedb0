use std::io::Read;

use super::MisinfoError;
use crate::model::StanceLabel;

/// Ratings kept when loading a corpus, compared case- and
/// punctuation-insensitively.
pub const DEFAULT_RATINGS: &[&str] = &["False", "Mostly False", "Unproven", "Fake", "Unfounded", "Pants on Fire"];

#[derive(Debug, Clone, PartialEq)]
pub struct Headline {
    pub text: String,
    pub rating: String,
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HeadlineCorpus {
    pub headlines: Vec<Headline>,
    /// Rows dropped because their rating is not accepted.
    pub skipped: usize,
}

fn norm_rating(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase()
}

fn tsv<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(input)
}

fn io(e: csv::Error) -> MisinfoError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    MisinfoError::Parse {
        line,
        message: e.to_string(),
    }
}

/// Reads tab-separated `headline, rating[, source]` rows. A first row of
/// `headline\trating` is treated as a header.
pub fn read_corpus<R: Read>(input: R, accepted: &[&str]) -> Result<HeadlineCorpus, MisinfoError> {
    let accepted: Vec<String> = accepted.iter().map(|r| norm_rating(r)).collect();
    let mut out = HeadlineCorpus::default();
    for (i, rec) in tsv(input).records().enumerate() {
        let rec = rec.map_err(io)?;
        let line = i + 1;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if rec.len() < 2 || rec.len() > 3 {
            return Err(MisinfoError::Parse {
                line,
                message: format!("expected 2 or 3 fields, found {}", rec.len()),
            });
        }
        let (text, rating) = (rec[0].trim(), rec[1].trim());
        if i == 0 && text.eq_ignore_ascii_case("headline") && rating.eq_ignore_ascii_case("rating") {
            continue;
        }
        if text.is_empty() {
            return Err(MisinfoError::Parse {
                line,
                message: "empty headline".into(),
            });
        }
        if !accepted.contains(&norm_rating(rating)) {
            out.skipped += 1;
            continue;
        }
        out.headlines.push(Headline {
            text: text.to_string(),
            rating: rating.to_string(),
            source: rec.get(2).map(|s| s.trim().to_string()).filter(|s| !s.is_empty()),
        });
    }
    Ok(out)
}

pub fn parse_corpus(text: &str) -> Result<HeadlineCorpus, MisinfoError> {
    read_corpus(text.as_bytes(), DEFAULT_RATINGS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub stance: StanceLabel,
    pub text: String,
}

/// Reads tab-separated `stance, transcript` rows.
pub fn read_transcripts<R: Read>(input: R) -> Result<Vec<Transcript>, MisinfoError> {
    let mut out = Vec::new();
    for (i, rec) in tsv(input).records().enumerate() {
        let rec = rec.map_err(io)?;
        let line = i + 1;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if rec.len() != 2 {
            return Err(MisinfoError::Parse {
                line,
                message: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        if i == 0 && rec[0].trim().eq_ignore_ascii_case("stance") {
            continue;
        }
        let stance = rec[0].parse::<StanceLabel>().map_err(|e| MisinfoError::Parse {
            line,
            message: e.to_string(),
        })?;
        out.push(Transcript {
            stance,
            text: rec[1].to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters_ratings() {
        let c = parse_corpus(
            "headline\trating\nA claim\tFalse\nAnother\tpants-on-fire\tpolitifact\nTrue thing\tTrue\n",
        )
        .unwrap();
        assert_eq!(c.headlines.len(), 2);
        assert_eq!(c.skipped, 1);
        assert_eq!(c.headlines[1].source.as_deref(), Some("politifact"));
    }

    #[test]
    fn bad_rows() {
        assert!(matches!(
            parse_corpus("only one field\n"),
            Err(MisinfoError::Parse { line: 1, .. })
        ));
        let t = read_transcripts("stance\ttext\nAnti Democrat\tsome words\n".as_bytes()).unwrap();
        assert_eq!(t[0].stance, StanceLabel::AntiDemocrat);
        assert!(read_transcripts("centrist\twords\n".as_bytes()).is_err());
    }
}
