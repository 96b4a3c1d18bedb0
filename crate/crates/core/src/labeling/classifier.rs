use serde::{Deserialize, Serialize};

use super::{ensemble_vote, Answer, ClassifierVerdict, EnsemblePolicy, LabelError, Question, VoteOutcome};
use crate::model::{StanceLabel, VideoRecord};
use crate::seed::{fnv1a, mix};

/// What a classifier sees. The simulator knows the truth, so the oracle
/// backend reads it from here; real backends would read a transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelItem {
    pub id: String,
    pub political: bool,
    pub election: bool,
    pub stance: Option<StanceLabel>,
}

impl From<&VideoRecord> for LabelItem {
    fn from(v: &VideoRecord) -> Self {
        Self {
            id: v.video_id.0.clone(),
            political: v.is_political,
            election: v.is_election_related,
            stance: v.stance,
        }
    }
}

/// A labeling backend: one item and question in, one verdict out.
pub trait Classifier: Send + Sync {
    fn rater_id(&self) -> &str;
    fn classify(&self, item: &LabelItem, question: Question) -> ClassifierVerdict;
}

/// Returns the true label, corrupted with probability `noise_rate`. A
/// corrupted binary answer is flipped; a corrupted stance is replaced by one
/// of the other four uniformly. Noise is a pure function of
/// `(seed, item, question)`.
#[derive(Debug, Clone)]
pub struct OracleClassifier {
    pub id: String,
    pub noise_rate: f64,
    pub seed: u64,
}

impl OracleClassifier {
    pub fn new(id: impl Into<String>, noise_rate: f64, seed: u64) -> Self {
        Self {
            id: id.into(),
            noise_rate,
            seed,
        }
    }

    fn uniform(&self, item: &LabelItem, question: Question, salt: u64) -> (f64, u64) {
        let h = mix(self.seed, &[fnv1a(item.id.as_bytes()), question as u64, salt]);
        ((h >> 11) as f64 / (1u64 << 53) as f64, h)
    }
}

impl Classifier for OracleClassifier {
    fn rater_id(&self) -> &str {
        &self.id
    }

    fn classify(&self, item: &LabelItem, question: Question) -> ClassifierVerdict {
        let (u, h) = self.uniform(item, question, 0);
        let corrupt = u < self.noise_rate;
        let answer = match question {
            Question::Political | Question::Election => {
                let truth = if question == Question::Political {
                    item.political
                } else {
                    item.election
                };
                Answer::Binary(truth ^ corrupt)
            }
            Question::Stance | Question::CommentStance => {
                let truth = item.stance.unwrap_or(StanceLabel::Neutral);
                if corrupt {
                    let others: Vec<_> = StanceLabel::ALL.into_iter().filter(|s| *s != truth).collect();
                    Answer::Stance(others[(h % 4) as usize])
                } else {
                    Answer::Stance(truth)
                }
            }
        };
        ClassifierVerdict::new(self.id.clone(), question, answer)
    }
}

/// Ensemble labels for one video plus the raw verdicts behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemLabels {
    pub political: bool,
    pub election: bool,
    pub stance: Option<StanceLabel>,
    pub verdicts: Vec<ClassifierVerdict>,
}

/// The three-question pipeline: political? then, for political items,
/// election-related? and which stance? An unresolved stance vote leaves the
/// item unlabeled.
pub fn label_item(item: &LabelItem, raters: &[&dyn Classifier], policy: &EnsemblePolicy) -> Result<ItemLabels, LabelError> {
    let mut all = Vec::new();
    let mut ask = |q: Question| -> Result<VoteOutcome, LabelError> {
        let verdicts: Vec<_> = raters.iter().map(|r| r.classify(item, q)).collect();
        let out = ensemble_vote(&verdicts, policy);
        all.extend(verdicts);
        out
    };
    let political = ask(Question::Political)?.label() == Some(Answer::Binary(true));
    let (election, stance) = if political {
        let election = ask(Question::Election)?.label() == Some(Answer::Binary(true));
        let stance = match ask(Question::Stance)?.label() {
            Some(Answer::Stance(s)) => Some(s),
            _ => None,
        };
        (election, stance)
    } else {
        (false, None)
    };
    Ok(ItemLabels {
        political,
        election,
        stance,
        verdicts: all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(i: usize) -> LabelItem {
        LabelItem {
            id: format!("v{i}"),
            political: i % 2 == 0,
            election: i % 4 == 0,
            stance: (i % 2 == 0).then(|| StanceLabel::ALL[i % 5]),
        }
    }

    #[test]
    fn noiseless_oracle_reproduces_truth() {
        let raters: Vec<OracleClassifier> = (0..3).map(|k| OracleClassifier::new(format!("r{k}"), 0.0, k)).collect();
        let refs: Vec<&dyn Classifier> = raters.iter().map(|r| r as &dyn Classifier).collect();
        let policy = EnsemblePolicy {
            n_raters: 3,
            binary_tiebreaker_rater: Some("r2".into()),
        };
        for i in 0..50 {
            let it = item(i);
            let l = label_item(&it, &refs, &policy).unwrap();
            assert_eq!(l.political, it.political);
            assert_eq!(l.election, it.election);
            assert_eq!(l.stance, it.stance);
        }
    }

    #[test]
    fn noise_rate_is_respected() {
        let r = OracleClassifier::new("r", 0.2, 7);
        let n = 20_000;
        let wrong = (0..n)
            .filter(|&i| {
                let it = item(i);
                r.classify(&it, Question::Political).answer != Answer::Binary(it.political)
            })
            .count() as f64;
        // binomial sd = sqrt(n * 0.16) ~ 57
        assert!((wrong - 0.2 * n as f64).abs() < 4.0 * (n as f64 * 0.16).sqrt());
    }

    #[test]
    fn oracle_is_deterministic() {
        let r = OracleClassifier::new("r", 0.5, 11);
        for i in 0..20 {
            assert_eq!(r.classify(&item(i), Question::Stance), r.classify(&item(i), Question::Stance));
        }
    }
}
