use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::LabelError;
use crate::model::StanceLabel;

/// The three video prompts plus comment classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Question {
    Political,
    Election,
    Stance,
    CommentStance,
}

impl Question {
    pub fn is_binary(self) -> bool {
        matches!(self, Question::Political | Question::Election)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Question::Political => "political",
            Question::Election => "election",
            Question::Stance => "stance",
            Question::CommentStance => "comment_stance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Binary(bool),
    Stance(StanceLabel),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierVerdict {
    pub rater_id: String,
    pub question: Question,
    pub answer: Answer,
}

impl ClassifierVerdict {
    pub fn new(rater_id: impl Into<String>, question: Question, answer: Answer) -> Self {
        Self {
            rater_id: rater_id.into(),
            question,
            answer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsemblePolicy {
    pub n_raters: usize,
    /// Decides binary questions when the other raters split evenly.
    pub binary_tiebreaker_rater: Option<String>,
}

impl Default for EnsemblePolicy {
    fn default() -> Self {
        Self {
            n_raters: 3,
            binary_tiebreaker_rater: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteOutcome {
    Label(Answer),
    Unresolved,
}

impl VoteOutcome {
    pub fn label(self) -> Option<Answer> {
        match self {
            VoteOutcome::Label(a) => Some(a),
            VoteOutcome::Unresolved => None,
        }
    }
}

/// Combines one verdict per rater into an ensemble label.
///
/// Binary questions take the majority of the primary raters (everyone but
/// the tiebreaker); an even split goes to the tiebreaker. Five-way stance
/// questions need strictly more than half of `max(n_raters, verdicts)` votes
/// for one label, with the tiebreaker voting as an ordinary rater.
pub fn ensemble_vote(verdicts: &[ClassifierVerdict], policy: &EnsemblePolicy) -> Result<VoteOutcome, LabelError> {
    let first = verdicts.first().ok_or(LabelError::NoVerdicts)?;
    let question = first.question;
    let mut seen = HashSet::new();
    for v in verdicts {
        if v.question != question {
            return Err(LabelError::MixedQuestions);
        }
        if !seen.insert(v.rater_id.as_str()) {
            return Err(LabelError::DuplicateRater(v.rater_id.clone()));
        }
        let ok = matches!(
            (question.is_binary(), v.answer),
            (true, Answer::Binary(_)) | (false, Answer::Stance(_))
        );
        if !ok {
            return Err(LabelError::ArityMismatch(question));
        }
    }

    if question.is_binary() {
        let tiebreaker = policy.binary_tiebreaker_rater.as_deref();
        let (mut yes, mut no) = (0usize, 0usize);
        let mut tb_answer = None;
        for v in verdicts {
            if Some(v.rater_id.as_str()) == tiebreaker {
                tb_answer = Some(v.answer);
                continue;
            }
            match v.answer {
                Answer::Binary(true) => yes += 1,
                _ => no += 1,
            }
        }
        return match yes.cmp(&no) {
            std::cmp::Ordering::Greater => Ok(VoteOutcome::Label(Answer::Binary(true))),
            std::cmp::Ordering::Less => Ok(VoteOutcome::Label(Answer::Binary(false))),
            std::cmp::Ordering::Equal => tb_answer.map(VoteOutcome::Label).ok_or(LabelError::MissingTiebreaker),
        };
    }

    let mut counts: BTreeMap<Answer, usize> = BTreeMap::new();
    for v in verdicts {
        *counts.entry(v.answer).or_default() += 1;
    }
    let n = policy.n_raters.max(verdicts.len());
    Ok(counts
        .into_iter()
        .find(|&(_, c)| 2 * c > n)
        .map_or(VoteOutcome::Unresolved, |(a, _)| VoteOutcome::Label(a)))
}
