//! Ensemble voting over pluggable classifiers, channel-alignment
//! classification, comment-stance proportions and inter-rater agreement.

mod agreement;
mod channel;
mod classifier;
mod ensemble;

use thiserror::Error;

pub use agreement::{
    accuracy, cohen_kappa, cohen_kappa_labels, confusion_matrix, f1_macro, fleiss_kappa, fleiss_kappa_counts,
    krippendorff_alpha_nominal, AgreementMetric,
};
pub use channel::{classify_channel, comment_alignment_proportions, ChannelClass, CommentProportions};
pub use classifier::{label_item, Classifier, ItemLabels, LabelItem, OracleClassifier};
pub use ensemble::{ensemble_vote, Answer, ClassifierVerdict, EnsemblePolicy, Question, VoteOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabelError {
    #[error("verdicts answer more than one question")]
    MixedQuestions,
    #[error("binary split with no tiebreaker verdict")]
    MissingTiebreaker,
    #[error("rater {0} voted twice")]
    DuplicateRater(String),
    #[error("answer type does not match question {0:?}")]
    ArityMismatch(Question),
    #[error("no verdicts")]
    NoVerdicts,
    #[error("comment proportions are undefined for a neutral video")]
    NeutralVideo,
    #[error("no comments")]
    EmptyComments,
    #[error("agreement undefined: chance agreement is 1")]
    DegenerateAgreement,
    #[error("insufficient ratings: {0}")]
    InsufficientData(String),
    #[error("ratings matrix is malformed: {0}")]
    Shape(String),
}
