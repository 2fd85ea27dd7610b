//! Questionnaire scoring and paired pre/post statistics.

mod report;
mod scales;
mod wilcoxon;

use thiserror::Error;

pub use report::{
    pre_post_report, Dataset, Measure, MeasureOutcome, MeasureRow, Phase, Report, ResponseRow,
    SMALL_SAMPLE_N,
};
pub use scales::{
    score_mist, score_nmls, score_selfefficacy, score_voi, Instruments, NmlsItemMap, NmlsScores,
    NmlsSubscale, ScaleScores, Veracity, MIST_ITEMS, NMLS_ITEMS, SELF_EFFICACY_ITEMS, VOI_ITEMS,
};
pub use wilcoxon::{
    exact_p_value, normal_approximation, wilcoxon_signed_rank, Method, SignedRanks, WilcoxonResult,
    EXACT_MAX_N,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("item {item} has out-of-range response {value}")]
    OutOfRange { item: usize, value: f64 },
    #[error("bad item map: {0}")]
    BadItemMap(String),
    #[error("every paired difference is zero")]
    AllZeroDifferences,
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("row {row}: {reason}")]
    ParseError { row: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
