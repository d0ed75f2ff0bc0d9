//! Scoring against ground truth and the cross-validation harness.
//!
//! Titles and texts are compared as bags of n-grams, authors and tags as
//! normalized sets, and dates after parsing. Averages are taken over pages
//! where either side has the attribute, then over folds.

pub mod dates;
mod experiment;
mod metrics;
mod report;
mod splits;

pub use experiment::{
    evaluate_method, run_experiment, truth_article, Design, ExperimentConfig, ExtractionMethod, PageExtractor,
};
pub use metrics::{is_scored, match_dates, match_ngrams, match_sets, score_page, GramUnit, MatchCounts, ScoringConfig};
pub use report::{f1_table, summarize, AttributeSummary, EvalReport, FoldReport, FoldStatus, PageScore};
pub use splits::{make_splits, SplitPlan};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EvaluateError {
    #[error("cannot split {sites} sites into {k} folds")]
    TooFewSites { k: usize, sites: usize },
}
