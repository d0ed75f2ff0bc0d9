//! Per-token class distributions.
//!
//! Classes are ordered `(None, Title, Date, Text, Author, Tag)`. Backends
//! implement [`TokenClassifier`]; the built-ins are a rule cascade, a
//! softmax regression over engineered features, and a reader for prediction
//! files produced by external models.

mod external;
mod features;
mod heuristic;
mod softmax;

use serde::{Deserialize, Serialize};

use crate::dataset::AttributeKind;
use crate::dom::{DomTree, NodeId};
use crate::featurize::{Chunk, TokenRole};
use crate::scalar::Real;

pub use external::{read_predictions, write_predictions, ExternalPredictions};
pub use features::{FeatureExtractor, PageStats, NODE_FEATURES};
pub use heuristic::{heuristic_extract, HeuristicClassifier};
pub use softmax::{examples_from, Example, SoftmaxClassifier, SoftmaxModel, TrainConfig, TrainReport};

pub const NUM_CLASSES: usize = 6;

/// Distribution over the six classes.
pub type ClassProbs<T> = [T; NUM_CLASSES];

pub fn class_label(class: usize) -> Option<AttributeKind> {
    AttributeKind::from_class_id(class)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax<T: PartialOrd + Copy>(probs: &[T]) -> usize {
    let mut best = 0;
    for (i, p) in probs.iter().enumerate().skip(1) {
        if *p > probs[best] {
            best = i;
        }
    }
    best
}

/// Window a prediction came from, for overlap resolution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChunkPos {
    pub start: usize,
    /// Index of the token inside the window.
    pub index: usize,
    pub len: usize,
}

impl ChunkPos {
    /// Distance to the nearer window boundary.
    pub fn edge_distance(&self) -> usize {
        self.index.min(self.len.saturating_sub(1).saturating_sub(self.index))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct TokenPrediction<T> {
    pub page_id: String,
    pub node_id: NodeId,
    pub offset: usize,
    #[serde(default = "content_role")]
    pub role: TokenRole,
    pub probs: ClassProbs<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunk: Option<ChunkPos>,
}

fn content_role() -> TokenRole {
    TokenRole::Content
}

impl<T: Real> TokenPrediction<T> {
    pub fn label(&self) -> usize {
        argmax(&self.probs)
    }

    /// Non-negative, finite, and summing to one within `1e-6`.
    pub fn is_valid(&self) -> bool {
        let sum: f64 = self.probs.iter().map(|p| p.as_f64()).sum();
        self.probs.iter().all(|p| p.is_finite() && *p >= T::zero()) && (sum - 1.0).abs() <= 1e-6
    }
}

/// Hard distribution putting all mass on `class`.
pub fn one_hot<T: Real>(class: usize) -> ClassProbs<T> {
    let mut p = [T::zero(); NUM_CLASSES];
    p[class] = T::one();
    p
}

/// Everything a backend may look at when predicting one page.
#[derive(Clone, Copy, Debug)]
pub struct PageInput<'a> {
    pub page_id: &'a str,
    pub tree: &'a DomTree,
    pub chunks: &'a [Chunk],
}

pub trait TokenClassifier<T: Real>: Send + Sync {
    fn name(&self) -> String;

    /// One prediction per predicted token of `page.chunks`.
    fn predict_page(&self, page: &PageInput<'_>) -> Result<Vec<TokenPrediction<T>>, ClassifyError>;
}

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("feature dimension {got} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("feature schema {got} does not match checkpoint schema {expected}")]
    SchemaMismatch { expected: String, got: String },
    #[error("no labeled tokens to train on")]
    NoLabeledTokens,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("{source_name} line {line}: {message}")]
    Malformed {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("no predictions for page {0}")]
    MissingPage(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Runs `classifier` over every predicted token of `chunks`, for callers
/// that build [`PageInput`] themselves.
pub fn predict_tokens<T: Real>(
    classifier: &dyn TokenClassifier<T>,
    page: &PageInput<'_>,
) -> Result<Vec<TokenPrediction<T>>, ClassifyError> {
    classifier.predict_page(page)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[0.5, 0.5, 0.0]), 0);
        assert_eq!(argmax(&[0.1, 0.3, 0.3, 0.3]), 1);
        assert_eq!(argmax(&[0.0, 0.0, 1.0]), 2);
    }

    #[test]
    fn edge_distance() {
        let p = |index, len| ChunkPos { start: 0, index, len }.edge_distance();
        assert_eq!(p(0, 10), 0);
        assert_eq!(p(9, 10), 0);
        assert_eq!(p(4, 10), 4);
        assert_eq!(p(5, 10), 4);
    }

    #[test]
    fn prediction_json_shape() {
        let p = TokenPrediction::<f64> {
            page_id: "u".into(),
            node_id: NodeId(3),
            offset: 7,
            role: TokenRole::Content,
            probs: one_hot(2),
            chunk: None,
        };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"page_id":"u","node_id":3,"offset":7,"role":"content","probs":[0.0,0.0,1.0,0.0,0.0,0.0]}"#);
        let minimal: TokenPrediction<f32> =
            serde_json::from_str(r#"{"page_id":"u","node_id":3,"offset":7,"probs":[0,0,1,0,0,0]}"#).unwrap();
        assert_eq!(minimal.role, TokenRole::Content);
        assert!(minimal.is_valid());
    }
}
