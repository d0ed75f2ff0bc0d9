//! Multilingual attribute extraction for news article pages.
//!
//! The crate covers the whole pipeline that turns a raw HTML page into a
//! structured article record and scores it against ground truth:
//!
//! * [`dom`] parses and cleans HTML, resolves CSS selectors and produces
//!   positional XPath expressions.
//! * [`dataset`] loads annotated page records, maps ground-truth values onto
//!   DOM nodes, validates sitemaps and computes corpus statistics.
//! * [`featurize`] builds labeled token sequences, either as XPath-tuple
//!   chunks with a sliding window or as context-preserving subtrees.
//! * [`classify`] holds the token classifier interface together with a rule
//!   based extractor and a small trainable softmax model.
//! * [`aggregate`] folds token predictions into node labels and assembles
//!   the article record.
//! * [`evaluate`] implements attribute-specific matchers, site-level folds
//!   and the experiment runner.
//! * [`translate`] rewrites node texts through a pluggable translation
//!   backend.
//!
//! Numeric code is generic over the scalar type. The aliases at the crate
//! root pin the common `f64` and `f32` instantiations.

pub mod aggregate;
pub mod classify;
pub mod dataset;
pub mod dom;
pub mod evaluate;
pub mod featurize;
pub mod pipeline;
pub mod scalar;
pub mod translate;

pub use aggregate::{aggregate, page_assemble, AggregationStrategy, Article, NodePrediction};
pub use classify::{ClassProbs, TokenClassifier, TokenPrediction, NUM_CLASSES};
pub use dataset::{AttributeAnnotation, AttributeKind, PageRecord};
pub use dom::{parse_and_clean, DomNode, DomTree, NodeId, XPathExpr};
pub use evaluate::{Design, EvalReport, MatchCounts};
pub use pipeline::{PipelineConfig, Scheme};
pub use featurize::{ByteTokenizer, Chunk, ChunkingConfig, LabelingScheme, TokenRole, Tokenizer};
pub use scalar::{Real, Scalar};

/// Default-precision softmax weights.
pub type SoftmaxModel = classify::SoftmaxModel<f64>;
/// Single-precision softmax weights.
pub type SoftmaxModel32 = classify::SoftmaxModel<f32>;
/// Default-precision trained classifier with its feature layout.
pub type SoftmaxClassifier = classify::SoftmaxClassifier<f64>;
/// Default-precision token prediction.
pub type Prediction = TokenPrediction<f64>;
/// Single-precision token prediction.
pub type Prediction32 = TokenPrediction<f32>;
/// Default-precision node prediction.
pub type NodePrediction64 = NodePrediction<f64>;
/// Default-precision metric counts.
pub type Counts = MatchCounts<f64>;
