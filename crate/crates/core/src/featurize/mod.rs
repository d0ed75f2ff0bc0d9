//! Model-ready token sequences.
//!
//! Two schemes share one [`Chunk`] type. Scheme A flattens text-bearing
//! nodes into a page stream tagged with XPath ids and cuts it into
//! overlapping windows. Scheme B packs node representations into subtrees
//! with structural features.

mod chunk;
mod io;
mod subtree;
mod tokenizer;
mod tuples;
mod vocab;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use chunk::{chunk, chunk_page, page_stream, window_starts, Chunk, PageStream};
pub use io::{read_chunks, write_chunks};
pub use subtree::{node_representation, split_subtrees, Subtree, SubtreeBatch, SubtreeNode, SubtreeWarning};
pub use tokenizer::{ByteTokenizer, Tokenizer};
pub use tuples::{node_tuples, NodeTuple};
pub use vocab::{TagVocab, DEFAULT_TAGS, MAX_SUBSCRIPT, PAD_SUBSCRIPT};

/// Label of tokens excluded from loss and aggregation.
pub const IGNORE: i64 = -100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LabelingScheme {
    /// Only the BOS token of a node carries its label.
    BosOnly,
    /// Every content token of a node carries its label.
    AllTokens,
}

impl fmt::Display for LabelingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelingScheme::BosOnly => "BOS_ONLY",
            LabelingScheme::AllTokens => "ALL_TOKENS",
        })
    }
}

impl FromStr for LabelingScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "BOS_ONLY" => Ok(LabelingScheme::BosOnly),
            "ALL_TOKENS" => Ok(LabelingScheme::AllTokens),
            other => Err(format!("unknown labeling scheme {other:?}")),
        }
    }
}

/// Position of a token inside its node representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenRole {
    Bos,
    Content,
    Eos,
    /// Ancestor context in a subtree; never labeled or predicted.
    Context,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChunkingConfig {
    pub max_seq_length: usize,
    pub doc_stride: usize,
    pub labeling_scheme: LabelingScheme,
    pub ignore_index: i64,
    /// XPath steps kept per token.
    pub max_depth: usize,
}

impl Default for ChunkingConfig {
    fn default() -> Self {
        ChunkingConfig {
            max_seq_length: 512,
            doc_stride: 170,
            labeling_scheme: LabelingScheme::BosOnly,
            ignore_index: IGNORE,
            max_depth: 50,
        }
    }
}

impl ChunkingConfig {
    pub fn validate(&self) -> Result<(), FeaturizeError> {
        let bad = |reason: &str| Err(FeaturizeError::InvalidConfig(reason.to_string()));
        if self.doc_stride == 0 || self.doc_stride > self.max_seq_length {
            return bad("doc_stride must satisfy 0 < doc_stride <= max_seq_length");
        }
        if self.max_seq_length < 3 {
            return bad("max_seq_length must be at least 3");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive");
        }
        if (0..crate::classify::NUM_CLASSES as i64).contains(&self.ignore_index) {
            return bad("ignore_index collides with a class id");
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FeaturizeError {
    #[error("page {0} has no tokens")]
    EmptyPage(String),
    #[error("invalid chunking config: {0}")]
    InvalidConfig(String),
    #[error("malformed chunk line {line}: {message}")]
    Malformed { line: usize, message: String },
}
