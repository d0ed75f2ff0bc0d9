use sha2::{Digest, Sha256};

use crate::dom::DomTree;
use crate::evaluate::dates::is_date_like;
use crate::featurize::{Chunk, TagVocab, TokenRole};
use crate::scalar::Real;

/// Names of the features that follow the tag one-hot block.
pub const NODE_FEATURES: &[&str] = &[
    "depth",
    "sibling_index",
    "log_text_len",
    "token_position",
    "digit_frac",
    "punct_frac",
    "upper_frac",
    "date_like",
    "page_rank",
    "is_bos",
];

#[derive(Clone, Copy, Debug)]
struct NodeStats {
    tag: u32,
    depth: f64,
    sibling: f64,
    text_len: f64,
    log_len: f64,
    digit: f64,
    punct: f64,
    upper: f64,
    date_like: f64,
    rank: f64,
}

pub struct PageStats(Vec<NodeStats>);

/// Engineered per-token features: tag one-hot (vocabulary + UNK) followed
/// by [`NODE_FEATURES`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureExtractor {
    pub vocab: TagVocab,
}

fn fraction(text: &str, pred: impl Fn(char) -> bool) -> f64 {
    let total = text.chars().filter(|c| !c.is_whitespace()).count();
    if total == 0 {
        return 0.0;
    }
    text.chars().filter(|&c| pred(c)).count() as f64 / total as f64
}

impl FeatureExtractor {
    pub fn new(vocab: TagVocab) -> Self {
        FeatureExtractor { vocab }
    }

    pub fn dim(&self) -> usize {
        self.vocab.len() + 1 + NODE_FEATURES.len()
    }

    /// Digest of the feature layout; checkpoints refuse other layouts.
    pub fn schema_hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.vocab.tags {
            h.update(t.as_bytes());
            h.update([0]);
        }
        h.update([1]);
        for f in NODE_FEATURES {
            h.update(f.as_bytes());
            h.update([0]);
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Per-node statistics, computed once per page.
    pub fn page_stats(&self, tree: &DomTree) -> PageStats {
        let n = tree.len().max(1) as f64;
        PageStats(tree.nodes
            .iter()
            .map(|node| {
                let text = &node.text;
                let len = text.len() as f64;
                NodeStats {
                    tag: self.vocab.id(&node.tag),
                    depth: node.depth as f64 / 50.0,
                    sibling: node.sibling_index as f64 / 50.0,
                    text_len: len,
                    log_len: (1.0 + len).ln() / 10.0,
                    digit: fraction(text, |c| c.is_numeric()),
                    punct: fraction(text, |c| c.is_ascii_punctuation() || (!c.is_alphanumeric() && !c.is_whitespace())),
                    upper: {
                        let alpha = text.chars().filter(|c| c.is_alphabetic()).count();
                        if alpha == 0 {
                            0.0
                        } else {
                            text.chars().filter(|c| c.is_uppercase()).count() as f64 / alpha as f64
                        }
                    },
                    date_like: if !text.is_empty() && is_date_like(text) { 1.0 } else { 0.0 },
                    rank: node.node_id.0 as f64 / n,
                }
            })
            .collect())
    }

    fn write_token(&self, s: &NodeStats, role: TokenRole, position: u32, out: &mut [f64]) {
        let v = self.vocab.len() + 1;
        out[(s.tag as usize).min(v - 1)] = 1.0;
        let pos = (position as f64 / (s.text_len + 1.0)).min(1.0);
        let rest = [
            s.depth,
            s.sibling,
            s.log_len,
            pos,
            s.digit,
            s.punct,
            s.upper,
            s.date_like,
            s.rank,
            if role == TokenRole::Bos { 1.0 } else { 0.0 },
        ];
        out[v..].copy_from_slice(&rest);
    }

    /// Feature rows for the tokens of `chunk` selected by `keep`, with
    /// their indices.
    pub fn chunk_features<T: Real>(
        &self,
        stats: &PageStats,
        chunk: &Chunk,
        keep: impl Fn(usize) -> bool,
    ) -> Vec<(usize, Vec<T>)> {
        let mut buf = vec![0.0; self.dim()];
        (0..chunk.len())
            .filter(|&i| keep(i))
            .filter_map(|i| {
                let s = stats.0.get(chunk.node_ids[i].0)?;
                buf.iter_mut().for_each(|x| *x = 0.0);
                self.write_token(s, chunk.roles[i], chunk.positions[i], &mut buf);
                Some((i, buf.iter().map(|&x| T::of(x)).collect()))
            })
            .collect()
    }
}
