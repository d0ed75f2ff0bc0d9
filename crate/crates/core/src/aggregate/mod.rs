//! Token predictions to node labels, and node labels to articles.

mod assemble;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::{argmax, class_label, TokenPrediction, NUM_CLASSES};
use crate::dataset::AttributeKind;
use crate::dom::NodeId;
use crate::featurize::TokenRole;
use crate::scalar::Scalar;

pub use assemble::{labeled_text, page_assemble, Article};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AggregationStrategy {
    /// Matches the default `BOS_ONLY` labeling.
    #[default]
    Bos,
    First,
    Avg,
    Max,
    Any,
}

impl AggregationStrategy {
    pub const ALL: [AggregationStrategy; 5] = [
        AggregationStrategy::Bos,
        AggregationStrategy::First,
        AggregationStrategy::Avg,
        AggregationStrategy::Max,
        AggregationStrategy::Any,
    ];
}

impl fmt::Display for AggregationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggregationStrategy::Bos => "BOS",
            AggregationStrategy::First => "FIRST",
            AggregationStrategy::Avg => "AVG",
            AggregationStrategy::Max => "MAX",
            AggregationStrategy::Any => "ANY",
        })
    }
}

impl FromStr for AggregationStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AggregationStrategy::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown aggregation strategy {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodePrediction<T> {
    pub node_id: NodeId,
    pub label: Option<AttributeKind>,
    pub confidence: T,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AggregateError {
    #[error("node {0} has no BOS prediction")]
    MissingBOS(NodeId),
    #[error("node {0} has no content-token prediction")]
    EmptyNode(NodeId),
}

/// Keeps one prediction per `(node, offset)`: the one farthest from its
/// window edge, ties to the earlier window, then to input order.
pub fn resolve_overlaps<T: Clone>(preds: &[TokenPrediction<T>]) -> Vec<TokenPrediction<T>> {
    let mut best: BTreeMap<(NodeId, usize), &TokenPrediction<T>> = BTreeMap::new();
    for p in preds {
        let rank = |q: &TokenPrediction<T>| {
            let c = q.chunk.unwrap_or_default();
            (c.edge_distance(), std::cmp::Reverse(c.start))
        };
        best.entry((p.node_id, p.offset))
            .and_modify(|cur| {
                if rank(p) > rank(cur) {
                    *cur = p;
                }
            })
            .or_insert(p);
    }
    best.into_values().cloned().collect()
}

fn max_prob<T: Scalar>(p: &[T; NUM_CLASSES]) -> T {
    p[argmax(p)]
}

fn decide<T: Scalar>(class: usize, confidence: T, node_id: NodeId) -> NodePrediction<T> {
    NodePrediction {
        node_id,
        label: class_label(class),
        confidence,
    }
}

/// Aggregates one node's tokens, which must be sorted by offset.
fn aggregate_node<T: Scalar>(
    node_id: NodeId,
    tokens: &[&TokenPrediction<T>],
    strategy: AggregationStrategy,
) -> Result<NodePrediction<T>, AggregateError> {
    let content: Vec<&TokenPrediction<T>> = tokens.iter().copied().filter(|t| t.role == TokenRole::Content).collect();
    let pool: &[&TokenPrediction<T>] = if content.is_empty() { tokens } else { &content };
    if pool.is_empty() {
        return Err(AggregateError::EmptyNode(node_id));
    }
    let mean = || {
        let n = T::from_count(pool.len());
        let mut m = [T::zero(); NUM_CLASSES];
        for t in pool {
            for (acc, p) in m.iter_mut().zip(&t.probs) {
                *acc = *acc + *p;
            }
        }
        m.map(|v| v / n)
    };
    let strongest = |candidates: &[&TokenPrediction<T>]| -> Option<(usize, T)> {
        let mut best: Option<(usize, T)> = None;
        for t in candidates {
            let (c, v) = (argmax(&t.probs), max_prob(&t.probs));
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((c, v));
            }
        }
        best
    };
    Ok(match strategy {
        AggregationStrategy::Bos => {
            let bos = tokens
                .iter()
                .find(|t| t.role == TokenRole::Bos)
                .ok_or(AggregateError::MissingBOS(node_id))?;
            let c = argmax(&bos.probs);
            decide(c, bos.probs[c], node_id)
        }
        AggregationStrategy::First => {
            let first = content.first().ok_or(AggregateError::EmptyNode(node_id))?;
            let c = argmax(&first.probs);
            decide(c, first.probs[c], node_id)
        }
        AggregationStrategy::Avg => {
            let m = mean();
            let c = argmax(&m);
            decide(c, m[c], node_id)
        }
        AggregationStrategy::Max => {
            let (c, v) = strongest(pool).expect("pool is non-empty");
            decide(c, v, node_id)
        }
        AggregationStrategy::Any => {
            let voting: Vec<&TokenPrediction<T>> = pool.iter().copied().filter(|t| argmax(&t.probs) != 0).collect();
            match strongest(&voting) {
                Some((c, v)) => decide(c, v, node_id),
                None => decide(0, mean()[0], node_id),
            }
        }
    })
}

/// Node labels for one page, ordered by node id. Overlapping window
/// predictions are resolved first; within a node tokens are taken in offset
/// order, so AVG, MAX and ANY ignore input order.
pub fn aggregate<T: Scalar>(
    preds: &[TokenPrediction<T>],
    strategy: AggregationStrategy,
) -> Result<Vec<NodePrediction<T>>, AggregateError> {
    let resolved = resolve_overlaps(preds);
    let mut by_node: BTreeMap<NodeId, Vec<&TokenPrediction<T>>> = BTreeMap::new();
    for p in &resolved {
        by_node.entry(p.node_id).or_default().push(p);
    }
    by_node
        .into_iter()
        .map(|(id, mut tokens)| {
            tokens.sort_by_key(|t| t.offset);
            aggregate_node(id, &tokens, strategy)
        })
        .collect()
}

/// Confident node predictions from a hard per-node labeling.
pub fn from_labels<T: Scalar>(labels: &[Option<AttributeKind>]) -> Vec<NodePrediction<T>> {
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| NodePrediction {
            node_id: NodeId(i),
            label: *l,
            confidence: T::one(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ChunkPos;
    use num_rational::Ratio;

    type R = Ratio<i64>;

    fn r(n: i64, d: i64) -> R {
        Ratio::new(n, d)
    }

    /// Two-class distribution over (None, Title).
    fn tok(offset: usize, none: R, title: R) -> TokenPrediction<R> {
        let mut probs = [R::from_integer(0); NUM_CLASSES];
        probs[0] = none;
        probs[1] = title;
        TokenPrediction {
            page_id: "p".into(),
            node_id: NodeId(1),
            offset,
            role: TokenRole::Content,
            probs,
            chunk: None,
        }
    }

    fn run(tokens: &[TokenPrediction<R>], s: AggregationStrategy) -> (Option<AttributeKind>, R) {
        let out = aggregate(tokens, s).unwrap();
        assert_eq!(out.len(), 1);
        (out[0].label, out[0].confidence)
    }

    #[test]
    fn average_of_two() {
        let t = [tok(0, r(6, 10), r(4, 10)), tok(1, r(2, 10), r(8, 10))];
        assert_eq!(run(&t, AggregationStrategy::Avg), (Some(AttributeKind::Title), r(6, 10)));
    }

    #[test]
    fn max_versus_any() {
        let t = [tok(0, r(9, 10), r(1, 10)), tok(1, r(3, 10), r(7, 10))];
        assert_eq!(run(&t, AggregationStrategy::Max), (None, r(9, 10)));
        assert_eq!(run(&t, AggregationStrategy::Any), (Some(AttributeKind::Title), r(7, 10)));
        assert_eq!(run(&t, AggregationStrategy::First), (None, r(9, 10)));
    }

    #[test]
    fn any_without_votes_reports_mean_none() {
        let t = [tok(0, r(9, 10), r(1, 10)), tok(1, r(6, 10), r(4, 10))];
        assert_eq!(run(&t, AggregationStrategy::Any), (None, r(3, 4)));
    }

    #[test]
    fn unanimous_tokens_agree_everywhere() {
        let mut t = vec![tok(0, r(1, 3), r(2, 3)), tok(1, r(1, 3), r(2, 3)), tok(2, r(1, 3), r(2, 3))];
        t[0].role = TokenRole::Bos;
        for s in AggregationStrategy::ALL {
            assert_eq!(run(&t, s), (Some(AttributeKind::Title), r(2, 3)), "{s}");
        }
    }

    #[test]
    fn bos_errors() {
        let t = [tok(0, r(1, 2), r(1, 2))];
        assert_eq!(aggregate(&t, AggregationStrategy::Bos), Err(AggregateError::MissingBOS(NodeId(1))));
        let mut b = tok(0, r(1, 2), r(1, 2));
        b.role = TokenRole::Bos;
        assert_eq!(aggregate(&[b], AggregationStrategy::First), Err(AggregateError::EmptyNode(NodeId(1))));
    }

    #[test]
    fn overlap_keeps_the_interior_copy() {
        let mut edge = tok(5, r(1, 1), r(0, 1));
        edge.chunk = Some(ChunkPos { start: 0, index: 5, len: 6 });
        let mut inner = tok(5, r(0, 1), r(1, 1));
        inner.chunk = Some(ChunkPos { start: 3, index: 2, len: 6 });
        assert_eq!(run(&[edge.clone(), inner.clone()], AggregationStrategy::Avg).0, Some(AttributeKind::Title));
        assert_eq!(run(&[inner.clone(), edge.clone()], AggregationStrategy::Avg).0, Some(AttributeKind::Title));
        let mut tie = inner.clone();
        tie.chunk = Some(ChunkPos { start: 1, index: 2, len: 6 });
        tie.probs = edge.probs;
        assert_eq!(resolve_overlaps(&[inner, tie.clone()]), vec![tie]);
    }

    #[test]
    fn strategy_names() {
        assert_eq!(serde_json::to_string(&AggregationStrategy::Bos).unwrap(), "\"BOS\"");
        assert_eq!("any".parse::<AggregationStrategy>().unwrap(), AggregationStrategy::Any);
    }
}
