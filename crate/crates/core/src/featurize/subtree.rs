use serde::{Deserialize, Serialize};

use crate::dataset::AttributeKind;
use crate::dom::{DomNode, DomTree, NodeId};

use super::chunk::label_for;
use super::{Chunk, ChunkingConfig, FeaturizeError, TokenRole, Tokenizer};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtreeNode {
    pub node_id: NodeId,
    /// Ancestor context: tag-only representation, never labeled.
    pub context: bool,
    pub tokens: Vec<u32>,
    /// Page-level offset of the first token.
    pub offset: usize,
    pub depth: u32,
    /// Position of this node within the subtree.
    pub index: u32,
    pub parent_index: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subtree {
    pub page_id: String,
    pub nodes: Vec<SubtreeNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SubtreeWarning {
    /// A representation longer than the limit was truncated.
    NodeTooLarge { node_id: NodeId, original: usize, kept: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtreeBatch {
    pub page_id: String,
    pub subtrees: Vec<Subtree>,
    pub warnings: Vec<SubtreeWarning>,
}

struct RepParts {
    tag: Vec<u32>,
    attrs: Vec<u32>,
    text: Vec<u32>,
}

impl RepParts {
    fn of(node: &DomNode, tokenizer: &dyn Tokenizer) -> Self {
        RepParts {
            tag: tokenizer.encode(&node.tag),
            attrs: node
                .attributes
                .iter()
                .flat_map(|(k, v)| tokenizer.encode(&format!("{k}={v}")))
                .collect(),
            text: tokenizer.encode(&node.text),
        }
    }

    fn len(&self) -> usize {
        self.tag.len() + self.attrs.len() + self.text.len() + 2
    }

    /// Cuts text, then attributes, then the tag until `len() <= limit`.
    fn fit(&mut self, limit: usize) {
        let mut excess = self.len().saturating_sub(limit);
        for part in [&mut self.text, &mut self.attrs, &mut self.tag] {
            let cut = excess.min(part.len());
            part.truncate(part.len() - cut);
            excess -= cut;
        }
    }

    fn tokens(self, tokenizer: &dyn Tokenizer) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.len());
        out.push(tokenizer.bos());
        out.extend(self.tag);
        out.extend(self.attrs);
        out.extend(self.text);
        out.push(tokenizer.eos());
        out
    }
}

/// `BOS ⊕ tag ⊕ "k=v"… ⊕ text ⊕ EOS`.
pub fn node_representation(node: &DomNode, tokenizer: &dyn Tokenizer) -> Vec<u32> {
    RepParts::of(node, tokenizer).tokens(tokenizer)
}

fn tag_only(node: &DomNode, tokenizer: &dyn Tokenizer) -> Vec<u32> {
    let mut out = vec![tokenizer.bos()];
    out.extend(tokenizer.encode(&node.tag));
    out.push(tokenizer.eos());
    out
}

/// Greedy pre-order packing under `cfg.max_seq_length`. Each subtree is
/// prefixed by the ancestor chain of its first packed node, trimmed from the
/// root side to at most half the limit.
pub fn split_subtrees(
    page_id: &str,
    tree: &DomTree,
    tokenizer: &dyn Tokenizer,
    cfg: &ChunkingConfig,
) -> Result<SubtreeBatch, FeaturizeError> {
    cfg.validate()?;
    if tree.is_empty() {
        return Err(FeaturizeError::EmptyPage(page_id.to_string()));
    }
    let limit = cfg.max_seq_length;
    let mut warnings = Vec::new();
    let mut reps = Vec::with_capacity(tree.len());
    let mut offsets = Vec::with_capacity(tree.len());
    let mut next = 0;
    for node in &tree.nodes {
        let mut parts = RepParts::of(node, tokenizer);
        let original = parts.len();
        if original > limit {
            parts.fit(limit);
            warnings.push(SubtreeWarning::NodeTooLarge {
                node_id: node.node_id,
                original,
                kept: parts.len(),
            });
        }
        let tokens = parts.tokens(tokenizer);
        offsets.push(next);
        next += tokens.len();
        reps.push(tokens);
    }

    let mut subtrees: Vec<Vec<(NodeId, bool, Vec<u32>, usize)>> = Vec::new();
    let mut current: Vec<(NodeId, bool, Vec<u32>, usize)> = Vec::new();
    let mut used = 0;
    for node in &tree.nodes {
        let i = node.node_id.0;
        let rep_len = reps[i].len();
        if !current.is_empty() && used + rep_len <= limit {
            current.push((node.node_id, false, reps[i].clone(), offsets[i]));
            used += rep_len;
            continue;
        }
        if !current.is_empty() {
            subtrees.push(std::mem::take(&mut current));
        }
        let mut context: Vec<(NodeId, Vec<u32>)> = tree
            .ancestors(node.node_id)
            .into_iter()
            .map(|a| (a, tag_only(tree.node(a), tokenizer)))
            .collect();
        let mut ctx_len: usize = context.iter().map(|(_, t)| t.len()).sum();
        let mut drop = 0;
        while drop < context.len() && (ctx_len > limit / 2 || ctx_len + rep_len > limit) {
            ctx_len -= context[drop].1.len();
            drop += 1;
        }
        context.drain(..drop);
        current.extend(context.into_iter().map(|(a, t)| (a, true, t, offsets[a.0])));
        current.push((node.node_id, false, reps[i].clone(), offsets[i]));
        used = ctx_len + rep_len;
    }
    if !current.is_empty() {
        subtrees.push(current);
    }

    let subtrees = subtrees
        .into_iter()
        .map(|members| {
            let position: std::collections::HashMap<NodeId, u32> =
                members.iter().enumerate().map(|(k, m)| (m.0, k as u32)).collect();
            let nodes = members
                .into_iter()
                .enumerate()
                .map(|(k, (node_id, context, tokens, offset))| {
                    let n = tree.node(node_id);
                    SubtreeNode {
                        node_id,
                        context,
                        tokens,
                        offset,
                        depth: n.depth as u32,
                        index: k as u32,
                        parent_index: n.parent_id.and_then(|p| position.get(&p).copied()),
                    }
                })
                .collect();
            Subtree {
                page_id: page_id.to_string(),
                nodes,
            }
        })
        .collect();
    Ok(SubtreeBatch {
        page_id: page_id.to_string(),
        subtrees,
        warnings,
    })
}

impl Subtree {
    pub fn token_len(&self) -> usize {
        self.nodes.iter().map(|n| n.tokens.len()).sum()
    }

    pub fn labelable(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|n| !n.context).map(|n| n.node_id)
    }

    /// Flat token view; `labels` is indexed by node id.
    pub fn to_chunk(&self, labels: &[Option<AttributeKind>], cfg: &ChunkingConfig) -> Chunk {
        let mut c = Chunk {
            page_id: self.page_id.clone(),
            chunk_start: self
                .nodes
                .iter()
                .find(|n| !n.context)
                .map_or(0, |n| n.offset),
            labeling: cfg.labeling_scheme,
            token_ids: Vec::new(),
            labels: Vec::new(),
            roles: Vec::new(),
            node_ids: Vec::new(),
            offsets: Vec::new(),
            positions: Vec::new(),
            xpath_tags: Vec::new(),
            xpath_subs: Vec::new(),
            depth: Vec::new(),
            node_index: Vec::new(),
            parent_index: Vec::new(),
        };
        for n in &self.nodes {
            let label = labels.get(n.node_id.0).copied().flatten();
            let last = n.tokens.len() - 1;
            for (pos, &tok) in n.tokens.iter().enumerate() {
                let role = if n.context {
                    TokenRole::Context
                } else if pos == 0 {
                    TokenRole::Bos
                } else if pos == last {
                    TokenRole::Eos
                } else {
                    TokenRole::Content
                };
                c.token_ids.push(tok);
                c.labels.push(label_for(role, label, cfg));
                c.roles.push(role);
                c.node_ids.push(n.node_id);
                c.offsets.push(n.offset + pos);
                c.positions.push(pos as u32);
                c.depth.push(n.depth);
                c.node_index.push(n.index);
                c.parent_index.push(n.parent_index.map_or(-1, i64::from));
            }
        }
        c
    }
}

impl SubtreeBatch {
    pub fn to_chunks(&self, labels: &[Option<AttributeKind>], cfg: &ChunkingConfig) -> Vec<Chunk> {
        self.subtrees.iter().map(|s| s.to_chunk(labels, cfg)).collect()
    }
}
