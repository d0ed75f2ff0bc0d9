use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeKind, MappedPage};
use crate::dom::NodeId;

use super::tuples::{node_tuples, NodeTuple};
use super::{ChunkingConfig, FeaturizeError, LabelingScheme, TagVocab, TokenRole, Tokenizer};

/// A window of a page's token stream. All per-token vectors have equal
/// length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub page_id: String,
    pub chunk_start: usize,
    pub labeling: LabelingScheme,
    pub token_ids: Vec<u32>,
    pub labels: Vec<i64>,
    pub roles: Vec<TokenRole>,
    pub node_ids: Vec<NodeId>,
    /// Absolute offset of each token in the page stream.
    pub offsets: Vec<usize>,
    /// Index of each token inside its node representation.
    pub positions: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xpath_tags: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xpath_subs: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depth: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub node_index: Vec<u32>,
    /// `-1` when the parent is outside the subtree.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parent_index: Vec<i64>,
}

impl Chunk {
    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }

    /// Whether the token at `i` receives a prediction.
    pub fn is_predicted(&self, i: usize) -> bool {
        match self.roles[i] {
            TokenRole::Content => true,
            TokenRole::Bos => self.labeling == LabelingScheme::BosOnly,
            TokenRole::Eos | TokenRole::Context => false,
        }
    }

    /// Checks that every per-token vector has the same length.
    pub fn is_consistent(&self) -> bool {
        let n = self.len();
        let optional = |len: usize| len == 0 || len == n;
        self.labels.len() == n
            && self.roles.len() == n
            && self.node_ids.len() == n
            && self.offsets.len() == n
            && self.positions.len() == n
            && optional(self.xpath_tags.len())
            && optional(self.xpath_subs.len())
            && optional(self.depth.len())
            && optional(self.node_index.len())
            && optional(self.parent_index.len())
    }
}

/// The whole-page token sequence that scheme A windows are cut from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PageStream {
    pub token_ids: Vec<u32>,
    pub labels: Vec<i64>,
    pub roles: Vec<TokenRole>,
    pub node_ids: Vec<NodeId>,
    pub positions: Vec<u32>,
    pub xpath_tags: Vec<Vec<u32>>,
    pub xpath_subs: Vec<Vec<u32>>,
}

impl PageStream {
    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }
}

pub(crate) fn label_for(role: TokenRole, label: Option<AttributeKind>, cfg: &ChunkingConfig) -> i64 {
    let id = label.map_or(0, |k| k.class_id() as i64);
    match (cfg.labeling_scheme, role) {
        (LabelingScheme::AllTokens, TokenRole::Content) => id,
        (LabelingScheme::BosOnly, TokenRole::Bos) => id,
        _ => cfg.ignore_index,
    }
}

/// Each tuple contributes `BOS, text tokens…, EOS` in order.
pub fn page_stream(tuples: &[NodeTuple], tokenizer: &dyn Tokenizer, vocab: &TagVocab, cfg: &ChunkingConfig) -> PageStream {
    let mut s = PageStream::default();
    for t in tuples {
        let (tags, subs) = vocab.encode_xpath(&t.xpath, cfg.max_depth);
        let body = tokenizer.encode(&t.text);
        for (pos, (id, role)) in std::iter::once((tokenizer.bos(), TokenRole::Bos))
            .chain(body.into_iter().map(|id| (id, TokenRole::Content)))
            .chain(std::iter::once((tokenizer.eos(), TokenRole::Eos)))
            .enumerate()
        {
            s.token_ids.push(id);
            s.labels.push(label_for(role, t.label, cfg));
            s.roles.push(role);
            s.node_ids.push(t.node_id);
            s.positions.push(pos as u32);
            s.xpath_tags.push(tags.clone());
            s.xpath_subs.push(subs.clone());
        }
    }
    s
}

/// Window starts `0, stride, 2·stride, …`, stopping at the first window
/// that reaches the end of the stream.
pub fn window_starts(len: usize, max_seq_length: usize, doc_stride: usize) -> Vec<usize> {
    let mut starts = Vec::new();
    if len == 0 || doc_stride == 0 {
        return starts;
    }
    let mut s = 0;
    loop {
        starts.push(s);
        if s + max_seq_length >= len {
            return starts;
        }
        s += doc_stride;
    }
}

/// Flattens `tuples` into one stream and cuts overlapping windows.
pub fn chunk(
    page_id: &str,
    tuples: &[NodeTuple],
    tokenizer: &dyn Tokenizer,
    vocab: &TagVocab,
    cfg: &ChunkingConfig,
) -> Result<Vec<Chunk>, FeaturizeError> {
    cfg.validate()?;
    let s = page_stream(tuples, tokenizer, vocab, cfg);
    if s.is_empty() {
        return Err(FeaturizeError::EmptyPage(page_id.to_string()));
    }
    Ok(window_starts(s.len(), cfg.max_seq_length, cfg.doc_stride)
        .into_iter()
        .map(|start| {
            let r = start..(start + cfg.max_seq_length).min(s.len());
            Chunk {
                page_id: page_id.to_string(),
                chunk_start: start,
                labeling: cfg.labeling_scheme,
                token_ids: s.token_ids[r.clone()].to_vec(),
                labels: s.labels[r.clone()].to_vec(),
                roles: s.roles[r.clone()].to_vec(),
                node_ids: s.node_ids[r.clone()].to_vec(),
                offsets: r.clone().collect(),
                positions: s.positions[r.clone()].to_vec(),
                xpath_tags: s.xpath_tags[r.clone()].to_vec(),
                xpath_subs: s.xpath_subs[r].to_vec(),
                depth: Vec::new(),
                node_index: Vec::new(),
                parent_index: Vec::new(),
            }
        })
        .collect())
}

/// Scheme A for a mapped page; `page_id` is the URL.
pub fn chunk_page(
    page: &MappedPage,
    tokenizer: &dyn Tokenizer,
    vocab: &TagVocab,
    cfg: &ChunkingConfig,
) -> Result<Vec<Chunk>, FeaturizeError> {
    let tuples = node_tuples(&page.tree, &page.record.annotations);
    chunk(page.page_id(), &tuples, tokenizer, vocab, cfg)
}
