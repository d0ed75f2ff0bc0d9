use rayon::prelude::*;

use crate::dom::{normalize_text, parse_and_clean, select_css, xpath_of, DomError, DomTree, NodeId};

use super::{AttributeAnnotation, AttributeKind, PageRecord};

/// A record whose annotations have been placed on its parsed tree.
#[derive(Clone, Debug)]
pub struct MappedPage {
    pub record: PageRecord,
    pub tree: DomTree,
}

impl MappedPage {
    pub fn page_id(&self) -> &str {
        &self.record.url
    }

    pub fn labels(&self) -> Vec<Option<AttributeKind>> {
        node_labels(&self.tree, &self.record.annotations)
    }
}

/// Places ground-truth values on nodes: the selector first, then exact
/// normalized subtree-text equality with the smallest node id winning.
pub fn map_annotations(record: &PageRecord, tree: &DomTree) -> PageRecord {
    let mut texts: Option<Vec<String>> = None;
    let mut out = record.clone();
    for ann in &mut out.annotations {
        map_one(ann, tree, &mut texts);
    }
    out
}

fn map_one(ann: &mut AttributeAnnotation, tree: &DomTree, texts: &mut Option<Vec<String>>) {
    ann.unmapped.clear();
    let from_selector = ann
        .selector
        .as_ref()
        .and_then(|s| select_css(tree, &s.css).ok())
        .unwrap_or_default();
    let ids = if !from_selector.is_empty() {
        from_selector
    } else {
        let texts = texts.get_or_insert_with(|| tree.ids().map(|id| tree.subtree_text(id)).collect());
        let mut ids = Vec::new();
        for value in &ann.values {
            let wanted = normalize_text(value);
            match texts.iter().position(|t| !wanted.is_empty() && *t == wanted) {
                Some(i) => ids.push(NodeId(i)),
                None => ann.unmapped.push(value.clone()),
            }
        }
        ids.sort();
        ids.dedup();
        ids
    };
    ann.xpaths = ids.iter().map(|id| xpath_of(tree, *id)).collect();
    ann.node_ids = Some(ids);
}

/// Node-level class assignment. Annotated nodes take their kind; text
/// bearing nodes inside an annotated subtree inherit the nearest one. When
/// two kinds claim the same node the lower class id wins.
pub fn node_labels(tree: &DomTree, annotations: &[AttributeAnnotation]) -> Vec<Option<AttributeKind>> {
    let mut explicit: Vec<Option<AttributeKind>> = vec![None; tree.len()];
    for ann in annotations {
        for id in ann.mapped_nodes() {
            if let Some(slot) = explicit.get_mut(id.0) {
                *slot = Some(match *slot {
                    Some(k) if k.class_id() < ann.kind.class_id() => k,
                    _ => ann.kind,
                });
            }
        }
    }
    propagate_labels(tree, &explicit)
}

/// Text-bearing nodes without a label of their own take the nearest
/// labeled ancestor's kind.
pub fn propagate_labels(tree: &DomTree, explicit: &[Option<AttributeKind>]) -> Vec<Option<AttributeKind>> {
    let mut inherited: Vec<Option<AttributeKind>> = vec![None; tree.len()];
    let mut out = vec![None; tree.len()];
    for node in &tree.nodes {
        let i = node.node_id.0;
        let from_parent = node.parent_id.and_then(|p| inherited[p.0]);
        inherited[i] = explicit[i].or(from_parent);
        out[i] = explicit[i].or(if node.has_text() { inherited[i] } else { None });
    }
    out
}

/// Parses and maps every record in parallel; output order follows input.
pub fn prepare_pages(records: &[PageRecord]) -> Vec<Result<MappedPage, DomError>> {
    records
        .par_iter()
        .map(|rec| {
            let tree = parse_and_clean(&rec.html, &rec.url, &rec.language)?;
            let record = map_annotations(rec, &tree);
            Ok(MappedPage { record, tree })
        })
        .collect()
}
