use crate::dataset::{propagate_labels, AttributeKind};
use crate::dom::{normalize_value, DomTree, NodeId};
use crate::evaluate::dates::is_date_like;
use crate::scalar::Real;

use super::{one_hot, ChunkPos, ClassifyError, PageInput, TokenClassifier, TokenPrediction};

const TITLE_SEPARATORS: &[&str] = &[" | ", " - ", " \u{2013} ", " \u{2014} ", " :: ", " · "];
const BYLINE_MARKERS: &[&str] = &["author", "byline"];
const MAX_BYLINE_CHARS: usize = 100;

fn body_range(tree: &DomTree) -> (usize, usize) {
    match tree.nodes.iter().find(|n| n.tag == "body") {
        Some(b) => (b.node_id.0, tree.subtree_end(b.node_id)),
        None => (0, tree.len()),
    }
}

/// Meta nodes whose `property`/`name`/`itemprop` equals `key` and which
/// carry a non-empty `content`.
fn metas(tree: &DomTree, key: &str) -> Vec<NodeId> {
    tree.nodes
        .iter()
        .filter(|n| n.tag == "meta")
        .filter(|n| {
            ["property", "name", "itemprop"]
                .iter()
                .any(|a| n.attr(a).is_some_and(|v| v.trim().eq_ignore_ascii_case(key)))
        })
        .filter(|n| n.attr("content").is_some_and(|c| !c.trim().is_empty()))
        .map(|n| n.node_id)
        .collect()
}

/// First text-bearing body node whose text equals `value`, ignoring case.
fn locate(tree: &DomTree, value: &str) -> Option<NodeId> {
    let want = normalize_value(value);
    if want.is_empty() {
        return None;
    }
    let (lo, hi) = body_range(tree);
    (lo..hi)
        .map(NodeId)
        .find(|&id| tree.node(id).has_text() && normalize_value(&tree.subtree_text(id)) == want)
}

/// The visible node for `value`, trying the part before a site-name
/// separator as well.
fn locate_title(tree: &DomTree, value: &str) -> Option<NodeId> {
    locate(tree, value).or_else(|| {
        TITLE_SEPARATORS
            .iter()
            .filter_map(|sep| value.rfind(sep).map(|i| &value[..i]))
            .find_map(|head| locate(tree, head))
    })
}

fn meta_value(tree: &DomTree, id: NodeId) -> String {
    tree.node(id).attr("content").unwrap_or_default().to_string()
}

fn title_node(tree: &DomTree) -> Option<NodeId> {
    if let Some(&m) = metas(tree, "og:title").first() {
        return Some(locate_title(tree, &meta_value(tree, m)).unwrap_or(m));
    }
    if let Some(t) = tree.nodes.iter().find(|n| n.tag == "title" && n.has_text()) {
        return Some(locate_title(tree, &t.text).unwrap_or(t.node_id));
    }
    tree.nodes.iter().find(|n| n.tag == "h1" && n.has_text()).map(|n| n.node_id)
}

fn date_node(tree: &DomTree) -> Option<NodeId> {
    if let Some(t) = tree
        .nodes
        .iter()
        .find(|n| n.tag == "time" && n.attr("datetime").is_some_and(|d| !d.trim().is_empty()))
    {
        return Some(t.node_id);
    }
    for key in ["article:published_time", "datePublished"] {
        if let Some(&m) = metas(tree, key).first() {
            return Some(m);
        }
    }
    let (lo, hi) = body_range(tree);
    (lo..hi).map(NodeId).find(|&id| {
        let n = tree.node(id);
        n.has_text() && is_date_like(&n.text)
    })
}

fn is_byline(tree: &DomTree, id: NodeId) -> bool {
    let n = tree.node(id);
    let marked = ["class", "rel", "itemprop", "id"].iter().any(|a| {
        n.attr(a)
            .is_some_and(|v| BYLINE_MARKERS.iter().any(|m| v.to_ascii_lowercase().contains(m)))
    });
    marked && n.tag != "meta" && n.tag != "link"
}

fn author_nodes(tree: &DomTree) -> Vec<NodeId> {
    let from_meta = metas(tree, "author");
    if !from_meta.is_empty() {
        return from_meta
            .into_iter()
            .map(|m| locate(tree, &meta_value(tree, m)).unwrap_or(m))
            .collect();
    }
    let (lo, hi) = body_range(tree);
    let marked: Vec<NodeId> = (lo..hi).map(NodeId).filter(|&id| is_byline(tree, id)).collect();
    marked
        .iter()
        .copied()
        .filter(|&id| !marked.iter().any(|&d| tree.is_ancestor(id, d)))
        .filter(|&id| {
            let len = tree.subtree_text(id).chars().count();
            len > 0 && len <= MAX_BYLINE_CHARS
        })
        .collect()
}

fn tag_nodes(tree: &DomTree) -> Vec<NodeId> {
    let from_meta = metas(tree, "article:tag");
    if !from_meta.is_empty() {
        return from_meta
            .into_iter()
            .map(|m| locate(tree, &meta_value(tree, m)).unwrap_or(m))
            .collect();
    }
    tree.nodes
        .iter()
        .filter(|n| {
            n.tag == "a"
                && n.attr("rel").is_some_and(|r| r.split_whitespace().any(|t| t.eq_ignore_ascii_case("tag")))
                && !tree.subtree_text(n.node_id).is_empty()
        })
        .map(|n| n.node_id)
        .collect()
}

/// The contiguous sibling run of paragraphs and text-bearing divs with the
/// most text per node. Ties prefer more text, then the earlier run.
fn text_block(tree: &DomTree, taken: &[Option<AttributeKind>]) -> Vec<NodeId> {
    let qualifies = |id: NodeId| {
        let n = tree.node(id);
        taken[id.0].is_none()
            && match n.tag.as_str() {
                "p" => !tree.subtree_text(id).is_empty(),
                "div" => n.has_text(),
                _ => false,
            }
    };
    let mut best: Option<(f64, usize, Vec<NodeId>)> = None;
    let mut consider = |run: &mut Vec<NodeId>| {
        if run.is_empty() {
            return;
        }
        let chars: usize = run.iter().map(|&id| tree.subtree_text(id).chars().count()).sum();
        let density = chars as f64 / run.len() as f64;
        let better = match &best {
            None => true,
            Some((d, c, _)) => density > *d || (density == *d && chars > *c),
        };
        if better {
            best = Some((density, chars, run.clone()));
        }
        run.clear();
    };
    for node in &tree.nodes {
        let mut run = Vec::new();
        for &c in &node.child_ids {
            if qualifies(c) {
                run.push(c);
            } else {
                consider(&mut run);
            }
        }
        consider(&mut run);
    }
    best.map(|b| b.2).unwrap_or_default()
}

/// Rule cascade assigning at most one kind per node. Text-bearing nodes
/// inside a chosen node inherit its kind.
pub fn heuristic_extract(tree: &DomTree) -> Vec<Option<AttributeKind>> {
    let mut explicit: Vec<Option<AttributeKind>> = vec![None; tree.len()];
    let assign = |ids: &[NodeId], kind: AttributeKind, explicit: &mut Vec<Option<AttributeKind>>| {
        for id in ids {
            explicit[id.0].get_or_insert(kind);
        }
    };
    if let Some(t) = title_node(tree) {
        assign(&[t], AttributeKind::Title, &mut explicit);
    }
    if let Some(d) = date_node(tree) {
        assign(&[d], AttributeKind::Date, &mut explicit);
    }
    assign(&author_nodes(tree), AttributeKind::Author, &mut explicit);
    assign(&tag_nodes(tree), AttributeKind::Tag, &mut explicit);
    let block = text_block(tree, &explicit);
    assign(&block, AttributeKind::Text, &mut explicit);
    propagate_labels(tree, &explicit)
}

/// Hard 0/1 distributions from [`heuristic_extract`].
#[derive(Clone, Copy, Debug, Default)]
pub struct HeuristicClassifier;

impl<T: Real> TokenClassifier<T> for HeuristicClassifier {
    fn name(&self) -> String {
        "heuristic".into()
    }

    fn predict_page(&self, page: &PageInput<'_>) -> Result<Vec<TokenPrediction<T>>, ClassifyError> {
        let labels = heuristic_extract(page.tree);
        let mut out = Vec::new();
        for chunk in page.chunks {
            for i in (0..chunk.len()).filter(|&i| chunk.is_predicted(i)) {
                let node_id = chunk.node_ids[i];
                let class = labels.get(node_id.0).copied().flatten().map_or(0, |k| k.class_id());
                out.push(TokenPrediction {
                    page_id: page.page_id.to_string(),
                    node_id,
                    offset: chunk.offsets[i],
                    role: chunk.roles[i],
                    probs: one_hot(class),
                    chunk: Some(ChunkPos {
                        start: chunk.chunk_start,
                        index: i,
                        len: chunk.len(),
                    }),
                });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_and_clean;
    use crate::featurize::{chunk, node_tuples, ByteTokenizer, ChunkingConfig, LabelingScheme, TagVocab};

    fn tree(html: &str) -> DomTree {
        parse_and_clean(html.as_bytes(), "http://a.com/1", "en").unwrap()
    }

    fn nodes_of(t: &DomTree, labels: &[Option<AttributeKind>], kind: AttributeKind) -> Vec<String> {
        t.ids().filter(|id| labels[id.0] == Some(kind)).map(|id| t.node(id).tag.clone()).collect()
    }

    #[test]
    fn og_title_beats_h1() {
        let t = tree(r#"<head><meta property="og:title" content="A"></head><body><h1>B</h1></body>"#);
        let labels = heuristic_extract(&t);
        let ids: Vec<NodeId> = t.ids().filter(|id| labels[id.0] == Some(AttributeKind::Title)).collect();
        assert_eq!(ids.len(), 1);
        assert_eq!(t.node(ids[0]).tag, "meta");
        assert_eq!(t.value_text(ids[0]), "A");
    }

    #[test]
    fn title_equal_to_h1_labels_the_heading_tokens() {
        let t = tree("<head><title>Storm hits coast | Daily</title></head><body><h1>Storm hits coast</h1><p>x</p></body>");
        let cfg = ChunkingConfig { labeling_scheme: LabelingScheme::AllTokens, ..ChunkingConfig::default() };
        let chunks = chunk("u", &node_tuples(&t, &[]), &ByteTokenizer, &TagVocab::default(), &cfg).unwrap();
        let page = PageInput { page_id: "u", tree: &t, chunks: &chunks };
        let preds: Vec<TokenPrediction<f64>> = HeuristicClassifier.predict_page(&page).unwrap();
        let h1 = t.nodes.iter().find(|n| n.tag == "h1").unwrap().node_id;
        let h1_preds: Vec<_> = preds.iter().filter(|p| p.node_id == h1).collect();
        assert_eq!(h1_preds.len(), "Storm hits coast".len());
        assert!(h1_preds.iter().all(|p| p.probs[1] == 1.0));
    }

    #[test]
    fn time_datetime_is_the_date() {
        let t = tree(r#"<body><p>Posted 2021-01-01</p><time datetime="2022-03-05">March 5</time></body>"#);
        let labels = heuristic_extract(&t);
        assert_eq!(nodes_of(&t, &labels, AttributeKind::Date), ["time"]);
    }

    #[test]
    fn short_date_text_is_a_fallback() {
        let t = tree(r#"<body><span>05.03.2022</span><p>Long story text here.</p></body>"#);
        let labels = heuristic_extract(&t);
        assert_eq!(nodes_of(&t, &labels, AttributeKind::Date), ["span"]);
    }

    #[test]
    fn bylines_and_tags() {
        let t = tree(
            r#"<body><div class="byline"><span class="author-name">Jane Roe</span> <span>today</span></div>
            <a rel="tag" href="/t/x">Politics</a><a rel="tag" href="/t/y">Europe</a></body>"#,
        );
        let labels = heuristic_extract(&t);
        assert_eq!(nodes_of(&t, &labels, AttributeKind::Author), ["span"]);
        assert_eq!(nodes_of(&t, &labels, AttributeKind::Tag), ["a", "a"]);
    }

    #[test]
    fn densest_paragraph_run_is_text() {
        let long = "word ".repeat(40);
        let t = tree(&format!(
            "<body><div><p>short</p><p>tiny</p></div><article><p>{long}</p><p>{long}</p><p>{long}<a>link</a></p></article></body>"
        ));
        let labels = heuristic_extract(&t);
        let text = nodes_of(&t, &labels, AttributeKind::Text);
        assert_eq!(text, ["p", "p", "p", "a"]);
    }
}
