//! Cleaned DOM trees.
//!
//! HTML is parsed with an error-recovering HTML5 parser and then copied into
//! a compact arena where node ids follow pre-order. Script-like elements,
//! comments, processing instructions and the doctype are dropped, and all
//! text is whitespace-normalized.

mod css;
mod text;
mod xpath;

use std::fmt;

use ego_tree::NodeRef;
use scraper::{Html, Node};
use serde::{Deserialize, Serialize};

pub use css::{select_css, Selector, SelectorGroup};
pub use text::{is_cjk, join_runs, normalize_text, normalize_value};
pub use xpath::{resolve_xpath, xpath_of, XPathExpr, XPathStep};

/// Elements removed during cleaning together with their whole subtree.
pub const REMOVED_TAGS: &[&str] = &[
    "script", "style", "noscript", "template", "iframe", "svg", "canvas",
];

/// Dense pre-order node index. The root is always `NodeId(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Ordered content of an element: its own text runs interleaved with child
/// elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Segment {
    Text(String),
    Child(NodeId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomNode {
    pub node_id: NodeId,
    pub tag: String,
    pub attributes: Vec<(String, String)>,
    /// Normalized text owned directly by this element.
    pub text: String,
    pub parent_id: Option<NodeId>,
    pub depth: usize,
    /// 1-based position among siblings with the same tag.
    pub sibling_index: usize,
    pub child_ids: Vec<NodeId>,
    pub segments: Vec<Segment>,
}

impl DomNode {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.attr("class")
            .map(|c| c.split_ascii_whitespace().any(|c| c == class))
            .unwrap_or(false)
    }

    pub fn has_text(&self) -> bool {
        !self.text.is_empty()
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DomError {
    #[error("document has no content after cleaning")]
    EmptyDocument,
    #[error("node id {0} is out of range")]
    InvalidNode(NodeId),
    #[error("xpath {0} matches no node")]
    NoMatch(String),
    #[error("xpath {0} matches more than one node")]
    Ambiguous(String),
    #[error("malformed xpath {expr:?}: {reason}")]
    XPathSyntax { expr: String, reason: String },
    #[error("unsupported selector {selector:?} at byte {position}: {reason}")]
    SelectorSyntax {
        selector: String,
        position: usize,
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomTree {
    pub nodes: Vec<DomNode>,
    pub source_url: String,
    pub language: String,
}

/// One row of the flat JSON tree dump: `{id, tag, parent, text, attrs}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub tag: String,
    pub parent: Option<usize>,
    pub text: String,
    pub attrs: Vec<(String, String)>,
}

impl DomTree {
    /// Builds a tree from explicit nodes, recomputing depth, sibling index
    /// and child lists from `parent_id`. Nodes must be in pre-order.
    pub fn from_parts(
        specs: Vec<(String, Vec<(String, String)>, String, Option<NodeId>)>,
        source_url: &str,
        language: &str,
    ) -> Result<DomTree, DomError> {
        if specs.is_empty() {
            return Err(DomError::EmptyDocument);
        }
        let mut nodes: Vec<DomNode> = Vec::with_capacity(specs.len());
        for (i, (tag, attributes, text, parent_id)) in specs.into_iter().enumerate() {
            let id = NodeId(i);
            let depth = match parent_id {
                None if i == 0 => 0,
                Some(p) if p.0 < i => nodes[p.0].depth + 1,
                _ => return Err(DomError::InvalidNode(id)),
            };
            let text = normalize_text(&text);
            let mut segments = Vec::new();
            if !text.is_empty() {
                segments.push(Segment::Text(text.clone()));
            }
            let sibling_index = match parent_id {
                Some(p) => {
                    let same = nodes[p.0]
                        .child_ids
                        .iter()
                        .filter(|c| nodes[c.0].tag.eq_ignore_ascii_case(&tag))
                        .count();
                    nodes[p.0].child_ids.push(id);
                    nodes[p.0].segments.push(Segment::Child(id));
                    same + 1
                }
                None => 1,
            };
            nodes.push(DomNode {
                node_id: id,
                tag: tag.to_ascii_lowercase(),
                attributes,
                text,
                parent_id,
                depth,
                sibling_index,
                child_ids: Vec::new(),
                segments,
            });
        }
        Ok(DomTree {
            nodes,
            source_url: source_url.to_string(),
            language: language.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> &DomNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &DomNode {
        &self.nodes[id.0]
    }

    pub fn get(&self, id: NodeId) -> Option<&DomNode> {
        self.nodes.get(id.0)
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    /// One past the last pre-order id inside the subtree rooted at `id`.
    pub fn subtree_end(&self, id: NodeId) -> usize {
        let mut cur = id;
        while let Some(&last) = self.node(cur).child_ids.last() {
            cur = last;
        }
        cur.0 + 1
    }

    pub fn is_ancestor(&self, ancestor: NodeId, node: NodeId) -> bool {
        ancestor.0 < node.0 && node.0 < self.subtree_end(ancestor)
    }

    /// Ancestors of `id` ordered from the root downwards, excluding `id`.
    pub fn ancestors(&self, id: NodeId) -> Vec<NodeId> {
        let mut chain = Vec::new();
        let mut cur = self.node(id).parent_id;
        while let Some(p) = cur {
            chain.push(p);
            cur = self.node(p).parent_id;
        }
        chain.reverse();
        chain
    }

    /// Text of the whole subtree in document order, normalized.
    pub fn subtree_text(&self, id: NodeId) -> String {
        let mut parts: Vec<&str> = Vec::new();
        let mut stack: Vec<&Segment> = self.node(id).segments.iter().rev().collect();
        while let Some(seg) = stack.pop() {
            match seg {
                Segment::Text(t) => parts.push(t),
                Segment::Child(c) => stack.extend(self.node(*c).segments.iter().rev()),
            }
        }
        join_runs(parts)
    }

    /// Text reported for a node as an attribute value. Nodes without own
    /// text read a `content`/`datetime` attribute first.
    pub fn value_text(&self, id: NodeId) -> String {
        let node = self.node(id);
        if node.has_text() {
            return self.subtree_text(id);
        }
        for attr in ["content", "datetime"] {
            if let Some(v) = node.attr(attr) {
                let v = normalize_text(v);
                if !v.is_empty() {
                    return v;
                }
            }
        }
        self.subtree_text(id)
    }

    pub fn to_records(&self) -> Vec<NodeRecord> {
        self.nodes
            .iter()
            .map(|n| NodeRecord {
                id: n.node_id.0,
                tag: n.tag.clone(),
                parent: n.parent_id.map(|p| p.0),
                text: n.text.clone(),
                attrs: n.attributes.clone(),
            })
            .collect()
    }

    /// Re-serializes the cleaned tree as HTML.
    pub fn to_html(&self) -> String {
        let mut out = String::new();
        self.write_html(NodeId::ROOT, &mut out);
        out
    }

    fn write_html(&self, id: NodeId, out: &mut String) {
        let node = self.node(id);
        out.push('<');
        out.push_str(&node.tag);
        for (k, v) in &node.attributes {
            out.push(' ');
            out.push_str(k);
            out.push_str("=\"");
            escape_into(v, true, out);
            out.push('"');
        }
        out.push('>');
        if is_void(&node.tag) {
            return;
        }
        for seg in &node.segments {
            match seg {
                Segment::Text(t) => {
                    out.push(' ');
                    escape_into(t, false, out);
                    out.push(' ');
                }
                Segment::Child(c) => self.write_html(*c, out),
            }
        }
        out.push_str("</");
        out.push_str(&node.tag);
        out.push('>');
    }

    /// Replaces the text of every node through `f`, keeping structure.
    pub fn map_texts<F>(&self, mut f: F) -> DomTree
    where
        F: FnMut(NodeId, &str) -> String,
    {
        let mut out = self.clone();
        for node in &mut out.nodes {
            if node.text.is_empty() {
                continue;
            }
            let new_text = normalize_text(&f(node.node_id, &node.text));
            if new_text == node.text {
                continue;
            }
            let mut placed = false;
            let mut segments = Vec::with_capacity(node.segments.len());
            for seg in node.segments.drain(..) {
                match seg {
                    Segment::Text(_) if !placed => {
                        placed = true;
                        if !new_text.is_empty() {
                            segments.push(Segment::Text(new_text.clone()));
                        }
                    }
                    Segment::Text(_) => {}
                    child => segments.push(child),
                }
            }
            node.segments = segments;
            node.text = new_text;
        }
        out
    }
}

fn escape_into(s: &str, attr: bool, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attr => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
}

fn is_void(tag: &str) -> bool {
    matches!(
        tag,
        "area" | "base" | "col" | "embed" | "hr" | "img" | "input" | "link" | "meta" | "source"
            | "track" | "wbr"
    )
}

fn is_removed(tag: &str) -> bool {
    REMOVED_TAGS.contains(&tag)
}

/// Parses HTML with error recovery and returns the cleaned tree.
pub fn parse_and_clean(html: &[u8], url: &str, language: &str) -> Result<DomTree, DomError> {
    let source = String::from_utf8_lossy(html);
    if source.trim().is_empty() {
        return Err(DomError::EmptyDocument);
    }
    let doc = Html::parse_document(&source);
    let root = doc
        .tree
        .root()
        .children()
        .find(|c| c.value().is_element())
        .ok_or(DomError::EmptyDocument)?;

    let mut nodes: Vec<DomNode> = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    // Explicit stack: (scraper node, parent id in our arena).
    let mut stack: Vec<(NodeRef<'_, Node>, Option<NodeId>)> = vec![(root, None)];
    while let Some((elem, parent_id)) = stack.pop() {
        let el = match elem.value() {
            Node::Element(el) => el,
            _ => continue,
        };
        let tag = el.name().to_ascii_lowercase();
        let id = NodeId(nodes.len());
        let (depth, sibling_index) = match parent_id {
            Some(p) => {
                let parent = &nodes[p.0];
                let same = parent
                    .child_ids
                    .iter()
                    .filter(|c| nodes[c.0].tag == tag)
                    .count();
                (parent.depth + 1, same + 1)
            }
            None => (0, 1),
        };
        if let Some(p) = parent_id {
            nodes[p.0].child_ids.push(id);
            nodes[p.0].segments.push(Segment::Child(id));
        }
        let attributes = el
            .attrs()
            .map(|(k, v)| (k.to_ascii_lowercase(), v.to_string()))
            .collect();

        let mut segments = Vec::new();
        let mut children = Vec::new();
        for child in elem.children() {
            match child.value() {
                Node::Text(t) => pending.push(t.to_string()),
                Node::Element(c) => {
                    let ctag = c.name().to_ascii_lowercase();
                    if is_removed(&ctag) || (ctag == "head" && !keeps_head(child)) {
                        continue;
                    }
                    if ctag == "br" {
                        pending.push(" ".to_string());
                        continue;
                    }
                    flush_text(&mut pending, &mut segments);
                    // Child ids are assigned when the child is popped; the
                    // placeholder keeps its position among the text runs.
                    segments.push(Segment::Child(NodeId(usize::MAX)));
                    children.push(child);
                }
                _ => {}
            }
        }
        flush_text(&mut pending, &mut segments);
        let text = segments
            .iter()
            .filter_map(|s| match s {
                Segment::Text(t) => Some(t.as_str()),
                _ => None,
            })
            .collect::<Vec<_>>()
            .join(" ");
        nodes.push(DomNode {
            node_id: id,
            tag,
            attributes,
            text,
            parent_id,
            depth,
            sibling_index,
            child_ids: Vec::new(),
            segments,
        });
        for child in children.into_iter().rev() {
            stack.push((child, Some(id)));
        }
    }
    resolve_placeholders(&mut nodes);

    let tree = DomTree {
        nodes,
        source_url: url.to_string(),
        language: language.to_string(),
    };
    if tree.nodes.iter().all(|n| {
        matches!(n.tag.as_str(), "html" | "head" | "body")
            && n.text.is_empty()
            && n.attributes.is_empty()
    }) {
        return Err(DomError::EmptyDocument);
    }
    Ok(tree)
}

fn resolve_placeholders(nodes: &mut [DomNode]) {
    for node in nodes.iter_mut() {
        // Children were pushed as `Segment::Child(real id)` at the end of
        // `segments` while their placeholders sit at the right positions.
        let mut real: Vec<NodeId> = Vec::new();
        let mut kept = Vec::with_capacity(node.segments.len());
        for seg in node.segments.drain(..) {
            match seg {
                Segment::Child(NodeId(usize::MAX)) => kept.push(None),
                Segment::Child(id) => real.push(id),
                Segment::Text(t) => kept.push(Some(Segment::Text(t))),
            }
        }
        let mut real = real.into_iter();
        node.segments = kept
            .into_iter()
            .map(|s| s.unwrap_or_else(|| Segment::Child(real.next().expect("child per placeholder"))))
            .collect();
    }
}

fn flush_text(pending: &mut Vec<String>, segments: &mut Vec<Segment>) {
    if pending.is_empty() {
        return;
    }
    let joined = normalize_text(&pending.join(""));
    pending.clear();
    if !joined.is_empty() {
        segments.push(Segment::Text(joined));
    }
}

// An implied, empty <head> carries no information and is dropped.
fn keeps_head(head: NodeRef<'_, Node>) -> bool {
    head.children().any(|c| match c.value() {
        Node::Element(e) => !is_removed(&e.name().to_ascii_lowercase()),
        Node::Text(t) => !t.trim().is_empty(),
        _ => false,
    }) || matches!(head.value(), Node::Element(e) if e.attrs().next().is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(html: &str) -> DomTree {
        parse_and_clean(html.as_bytes(), "http://example.com/a", "en").unwrap()
    }

    #[test]
    fn removes_script_and_collapses_space() {
        let tree = parse("<html><body><p> Hello&nbsp;  world </p><script>x</script></body></html>");
        let tags: Vec<_> = tree.nodes.iter().map(|n| n.tag.as_str()).collect();
        assert_eq!(tags, ["html", "body", "p"]);
        assert_eq!(tree.nodes[2].text, "Hello world");
    }

    #[test]
    fn title_sits_at_depth_two() {
        let tree = parse("<html><head><title>T</title></head><body></body></html>");
        let title = tree.nodes.iter().find(|n| n.tag == "title").unwrap();
        assert_eq!(title.text, "T");
        assert_eq!(title.depth, 2);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(
            parse_and_clean(b"  \n", "u", "en").unwrap_err(),
            DomError::EmptyDocument
        );
        assert_eq!(
            parse_and_clean(b"<script>alert(1)</script><!-- c -->", "u", "en").unwrap_err(),
            DomError::EmptyDocument
        );
    }

    #[test]
    fn br_joins_with_whitespace() {
        let tree = parse("<p>one<br>two<br/>three</p>");
        let p = tree.nodes.iter().find(|n| n.tag == "p").unwrap();
        assert_eq!(p.text, "one two three");
        assert!(tree.nodes.iter().all(|n| n.tag != "br"));
    }

    #[test]
    fn subtree_text_keeps_document_order() {
        let tree = parse("<div><p>Hello <b>big</b> world</p></div>");
        let p = tree.nodes.iter().find(|n| n.tag == "p").unwrap();
        assert_eq!(p.text, "Hello world");
        assert_eq!(tree.subtree_text(p.node_id), "Hello big world");
    }

    #[test]
    fn comments_and_control_chars_vanish() {
        let tree = parse("<p>a\u{0007}b<!-- hidden -->\u{0085}c</p>");
        let p = tree.nodes.iter().find(|n| n.tag == "p").unwrap();
        assert_eq!(p.text, "ab c");
    }

    #[test]
    fn malformed_markup_recovers() {
        let tree = parse("<div><p>one<p>two</div><span>tail");
        let ps: Vec<_> = tree.nodes.iter().filter(|n| n.tag == "p").collect();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[1].sibling_index, 2);
        assert!(tree.nodes.iter().any(|n| n.tag == "span" && n.text == "tail"));
    }

    #[test]
    fn structure_invariants_hold() {
        let tree = parse(
            "<html><body><div><p>a</p><p>b</p><span>c</span></div><div><p>d</p></div></body></html>",
        );
        for n in &tree.nodes {
            if let Some(p) = n.parent_id {
                assert!(p < n.node_id);
                assert_eq!(tree.node(p).depth + 1, n.depth);
                assert!(tree.node(p).child_ids.contains(&n.node_id));
                let prev = tree
                    .node(p)
                    .child_ids
                    .iter()
                    .take_while(|c| **c != n.node_id)
                    .filter(|c| tree.node(**c).tag == n.tag)
                    .count();
                assert_eq!(n.sibling_index, prev + 1);
            }
        }
    }

    #[test]
    fn map_texts_preserves_structure() {
        let tree = parse("<div><p>Hello <b>big</b> world</p></div>");
        let out = tree.map_texts(|_, t| t.to_uppercase());
        assert_eq!(out.len(), tree.len());
        let p = out.nodes.iter().find(|n| n.tag == "p").unwrap();
        assert_eq!(p.text, "HELLO WORLD");
        assert_eq!(p.child_ids, tree.node(p.node_id).child_ids);
    }
}
