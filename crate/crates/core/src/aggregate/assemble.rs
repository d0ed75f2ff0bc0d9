use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dataset::AttributeKind;
use crate::dom::{join_runs, normalize_text, normalize_value, DomTree, NodeId, Segment};
use crate::scalar::Scalar;

use super::NodePrediction;

/// The structured output for one page.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Article {
    pub url: String,
    pub title: Option<String>,
    pub date: Option<String>,
    pub text: Option<String>,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl Article {
    /// Values of an attribute as a list; single-valued attributes yield at
    /// most one entry.
    pub fn values(&self, kind: AttributeKind) -> Vec<String> {
        match kind {
            AttributeKind::Title => self.title.iter().cloned().collect(),
            AttributeKind::Date => self.date.iter().cloned().collect(),
            AttributeKind::Text => self.text.iter().cloned().collect(),
            AttributeKind::Author => self.authors.clone(),
            AttributeKind::Tag => self.tags.clone(),
        }
    }
}

/// Text of `root` composed from the text runs of its labeled descendants
/// (including itself), in document order.
pub fn labeled_text(tree: &DomTree, root: NodeId, is_labeled: &dyn Fn(NodeId) -> bool) -> String {
    let mut parts: Vec<&str> = Vec::new();
    let mut stack: Vec<(NodeId, &Segment)> = tree.node(root).segments.iter().rev().map(|s| (root, s)).collect();
    while let Some((owner, seg)) = stack.pop() {
        match seg {
            Segment::Text(t) if is_labeled(owner) => parts.push(t),
            Segment::Text(_) => {}
            Segment::Child(c) => stack.extend(tree.node(*c).segments.iter().rev().map(|s| (*c, s))),
        }
    }
    join_runs(parts)
}

fn date_value(tree: &DomTree, id: NodeId) -> String {
    match tree.node(id).attr("datetime").map(normalize_text) {
        Some(d) if !d.is_empty() => d,
        _ => tree.value_text(id),
    }
}

/// Builds the article from node labels. Only the outermost node of each
/// labeled region counts; single-valued attributes take the most confident
/// such node, ties to the smallest id.
pub fn page_assemble<T: Scalar>(node_preds: &[NodePrediction<T>], tree: &DomTree, url: &str) -> Article {
    let mut label: Vec<Option<(AttributeKind, T)>> = vec![None; tree.len()];
    for p in node_preds {
        if let (Some(k), Some(slot)) = (p.label, label.get_mut(p.node_id.0)) {
            *slot = Some((k, p.confidence));
        }
    }
    let kind_of = |id: NodeId| label[id.0].map(|(k, _)| k);
    let outermost = |kind: AttributeKind| -> Vec<NodeId> {
        tree.ids()
            .filter(|&id| kind_of(id) == Some(kind))
            .filter(|&id| !tree.ancestors(id).into_iter().any(|a| kind_of(a) == Some(kind)))
            .collect()
    };
    let best = |kind: AttributeKind| -> Option<NodeId> {
        let mut best: Option<(NodeId, T)> = None;
        for id in outermost(kind) {
            let c = label[id.0].expect("labeled").1;
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((id, c));
            }
        }
        best.map(|b| b.0)
    };
    let non_empty = |s: String| (!s.is_empty()).then_some(s);
    let listed = |kind: AttributeKind| -> Vec<String> {
        let mut seen = HashSet::new();
        outermost(kind)
            .into_iter()
            .map(|id| tree.value_text(id))
            .filter(|v| !v.is_empty() && seen.insert(normalize_value(v)))
            .collect()
    };
    let texts: Vec<String> = outermost(AttributeKind::Text)
        .into_iter()
        .map(|id| {
            let own = labeled_text(tree, id, &|n| kind_of(n) == Some(AttributeKind::Text));
            if own.is_empty() {
                tree.value_text(id)
            } else {
                own
            }
        })
        .filter(|t| !t.is_empty())
        .collect();
    Article {
        url: url.to_string(),
        title: best(AttributeKind::Title).and_then(|id| non_empty(tree.value_text(id))),
        date: best(AttributeKind::Date).and_then(|id| non_empty(date_value(tree, id))),
        text: non_empty(texts.join("\n")),
        authors: listed(AttributeKind::Author),
        tags: listed(AttributeKind::Tag),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_and_clean;

    fn pred(id: usize, kind: Option<AttributeKind>, c: f64) -> NodePrediction<f64> {
        NodePrediction {
            node_id: NodeId(id),
            label: kind,
            confidence: c,
        }
    }

    fn id_of(tree: &DomTree, tag: &str, nth: usize) -> usize {
        tree.nodes.iter().filter(|n| n.tag == tag).nth(nth).unwrap().node_id.0
    }

    #[test]
    fn single_title() {
        let t = parse_and_clean(b"<body><h1>A</h1></body>", "u", "en").unwrap();
        let a = page_assemble(&[pred(id_of(&t, "h1", 0), Some(AttributeKind::Title), 1.0)], &t, "u");
        assert_eq!(a.title.as_deref(), Some("A"));
        assert_eq!(a.date, None);
        assert!(a.authors.is_empty());
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"url":"u","title":"A","date":null,"text":null,"authors":[],"tags":[]}"#);
    }

    #[test]
    fn most_confident_title_wins() {
        let t = parse_and_clean(b"<body><h1>Low</h1><h2>High</h2></body>", "u", "en").unwrap();
        let preds = [
            pred(id_of(&t, "h1", 0), Some(AttributeKind::Title), 0.6),
            pred(id_of(&t, "h2", 0), Some(AttributeKind::Title), 0.9),
        ];
        assert_eq!(page_assemble(&preds, &t, "u").title.as_deref(), Some("High"));
        let tied = [
            pred(id_of(&t, "h2", 0), Some(AttributeKind::Title), 0.5),
            pred(id_of(&t, "h1", 0), Some(AttributeKind::Title), 0.5),
        ];
        assert_eq!(page_assemble(&tied, &t, "u").title.as_deref(), Some("Low"));
    }

    #[test]
    fn text_joins_in_preorder() {
        let t = parse_and_clean(b"<body><p>t1</p><p>t2 <a>mid</a> end</p><p>t3</p></body>", "u", "en").unwrap();
        let mut preds: Vec<_> = (0..3).map(|k| pred(id_of(&t, "p", k), Some(AttributeKind::Text), 0.8)).collect();
        preds.reverse();
        assert_eq!(page_assemble(&preds, &t, "u").text.as_deref(), Some("t1\nt2 end\nt3"));
        preds.push(pred(id_of(&t, "a", 0), Some(AttributeKind::Text), 0.8));
        assert_eq!(page_assemble(&preds, &t, "u").text.as_deref(), Some("t1\nt2 mid end\nt3"));
    }

    #[test]
    fn lists_deduplicate_and_dates_prefer_datetime() {
        let t = parse_and_clean(
            br#"<body><span>Jane Roe</span><span>jane  roe</span><b>Tom</b><time datetime="2022-03-05">5 March</time></body>"#,
            "u",
            "en",
        )
        .unwrap();
        let preds = [
            pred(id_of(&t, "span", 0), Some(AttributeKind::Author), 1.0),
            pred(id_of(&t, "span", 1), Some(AttributeKind::Author), 1.0),
            pred(id_of(&t, "b", 0), Some(AttributeKind::Author), 1.0),
            pred(id_of(&t, "time", 0), Some(AttributeKind::Date), 1.0),
        ];
        let a = page_assemble(&preds, &t, "u");
        assert_eq!(a.authors, ["Jane Roe", "Tom"]);
        assert_eq!(a.date.as_deref(), Some("2022-03-05"));
    }
}
