use serde::{Deserialize, Serialize};

use crate::dataset::{node_labels, AttributeAnnotation, AttributeKind};
use crate::dom::{xpath_of, DomTree, NodeId, XPathExpr};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTuple {
    pub node_id: NodeId,
    pub text: String,
    pub xpath: XPathExpr,
    pub label: Option<AttributeKind>,
}

/// One tuple per text-bearing node, in pre-order.
pub fn node_tuples(tree: &DomTree, annotations: &[AttributeAnnotation]) -> Vec<NodeTuple> {
    let labels = node_labels(tree, annotations);
    tree.nodes
        .iter()
        .filter(|n| n.has_text())
        .map(|n| NodeTuple {
            node_id: n.node_id,
            text: n.text.clone(),
            xpath: xpath_of(tree, n.node_id),
            label: labels[n.node_id.0],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_and_clean;

    #[test]
    fn heading_carries_title() {
        let tree = parse_and_clean(b"<body><h1>Big</h1><p>one</p><p>two</p></body>", "u", "en").unwrap();
        let mut ann = AttributeAnnotation::new(AttributeKind::Title, vec!["Big".into()]);
        ann.node_ids = Some(vec![NodeId(2)]);
        let tuples = node_tuples(&tree, &[ann]);
        assert_eq!(tuples.len(), 3);
        assert_eq!(tuples[0].text, "Big");
        assert_eq!(tuples[0].xpath.to_string(), "/html/body/h1");
        assert_eq!(tuples[0].label, Some(AttributeKind::Title));
        assert!(tuples[1..].iter().all(|t| t.label.is_none()));
        assert_eq!(tuples[2].xpath.to_string(), "/html/body/p[2]");
    }

    #[test]
    fn no_annotations_no_labels() {
        let tree = parse_and_clean(b"<p>a</p><div>b<span>c</span></div>", "u", "en").unwrap();
        let tuples = node_tuples(&tree, &[]);
        assert_eq!(tuples.iter().map(|t| t.text.as_str()).collect::<Vec<_>>(), ["a", "b", "c"]);
        assert!(tuples.iter().all(|t| t.label.is_none()));
    }
}
