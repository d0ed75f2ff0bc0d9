use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{DomError, DomTree, NodeId};

/// One location step. A subscript of `0` means the step is written without
/// a predicate because the tag is unique among its siblings.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct XPathStep {
    pub tag: String,
    pub subscript: usize,
}

/// Absolute positional XPath, e.g. `/html/body/div[2]/p[1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct XPathExpr {
    pub steps: Vec<XPathStep>,
}

impl XPathExpr {
    pub fn depth(&self) -> usize {
        self.steps.len()
    }
}

impl fmt::Display for XPathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            write!(f, "/{}", step.tag)?;
            if step.subscript > 0 {
                write!(f, "[{}]", step.subscript)?;
            }
        }
        Ok(())
    }
}

impl FromStr for XPathExpr {
    type Err = DomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = |reason: &str| DomError::XPathSyntax {
            expr: s.to_string(),
            reason: reason.to_string(),
        };
        let body = s
            .trim()
            .strip_prefix('/')
            .ok_or_else(|| syntax("must start with '/'"))?;
        let mut steps = Vec::new();
        for part in body.split('/') {
            if part.is_empty() {
                return Err(syntax("empty step"));
            }
            let (tag, subscript) = match part.find('[') {
                Some(open) => {
                    let close = part
                        .strip_suffix(']')
                        .ok_or_else(|| syntax("unterminated predicate"))?;
                    let n: usize = close[open + 1..]
                        .parse()
                        .map_err(|_| syntax("predicate must be a positive integer"))?;
                    if n == 0 {
                        return Err(syntax("predicates are 1-based"));
                    }
                    (&part[..open], n)
                }
                None => (part, 0),
            };
            if tag.is_empty()
                || !tag
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == ':')
            {
                return Err(syntax("invalid tag name"));
            }
            steps.push(XPathStep {
                tag: tag.to_ascii_lowercase(),
                subscript,
            });
        }
        Ok(XPathExpr { steps })
    }
}

impl Serialize for XPathExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for XPathExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Positional XPath of `node_id`. Tags that are unique among their siblings
/// carry no subscript.
pub fn xpath_of(tree: &DomTree, node_id: NodeId) -> XPathExpr {
    let mut chain = tree.ancestors(node_id);
    chain.push(node_id);
    let steps = chain
        .into_iter()
        .map(|id| {
            let node = tree.node(id);
            let same_tag = match node.parent_id {
                Some(p) => tree
                    .node(p)
                    .child_ids
                    .iter()
                    .filter(|c| tree.node(**c).tag == node.tag)
                    .count(),
                None => 1,
            };
            XPathStep {
                tag: node.tag.clone(),
                subscript: if same_tag > 1 { node.sibling_index } else { 0 },
            }
        })
        .collect();
    XPathExpr { steps }
}

pub fn resolve_xpath(tree: &DomTree, expr: &XPathExpr) -> Result<NodeId, DomError> {
    let no_match = || DomError::NoMatch(expr.to_string());
    let mut steps = expr.steps.iter();
    let first = steps.next().ok_or_else(no_match)?;
    let root = tree.root();
    if root.tag != first.tag || first.subscript > 1 {
        return Err(no_match());
    }
    let mut cur = root.node_id;
    for step in steps {
        let mut candidates = tree
            .node(cur)
            .child_ids
            .iter()
            .copied()
            .filter(|c| tree.node(*c).tag == step.tag);
        cur = if step.subscript > 0 {
            candidates
                .find(|c| tree.node(*c).sibling_index == step.subscript)
                .ok_or_else(no_match)?
        } else {
            let only = candidates.next().ok_or_else(no_match)?;
            if candidates.next().is_some() {
                return Err(DomError::Ambiguous(expr.to_string()));
            }
            only
        };
    }
    Ok(cur)
}
