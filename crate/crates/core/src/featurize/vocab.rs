use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dom::{DomTree, XPathExpr};

/// Common tags used when no corpus-derived vocabulary is supplied.
pub const DEFAULT_TAGS: &[&str] = &[
    "html", "head", "body", "div", "span", "p", "a", "li", "ul", "ol", "img", "meta", "link",
    "title", "h1", "h2", "h3", "h4", "h5", "h6", "strong", "b", "em", "i", "u", "small", "time",
    "article", "section", "header", "footer", "nav", "aside", "main", "figure", "figcaption",
    "table", "thead", "tbody", "tfoot", "tr", "td", "th", "form", "input", "button", "label",
    "select", "option", "textarea", "blockquote", "pre", "code", "hr", "dl", "dt", "dd", "abbr",
    "address", "cite", "q", "sub", "sup", "mark", "del", "ins", "s", "picture", "source",
    "video", "audio", "track", "embed", "object", "param", "map", "area", "caption", "col",
    "colgroup", "fieldset", "legend", "details", "summary", "dialog", "menu", "output",
    "progress", "meter", "data", "var", "samp", "kbd", "bdi", "bdo", "wbr", "ruby", "rt", "rp",
    "center",
];

/// Tag ids for XPath encoding: vocabulary tags, then UNK, then PAD.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagVocab {
    pub tags: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

/// Subscripts are clamped to this value; `MAX_SUBSCRIPT + 1` pads.
pub const MAX_SUBSCRIPT: u32 = 1000;
pub const PAD_SUBSCRIPT: u32 = MAX_SUBSCRIPT + 1;

impl TagVocab {
    pub fn new(tags: Vec<String>) -> Self {
        let index = tags.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        TagVocab { tags, index }
    }

    pub fn default_tags() -> Self {
        TagVocab::new(DEFAULT_TAGS.iter().map(|s| s.to_string()).collect())
    }

    /// The `size` most frequent tags across `trees`; ties break by name.
    pub fn from_frequency<'a>(trees: impl IntoIterator<Item = &'a DomTree>, size: usize) -> Self {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for tree in trees {
            for node in &tree.nodes {
                *counts.entry(node.tag.as_str()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        TagVocab::new(ranked.into_iter().take(size).map(|(t, _)| t.to_string()).collect())
    }

    /// Rebuilds the lookup table after deserialization.
    pub fn reindexed(self) -> Self {
        TagVocab::new(self.tags)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn unk_id(&self) -> u32 {
        self.tags.len() as u32
    }

    pub fn pad_id(&self) -> u32 {
        self.tags.len() as u32 + 1
    }

    pub fn id(&self, tag: &str) -> u32 {
        self.index.get(tag).copied().unwrap_or(self.unk_id())
    }

    /// Parallel (tag id, subscript) arrays padded or cut to `max_depth`.
    /// Cutting keeps the innermost steps.
    pub fn encode_xpath(&self, xpath: &XPathExpr, max_depth: usize) -> (Vec<u32>, Vec<u32>) {
        let skip = xpath.steps.len().saturating_sub(max_depth);
        let mut tags = vec![self.pad_id(); max_depth];
        let mut subs = vec![PAD_SUBSCRIPT; max_depth];
        for (i, step) in xpath.steps.iter().skip(skip).enumerate() {
            tags[i] = self.id(&step.tag);
            subs[i] = (step.subscript as u32).min(MAX_SUBSCRIPT);
        }
        (tags, subs)
    }
}

impl Default for TagVocab {
    fn default() -> Self {
        TagVocab::default_tags()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_list_has_one_hundred_distinct_tags() {
        let v = TagVocab::default_tags();
        assert_eq!(v.len(), 100);
        assert_eq!(v.index.len(), 100);
        assert_eq!(v.id("p"), 5);
        assert_eq!(v.id("blink"), 100);
        assert_eq!(v.pad_id(), 101);
    }

    #[test]
    fn xpath_is_padded_and_clamped() {
        let v = TagVocab::default_tags();
        let x: XPathExpr = "/html/body/div[2000]/p".parse().unwrap();
        let (tags, subs) = v.encode_xpath(&x, 6);
        assert_eq!(tags, [0, 2, 3, 5, 101, 101]);
        assert_eq!(subs, [0, 0, 1000, 0, 1001, 1001]);
        let (tags, _) = v.encode_xpath(&x, 2);
        assert_eq!(tags, [3, 5]);
    }

    #[test]
    fn frequency_vocab_orders_by_count_then_name() {
        let tree = crate::dom::parse_and_clean(b"<body><p>a</p><p>b</p><i>c</i><b>d</b></body>", "", "en").unwrap();
        let v = TagVocab::from_frequency([&tree], 3);
        assert_eq!(v.tags, ["p", "b", "body"]);
    }
}
