use serde::{Deserialize, Serialize};

use super::AttributeKind;

/// How a selector's value is read: node text or an attribute of the node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExtractMode {
    #[default]
    Text,
    Attribute(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorEntry {
    pub css: String,
    #[serde(default)]
    pub mode: ExtractMode,
    /// Defaults to `true` except for title and date.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiple: Option<bool>,
}

impl SelectorEntry {
    pub fn text(css: &str) -> Self {
        SelectorEntry {
            css: css.to_string(),
            mode: ExtractMode::Text,
            multiple: None,
        }
    }

    pub fn allows_multiple(&self, kind: AttributeKind) -> bool {
        self.multiple.unwrap_or(!kind.is_single_valued())
    }
}

/// Per-attribute selectors keyed like the page JSON attributes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectorMap {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<SelectorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<SelectorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<SelectorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub authors: Option<SelectorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<SelectorEntry>,
}

impl SelectorMap {
    pub fn get(&self, kind: AttributeKind) -> Option<&SelectorEntry> {
        match kind {
            AttributeKind::Title => self.title.as_ref(),
            AttributeKind::Date => self.date.as_ref(),
            AttributeKind::Text => self.text.as_ref(),
            AttributeKind::Author => self.authors.as_ref(),
            AttributeKind::Tag => self.tags.as_ref(),
        }
    }

    pub fn set(&mut self, kind: AttributeKind, entry: SelectorEntry) {
        let slot = match kind {
            AttributeKind::Title => &mut self.title,
            AttributeKind::Date => &mut self.date,
            AttributeKind::Text => &mut self.text,
            AttributeKind::Author => &mut self.authors,
            AttributeKind::Tag => &mut self.tags,
        };
        *slot = Some(entry);
    }

    pub fn entries(&self) -> impl Iterator<Item = (AttributeKind, &SelectorEntry)> {
        AttributeKind::ALL
            .into_iter()
            .filter_map(move |k| self.get(k).map(|e| (k, e)))
    }
}

/// A site wrapper: the `selectors` object of page JSON plus `site_id`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sitemap {
    pub site_id: String,
    #[serde(flatten)]
    pub selectors: SelectorMap,
}

impl Sitemap {
    /// Entries violating the single-node rule for title and date.
    pub fn invalid_entries(&self) -> Vec<AttributeKind> {
        self.selectors
            .entries()
            .filter(|(k, e)| k.is_single_valued() && e.multiple == Some(true))
            .map(|(k, _)| k)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_wire_format() {
        let text: SelectorEntry = serde_json::from_str(r#"{"css":"h1","mode":"text"}"#).unwrap();
        assert_eq!(text.mode, ExtractMode::Text);
        let attr: SelectorEntry =
            serde_json::from_str(r#"{"css":"meta","mode":{"attribute":"content"}}"#).unwrap();
        assert_eq!(attr.mode, ExtractMode::Attribute("content".into()));
        assert_eq!(
            serde_json::to_string(&attr.mode).unwrap(),
            r#"{"attribute":"content"}"#
        );
    }

    #[test]
    fn sitemap_is_flat() {
        let s: Sitemap = serde_json::from_str(
            r#"{"site_id":"a.com","title":{"css":"h1"},"tags":{"css":"a.tag"}}"#,
        )
        .unwrap();
        assert_eq!(s.selectors.get(AttributeKind::Title).unwrap().css, "h1");
        assert!(s.selectors.get(AttributeKind::Tag).unwrap().allows_multiple(AttributeKind::Tag));
        assert!(!s.selectors.title.as_ref().unwrap().allows_multiple(AttributeKind::Title));
        assert!(s.invalid_entries().is_empty());
    }
}
