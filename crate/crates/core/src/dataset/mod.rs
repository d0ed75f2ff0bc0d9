//! Annotated page records.
//!
//! A dataset root holds one directory per site; each page is a pair
//! `page_<k>.html` + `page_<k>.json`. The JSON carries the URL, language,
//! ground-truth attribute values and, optionally, the wrapper selectors that
//! produced them. A site directory may also contain a `sitemap.json`.

mod load;
mod mapping;
mod sitemap;
mod stats;
mod validate;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dom::{NodeId, XPathExpr};

pub use load::{load_dataset, load_page, load_sitemaps, site_id_of};
pub use mapping::{map_annotations, node_labels, prepare_pages, propagate_labels, MappedPage};
pub use sitemap::{ExtractMode, SelectorEntry, SelectorMap, Sitemap};
pub use stats::{compute_stats, AttributeStats, DatasetStats, LanguageStats};
pub use validate::{validate, Finding, FindingKind, ValidationConfig, ValidationReport};

/// The five extractable article attributes. `None` is not a variant; it is
/// represented by `Option<AttributeKind>` and class 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Title,
    Date,
    Text,
    Author,
    Tag,
}

impl AttributeKind {
    pub const ALL: [AttributeKind; 5] = [
        AttributeKind::Title,
        AttributeKind::Date,
        AttributeKind::Text,
        AttributeKind::Author,
        AttributeKind::Tag,
    ];

    /// Class index; `0` is reserved for the none class.
    pub fn class_id(self) -> usize {
        match self {
            AttributeKind::Title => 1,
            AttributeKind::Date => 2,
            AttributeKind::Text => 3,
            AttributeKind::Author => 4,
            AttributeKind::Tag => 5,
        }
    }

    pub fn from_class_id(id: usize) -> Option<AttributeKind> {
        AttributeKind::ALL.get(id.checked_sub(1)?).copied()
    }

    /// Key used in page JSON files.
    pub fn json_key(self) -> &'static str {
        match self {
            AttributeKind::Title => "title",
            AttributeKind::Date => "date",
            AttributeKind::Text => "text",
            AttributeKind::Author => "authors",
            AttributeKind::Tag => "tags",
        }
    }

    /// Title and publication date are single-valued on a page.
    pub fn is_single_valued(self) -> bool {
        matches!(self, AttributeKind::Title | AttributeKind::Date)
    }
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttributeKind::Title => "Title",
            AttributeKind::Date => "Date",
            AttributeKind::Text => "Text",
            AttributeKind::Author => "Author",
            AttributeKind::Tag => "Tag",
        })
    }
}

impl FromStr for AttributeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "title" => Ok(AttributeKind::Title),
            "date" => Ok(AttributeKind::Date),
            "text" => Ok(AttributeKind::Text),
            "author" | "authors" => Ok(AttributeKind::Author),
            "tag" | "tags" => Ok(AttributeKind::Tag),
            other => Err(format!("unknown attribute {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeAnnotation {
    pub kind: AttributeKind,
    pub selector: Option<SelectorEntry>,
    pub values: Vec<String>,
    /// `None` until [`map_annotations`] runs.
    pub node_ids: Option<Vec<NodeId>>,
    pub xpaths: Vec<XPathExpr>,
    /// Values that neither the selector nor text matching could place.
    pub unmapped: Vec<String>,
}

impl AttributeAnnotation {
    pub fn new(kind: AttributeKind, values: Vec<String>) -> Self {
        AttributeAnnotation {
            kind,
            selector: None,
            values,
            node_ids: None,
            xpaths: Vec::new(),
            unmapped: Vec::new(),
        }
    }

    pub fn mapped_nodes(&self) -> &[NodeId] {
        self.node_ids.as_deref().unwrap_or(&[])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PageRecord {
    pub url: String,
    pub html: Vec<u8>,
    pub language: String,
    pub site_id: String,
    pub annotations: Vec<AttributeAnnotation>,
    /// `<site dir>/page_<k>` relative to the dataset root.
    pub page_key: String,
    pub source_path: PathBuf,
}

impl PageRecord {
    pub fn annotation(&self, kind: AttributeKind) -> Option<&AttributeAnnotation> {
        self.annotations.iter().find(|a| a.kind == kind)
    }

    pub fn values(&self, kind: AttributeKind) -> &[String] {
        self.annotation(kind).map(|a| a.values.as_slice()).unwrap_or(&[])
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: invalid field `{field}`: {message}")]
    SchemaError {
        path: PathBuf,
        field: String,
        message: String,
    },
    #[error("{path}: html file is missing")]
    MissingHtml { path: PathBuf },
    #[error("{kind} value {value:?} matches no node")]
    UnmappedValue { kind: AttributeKind, value: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: dataset root does not exist")]
    MissingRoot { path: PathBuf },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_ids_are_one_based_and_invertible() {
        for (i, k) in AttributeKind::ALL.iter().enumerate() {
            assert_eq!(k.class_id(), i + 1);
            assert_eq!(AttributeKind::from_class_id(i + 1), Some(*k));
        }
        assert_eq!(AttributeKind::from_class_id(0), None);
        assert_eq!(AttributeKind::from_class_id(6), None);
    }

    #[test]
    fn parses_both_key_styles() {
        assert_eq!("authors".parse::<AttributeKind>().unwrap(), AttributeKind::Author);
        assert_eq!("Tag".parse::<AttributeKind>().unwrap(), AttributeKind::Tag);
        assert!("subtitle".parse::<AttributeKind>().is_err());
    }
}
