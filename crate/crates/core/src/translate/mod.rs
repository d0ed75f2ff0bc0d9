//! Node-wise translation of cleaned trees into English.
//!
//! Only text fields change. Node ids, tags, attributes and parent/child
//! links are left untouched, so annotations keep resolving by id.

mod cache;
mod remote;

use std::collections::HashMap;
use std::path::Path;

use crate::dom::DomTree;

pub use cache::CachedBackend;
pub use remote::{RemoteBackend, RemoteConfig};

pub const TARGET_LANGUAGE: &str = "en";

#[derive(Debug, thiserror::Error)]
pub enum TranslateError {
    #[error("translation backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend returned {got} texts for {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Translates batches of texts into English. Implementations must accept
/// concurrent calls.
pub trait TranslationBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Output has one entry per input, in input order.
    fn translate(&self, source_lang: &str, texts: &[String]) -> Result<Vec<String>, TranslateError>;
}

/// Returns every text unchanged.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityBackend;

impl TranslationBackend for IdentityBackend {
    fn name(&self) -> &str {
        "identity"
    }

    fn translate(&self, _: &str, texts: &[String]) -> Result<Vec<String>, TranslateError> {
        Ok(texts.to_vec())
    }
}

/// Word-for-word lookup. Words missing from the table pass through, and
/// punctuation around a word is kept.
#[derive(Clone, Debug, Default)]
pub struct GlossaryBackend {
    entries: HashMap<String, String>,
}

impl GlossaryBackend {
    /// Keys match case-insensitively.
    pub fn new<I, K, V>(entries: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: Into<String>,
    {
        GlossaryBackend {
            entries: entries.into_iter().map(|(k, v)| (k.as_ref().to_lowercase(), v.into())).collect(),
        }
    }

    /// Reads a flat JSON object of `source word -> English word`.
    pub fn load(path: &Path) -> Result<Self, TranslateError> {
        let raw = std::fs::read_to_string(path).map_err(|source| TranslateError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let map: HashMap<String, String> = serde_json::from_str(&raw).map_err(|e| TranslateError::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(GlossaryBackend::new(map))
    }

    fn word(&self, word: &str) -> String {
        let core = word.trim_matches(|c: char| !c.is_alphanumeric());
        if core.is_empty() {
            return word.to_string();
        }
        match self.entries.get(&core.to_lowercase()) {
            Some(t) => {
                let start = word.find(core).unwrap_or(0);
                format!("{}{}{}", &word[..start], t, &word[start + core.len()..])
            }
            None => word.to_string(),
        }
    }

    pub fn translate_text(&self, text: &str) -> String {
        text.split(' ').map(|w| self.word(w)).collect::<Vec<_>>().join(" ")
    }
}

impl TranslationBackend for GlossaryBackend {
    fn name(&self) -> &str {
        "glossary"
    }

    fn translate(&self, _: &str, texts: &[String]) -> Result<Vec<String>, TranslateError> {
        Ok(texts.iter().map(|t| self.translate_text(t)).collect())
    }
}

#[derive(Clone, Debug)]
pub struct Translated {
    pub tree: DomTree,
    /// Non-empty nodes that kept their original text after a backend error.
    pub warnings: usize,
    pub last_error: Option<String>,
}

/// Translates every non-empty node text of a cleaned tree. A failed backend
/// call leaves the affected nodes with their original text; empty texts are
/// never sent.
pub fn translate_tree(tree: &DomTree, source_lang: &str, backend: &dyn TranslationBackend) -> Translated {
    let texts: Vec<String> = tree.nodes.iter().filter(|n| !n.text.is_empty()).map(|n| n.text.clone()).collect();
    let (out, warnings, last_error) = match backend.translate(source_lang, &texts) {
        Ok(t) if t.len() == texts.len() => (t, 0, None),
        Ok(t) => {
            let e = TranslateError::LengthMismatch {
                expected: texts.len(),
                got: t.len(),
            };
            (texts.clone(), texts.len(), Some(e.to_string()))
        }
        Err(e) => {
            log::warn!("{}: keeping original texts: {e}", backend.name());
            (texts.clone(), texts.len(), Some(e.to_string()))
        }
    };
    let mut next = out.into_iter();
    let tree = tree.map_texts(|_, original| next.next().unwrap_or_else(|| original.to_string()));
    Translated {
        tree,
        warnings,
        last_error,
    }
}
