use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dom::{normalize_text, parse_and_clean, select_css};
use crate::evaluate::dates::parse_date_hint;

use super::{AttributeKind, ExtractMode, PageRecord, SelectorEntry, Sitemap};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FindingKind {
    /// The selector located nothing.
    EmptySelector { css: String },
    /// More than one node for a single-valued attribute.
    MultiNode { css: String, count: usize },
    /// The selector reads an attribute value instead of node text.
    AttrValueSelector { css: String, attribute: String },
    /// Extracted values fail the sanity heuristics.
    HeuristicFail { reason: String },
    /// The selector itself is outside the supported grammar.
    BadSelector { css: String, message: String },
    /// The page could not be parsed into a tree.
    Unparseable { message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Finding {
    pub site_id: String,
    pub page: String,
    pub kind: Option<AttributeKind>,
    pub finding: FindingKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Minimum total length of the text attribute, in characters.
    pub min_text_chars: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig { min_text_chars: 100 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pages_checked: usize,
    /// Sorted by (site, page, attribute).
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn count(&self, pred: impl Fn(&FindingKind) -> bool) -> usize {
        self.findings.iter().filter(|f| pred(&f.finding)).count()
    }
}

/// Re-runs wrapper selectors on every page and applies the value checks.
/// Records are only read.
pub fn validate(records: &[PageRecord], sitemaps: &[Sitemap], cfg: &ValidationConfig) -> ValidationReport {
    let by_site: HashMap<&str, &Sitemap> = sitemaps.iter().map(|s| (s.site_id.as_str(), s)).collect();
    let mut findings: Vec<Finding> = records
        .par_iter()
        .flat_map_iter(|rec| check_page(rec, by_site.get(rec.site_id.as_str()).copied(), cfg))
        .collect();
    findings.sort();
    ValidationReport {
        pages_checked: records.len(),
        findings,
    }
}

fn check_page(rec: &PageRecord, sitemap: Option<&Sitemap>, cfg: &ValidationConfig) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut push = |kind: Option<AttributeKind>, finding: FindingKind| {
        out.push(Finding {
            site_id: rec.site_id.clone(),
            page: rec.page_key.clone(),
            kind,
            finding,
        })
    };

    let selectors: Vec<(AttributeKind, SelectorEntry)> = match sitemap {
        Some(map) => map.selectors.entries().map(|(k, e)| (k, e.clone())).collect(),
        None => rec
            .annotations
            .iter()
            .filter_map(|a| a.selector.clone().map(|s| (a.kind, s)))
            .collect(),
    };

    if !selectors.is_empty() {
        match parse_and_clean(&rec.html, &rec.url, &rec.language) {
            Err(e) => push(None, FindingKind::Unparseable { message: e.to_string() }),
            Ok(tree) => {
                for (kind, entry) in &selectors {
                    if let ExtractMode::Attribute(attribute) = &entry.mode {
                        push(
                            Some(*kind),
                            FindingKind::AttrValueSelector {
                                css: entry.css.clone(),
                                attribute: attribute.clone(),
                            },
                        );
                    }
                    match select_css(&tree, &entry.css) {
                        Err(e) => push(
                            Some(*kind),
                            FindingKind::BadSelector {
                                css: entry.css.clone(),
                                message: e.to_string(),
                            },
                        ),
                        Ok(ids) if ids.is_empty() => {
                            push(Some(*kind), FindingKind::EmptySelector { css: entry.css.clone() })
                        }
                        Ok(ids) if ids.len() > 1 && kind.is_single_valued() => push(
                            Some(*kind),
                            FindingKind::MultiNode {
                                css: entry.css.clone(),
                                count: ids.len(),
                            },
                        ),
                        Ok(_) => {}
                    }
                }
            }
        }
    }

    for ann in &rec.annotations {
        if ann.values.iter().any(|v| normalize_text(v).is_empty()) {
            push(
                Some(ann.kind),
                FindingKind::HeuristicFail {
                    reason: "empty value after normalization".into(),
                },
            );
        }
        match ann.kind {
            AttributeKind::Date => {
                for v in &ann.values {
                    if !normalize_text(v).is_empty()
                        && parse_date_hint(v, Some(&rec.language)).is_none()
                    {
                        push(
                            Some(ann.kind),
                            FindingKind::HeuristicFail {
                                reason: format!("unparseable date {v:?}"),
                            },
                        );
                    }
                }
            }
            AttributeKind::Text => {
                let total: usize = ann.values.iter().map(|v| normalize_text(v).chars().count()).sum();
                if total < cfg.min_text_chars {
                    push(
                        Some(ann.kind),
                        FindingKind::HeuristicFail {
                            reason: format!("text has {total} characters, below {}", cfg.min_text_chars),
                        },
                    );
                }
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeAnnotation, SelectorMap};
    use std::path::PathBuf;

    const HTML: &str = r#"<html><body><h1 class="t">One</h1><h1 class="t">Two</h1>
        <p class="body">short</p><meta itemprop="date" content="2022-03-05"></body></html>"#;

    fn page(anns: Vec<AttributeAnnotation>) -> PageRecord {
        PageRecord {
            url: "http://a.com/1".into(),
            html: HTML.as_bytes().to_vec(),
            language: "en".into(),
            site_id: "a.com".into(),
            annotations: anns,
            page_key: "a.com/page_1".into(),
            source_path: PathBuf::new(),
        }
    }

    fn sitemap(entries: &[(AttributeKind, SelectorEntry)]) -> Sitemap {
        let mut selectors = SelectorMap::default();
        for (k, e) in entries {
            selectors.set(*k, e.clone());
        }
        Sitemap {
            site_id: "a.com".into(),
            selectors,
        }
    }

    #[test]
    fn multi_node_title() {
        let rec = page(vec![AttributeAnnotation::new(AttributeKind::Title, vec!["One".into()])]);
        let map = sitemap(&[(AttributeKind::Title, SelectorEntry::text("h1.t"))]);
        let report = validate(&[rec], &[map], &ValidationConfig::default());
        assert_eq!(report.count(|f| matches!(f, FindingKind::MultiNode { count: 2, .. })), 1);
    }

    #[test]
    fn empty_selector() {
        let rec = page(vec![]);
        let map = sitemap(&[(AttributeKind::Title, SelectorEntry::text("h1.gone"))]);
        let report = validate(&[rec], &[map], &ValidationConfig::default());
        assert_eq!(report.findings.len(), 1);
        assert!(matches!(report.findings[0].finding, FindingKind::EmptySelector { .. }));
    }

    #[test]
    fn attribute_mode_and_bad_date() {
        let mut date = AttributeAnnotation::new(AttributeKind::Date, vec!["not a date".into()]);
        date.selector = Some(SelectorEntry {
            css: "meta[itemprop=date]".into(),
            mode: ExtractMode::Attribute("content".into()),
            multiple: None,
        });
        let rec = page(vec![date]);
        let before = rec.clone();
        let report = validate(std::slice::from_ref(&rec), &[], &ValidationConfig::default());
        assert_eq!(rec, before);
        assert_eq!(report.count(|f| matches!(f, FindingKind::AttrValueSelector { .. })), 1);
        assert_eq!(report.count(|f| matches!(f, FindingKind::HeuristicFail { .. })), 1);
        assert_eq!(report.findings.iter().filter(|f| f.kind == Some(AttributeKind::Date)).count(), 2);
    }

    #[test]
    fn short_text_and_empty_values() {
        let rec = page(vec![
            AttributeAnnotation::new(AttributeKind::Text, vec!["short".into()]),
            AttributeAnnotation::new(AttributeKind::Author, vec!["  ".into()]),
        ]);
        let report = validate(&[rec], &[], &ValidationConfig::default());
        let kinds: Vec<_> = report.findings.iter().map(|f| f.kind).collect();
        assert_eq!(kinds, [Some(AttributeKind::Text), Some(AttributeKind::Author)]);
        let lenient = validate(
            &[page(vec![AttributeAnnotation::new(AttributeKind::Text, vec!["short".into()])])],
            &[],
            &ValidationConfig { min_text_chars: 3 },
        );
        assert!(lenient.is_clean());
    }
}
