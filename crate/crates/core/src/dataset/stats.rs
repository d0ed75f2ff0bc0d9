use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{AttributeKind, PageRecord};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeStats {
    pub sites_with_attr: usize,
    pub pages_with_attr: usize,
    pub nodes_with_attr: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageStats {
    pub sites: usize,
    pub pages: usize,
    pub attributes: BTreeMap<AttributeKind, AttributeStats>,
}

/// Corpus statistics keyed by language.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub languages: BTreeMap<String, LanguageStats>,
}

/// Counts sites, pages and annotated nodes per language and attribute.
///
/// A page has an attribute when it carries a non-empty value list for it.
/// Its node count is the number of mapped nodes, or the number of values
/// for annotations that were not (or could not be) mapped.
pub fn compute_stats(records: &[PageRecord]) -> DatasetStats {
    let mut sites: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut attr_sites: BTreeMap<(&str, AttributeKind), BTreeSet<&str>> = BTreeMap::new();
    let mut stats = DatasetStats::default();
    for rec in records {
        let lang = rec.language.as_str();
        sites.entry(lang).or_default().insert(&rec.site_id);
        let entry = stats.languages.entry(lang.to_string()).or_default();
        entry.pages += 1;
        for kind in AttributeKind::ALL {
            entry.attributes.entry(kind).or_default();
        }
        for ann in &rec.annotations {
            if ann.values.is_empty() {
                continue;
            }
            let a = entry.attributes.entry(ann.kind).or_default();
            a.pages_with_attr += 1;
            a.nodes_with_attr += match ann.mapped_nodes().len() {
                0 => ann.values.len(),
                n => n,
            };
            attr_sites.entry((lang, ann.kind)).or_default().insert(&rec.site_id);
        }
    }
    for (lang, s) in sites {
        let entry = stats.languages.get_mut(lang).expect("language seen");
        entry.sites = s.len();
        for kind in AttributeKind::ALL {
            entry.attributes.get_mut(&kind).expect("seeded").sites_with_attr =
                attr_sites.get(&(lang, kind)).map_or(0, BTreeSet::len);
        }
    }
    stats
}

impl DatasetStats {
    /// Restricts the statistics to the given languages.
    pub fn filtered(&self, langs: &[String]) -> DatasetStats {
        DatasetStats {
            languages: self
                .languages
                .iter()
                .filter(|(l, _)| langs.is_empty() || langs.contains(l))
                .map(|(l, s)| (l.clone(), s.clone()))
                .collect(),
        }
    }

    /// Fixed-width table: one block per language with sites/pages and the
    /// three per-attribute rows.
    pub fn to_table(&self) -> String {
        let order = [
            AttributeKind::Title,
            AttributeKind::Text,
            AttributeKind::Date,
            AttributeKind::Author,
            AttributeKind::Tag,
        ];
        let mut out = String::new();
        let _ = write!(out, "{:<6}{:<18}", "lang", "");
        for k in order {
            let _ = write!(out, "{:>8}", k.to_string());
        }
        out.push('\n');
        for (lang, s) in &self.languages {
            let _ = writeln!(out, "{:<6}{:<18}{:>8}", lang, "Sites / Pages", format!("{} / {}", s.sites, s.pages));
            let rows: [(&str, fn(&AttributeStats) -> usize); 3] = [
                ("Sites with attr", |a| a.sites_with_attr),
                ("Pages with attr", |a| a.pages_with_attr),
                ("Nodes with attr", |a| a.nodes_with_attr),
            ];
            for (name, get) in rows {
                let _ = write!(out, "{:<6}{:<18}", "", name);
                for k in order {
                    let v = s.attributes.get(&k).map(get).unwrap_or(0);
                    let _ = write!(out, "{:>8}", v);
                }
                out.push('\n');
            }
        }
        out
    }
}
