use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeKind, MappedPage};

use super::metrics::MatchCounts;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PageScore {
    pub fold: usize,
    pub page_id: String,
    pub site_id: String,
    pub language: String,
    pub attribute: AttributeKind,
    pub counts: MatchCounts<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PageScore {
    pub fn new(fold: usize, page: &MappedPage, attribute: AttributeKind, counts: MatchCounts<f64>) -> Self {
        PageScore {
            fold,
            page_id: page.record.url.clone(),
            site_id: page.record.site_id.clone(),
            language: page.record.language.clone(),
            attribute,
            precision: counts.precision(),
            recall: counts.recall(),
            f1: counts.f1(),
            counts,
        }
    }
}

/// Mean P/R/F1 of one attribute; `pages` counts the contributing pages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeSummary {
    pub attribute: AttributeKind,
    pub pages: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum FoldStatus {
    Ok,
    /// No test pages under the design.
    Skipped,
    Failed { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub status: FoldStatus,
    pub train_sites: Vec<String>,
    pub test_sites: Vec<String>,
    pub train_pages: usize,
    pub test_pages: usize,
    pub page_errors: Vec<String>,
    pub summary: Vec<AttributeSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub design: String,
    pub k: usize,
    pub seed: Option<u64>,
    /// Mean over folds of the per-fold page averages.
    pub overall: Vec<AttributeSummary>,
    pub by_language: std::collections::BTreeMap<String, Vec<AttributeSummary>>,
    pub folds: Vec<FoldReport>,
    pub pages: Vec<PageScore>,
}

fn mean(xs: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut n = 0;
    let mut s = 0.0;
    for x in xs {
        n += 1;
        s += x;
    }
    (n, if n == 0 { 0.0 } else { s / n as f64 })
}

/// Page-averaged summary per attribute.
pub fn summarize<'a>(scores: impl Iterator<Item = &'a PageScore> + Clone) -> Vec<AttributeSummary> {
    AttributeKind::ALL
        .iter()
        .map(|&attribute| {
            let of = || scores.clone().filter(move |s| s.attribute == attribute);
            let (pages, precision) = mean(of().map(|s| s.precision));
            AttributeSummary {
                attribute,
                pages,
                precision,
                recall: mean(of().map(|s| s.recall)).1,
                f1: mean(of().map(|s| s.f1)).1,
            }
        })
        .collect()
}

/// Averages per-fold page means over the folds that scored the attribute.
pub(crate) fn fold_mean(folds: &[FoldReport], pages: &[PageScore], keep: impl Fn(&PageScore) -> bool) -> Vec<AttributeSummary> {
    let per_fold: Vec<Vec<AttributeSummary>> = folds
        .iter()
        .map(|f| summarize(pages.iter().filter(|p| p.fold == f.fold && keep(p))))
        .collect();
    AttributeKind::ALL
        .iter()
        .enumerate()
        .map(|(i, &attribute)| {
            let scored = || per_fold.iter().map(|f| &f[i]).filter(|s| s.pages > 0);
            AttributeSummary {
                attribute,
                pages: scored().map(|s| s.pages).sum(),
                precision: mean(scored().map(|s| s.precision)).1,
                recall: mean(scored().map(|s| s.recall)).1,
                f1: mean(scored().map(|s| s.f1)).1,
            }
        })
        .collect()
}

fn cell(s: &AttributeSummary) -> String {
    if s.pages == 0 {
        "-".into()
    } else {
        format!("{:.2}", s.f1)
    }
}

/// Fixed-width F1 table: one row per labeled summary.
pub fn f1_table(rows: &[(String, &[AttributeSummary])]) -> String {
    let width = rows.iter().map(|(n, _)| n.chars().count()).max().unwrap_or(0).max(6);
    let mut out = format!("{:<width$}", "Method");
    for k in AttributeKind::ALL {
        write!(out, " {:>7}", k.to_string()).unwrap();
    }
    out.push('\n');
    out.push_str(&"-".repeat(width + 8 * AttributeKind::ALL.len()));
    out.push('\n');
    for (name, summary) in rows {
        write!(out, "{name:<width$}").unwrap();
        for s in summary.iter() {
            write!(out, " {:>7}", cell(s)).unwrap();
        }
        out.push('\n');
    }
    out
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Overall row, one row per language, and a line per fold.
    pub fn to_text(&self) -> String {
        let mut rows = vec![(self.method.clone(), self.overall.as_slice())];
        for (lang, s) in &self.by_language {
            rows.push((format!("  {lang}"), s.as_slice()));
        }
        let mut out = format!("design {} | k {} | method {}\n", self.design, self.k, self.method);
        out.push_str(&f1_table(&rows));
        for f in &self.folds {
            let status = match &f.status {
                FoldStatus::Ok => "ok".to_string(),
                FoldStatus::Skipped => "skipped".to_string(),
                FoldStatus::Failed { message } => format!("failed: {message}"),
            };
            writeln!(
                out,
                "fold {}: {} | train {} sites / {} pages | test {} sites / {} pages | {} page errors",
                f.fold,
                status,
                f.train_sites.len(),
                f.train_pages,
                f.test_sites.len(),
                f.test_pages,
                f.page_errors.len()
            )
            .unwrap();
        }
        out
    }

    pub fn failed_folds(&self) -> usize {
        self.folds.iter().filter(|f| matches!(f.status, FoldStatus::Failed { .. })).count()
    }

    pub fn succeeded_folds(&self) -> usize {
        self.folds.iter().filter(|f| f.status == FoldStatus::Ok).count()
    }

    pub fn summary(&self, kind: AttributeKind) -> &AttributeSummary {
        &self.overall[kind.class_id() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(fold: usize, attribute: AttributeKind, f1: f64) -> PageScore {
        PageScore {
            fold,
            page_id: format!("p{fold}"),
            site_id: "s".into(),
            language: "en".into(),
            attribute,
            counts: MatchCounts::default(),
            precision: f1,
            recall: f1,
            f1,
        }
    }

    fn fold(fold: usize) -> FoldReport {
        FoldReport {
            fold,
            status: FoldStatus::Ok,
            train_sites: vec![],
            test_sites: vec![],
            train_pages: 0,
            test_pages: 0,
            page_errors: vec![],
            summary: vec![],
        }
    }

    #[test]
    fn folds_are_averaged_after_pages() {
        let pages = vec![
            score(0, AttributeKind::Title, 1.0),
            score(0, AttributeKind::Title, 0.0),
            score(0, AttributeKind::Title, 0.5),
            score(1, AttributeKind::Title, 1.0),
        ];
        let s = fold_mean(&[fold(0), fold(1), fold(2)], &pages, |_| true);
        assert_eq!(s[0].pages, 4);
        assert!((s[0].f1 - 0.75).abs() < 1e-12);
        assert_eq!(s[1].pages, 0);
        assert_eq!(s[1].f1, 0.0);
    }

    #[test]
    fn table_layout() {
        let s = summarize([score(0, AttributeKind::Title, 0.912)].iter());
        let t = f1_table(&[("heuristic".into(), s.as_slice())]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "Method      Title    Date    Text  Author     Tag");
        assert_eq!(lines[2], "heuristic    0.91       -       -       -       -");
    }
}
