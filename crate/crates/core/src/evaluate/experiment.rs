use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::Article;
use crate::dataset::{AttributeKind, MappedPage, PageRecord};

use super::metrics::{is_scored, score_page, ScoringConfig};
use super::report::{summarize, EvalReport, FoldReport, FoldStatus, PageScore};
use super::splits::{make_splits, SplitPlan};
use super::EvaluateError;

/// Which pages train and which are tested in each fold.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Design {
    /// Train and test on one language.
    OneLanguage(String),
    /// Test on one language, train on all others.
    LeaveOneLanguageOut(String),
    /// All languages on both sides.
    Mixed,
}

impl Design {
    fn tests(&self, lang: &str) -> bool {
        match self {
            Design::OneLanguage(l) | Design::LeaveOneLanguageOut(l) => l == lang,
            Design::Mixed => true,
        }
    }

    fn trains(&self, lang: &str) -> bool {
        match self {
            Design::OneLanguage(l) => l == lang,
            Design::LeaveOneLanguageOut(l) => l != lang,
            Design::Mixed => true,
        }
    }

    /// Whether training draws from every fold rather than the other folds.
    fn trains_across_folds(&self) -> bool {
        matches!(self, Design::LeaveOneLanguageOut(_))
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Design::OneLanguage(l) => write!(f, "one-language:{l}"),
            Design::LeaveOneLanguageOut(l) => write!(f, "lolo:{l}"),
            Design::Mixed => f.write_str("mixed"),
        }
    }
}

impl FromStr for Design {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, lang) = match s.split_once(':') {
            Some((n, l)) => (n, Some(l.trim().to_ascii_lowercase())),
            None => (s, None),
        };
        match (name.trim().to_ascii_lowercase().as_str(), lang) {
            ("mixed", None) => Ok(Design::Mixed),
            ("one-language" | "one_language" | "onelanguage", Some(l)) if !l.is_empty() => Ok(Design::OneLanguage(l)),
            ("lolo" | "leave-one-language-out", Some(l)) if !l.is_empty() => Ok(Design::LeaveOneLanguageOut(l)),
            _ => Err(format!("unknown design {s:?}; expected mixed, one-language:<lang> or lolo:<lang>")),
        }
    }
}

impl Serialize for Design {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Design {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Produces articles for test pages after seeing the training pages.
pub trait ExtractionMethod: Send + Sync {
    fn name(&self) -> String;
    fn fit(&self, train: &[&MappedPage]) -> Result<Box<dyn PageExtractor>, String>;
}

impl<M: ExtractionMethod + ?Sized> ExtractionMethod for Box<M> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn fit(&self, train: &[&MappedPage]) -> Result<Box<dyn PageExtractor>, String> {
        (**self).fit(train)
    }
}

pub trait PageExtractor: Send + Sync {
    fn extract(&self, page: &MappedPage) -> Result<Article, String>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub k: usize,
    pub seed: u64,
    pub scoring: ScoringConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k: 5,
            seed: 42,
            scoring: ScoringConfig::default(),
        }
    }
}

/// Ground truth in article form; text values join with newlines.
pub fn truth_article(record: &PageRecord) -> Article {
    let first = |k: AttributeKind| record.values(k).first().cloned();
    let text = record.values(AttributeKind::Text);
    Article {
        url: record.url.clone(),
        title: first(AttributeKind::Title),
        date: first(AttributeKind::Date),
        text: (!text.is_empty()).then(|| text.join("\n")),
        authors: record.values(AttributeKind::Author).to_vec(),
        tags: record.values(AttributeKind::Tag).to_vec(),
    }
}

fn score_one(fold: usize, page: &MappedPage, pred: &Article, cfg: &ScoringConfig) -> Vec<PageScore> {
    let truth = truth_article(&page.record);
    let counts = score_page::<f64>(pred, &truth, Some(&page.record.language), cfg);
    AttributeKind::ALL
        .iter()
        .zip(counts)
        .filter(|(k, _)| is_scored(pred, &truth, **k))
        .map(|(k, c)| PageScore::new(fold, page, *k, c))
        .collect()
}

fn run_fold(
    fold: usize,
    train: Vec<&MappedPage>,
    test: Vec<&MappedPage>,
    method: &dyn ExtractionMethod,
    cfg: &ScoringConfig,
) -> (FoldReport, Vec<PageScore>) {
    let sites = |pages: &[&MappedPage]| -> Vec<String> {
        pages.iter().map(|p| p.record.site_id.clone()).collect::<BTreeSet<_>>().into_iter().collect()
    };
    let mut report = FoldReport {
        fold,
        status: FoldStatus::Ok,
        train_sites: sites(&train),
        test_sites: sites(&test),
        train_pages: train.len(),
        test_pages: test.len(),
        page_errors: Vec::new(),
        summary: Vec::new(),
    };
    if test.is_empty() {
        report.status = FoldStatus::Skipped;
        return (report, Vec::new());
    }
    let extractor = match method.fit(&train) {
        Ok(e) => e,
        Err(message) => {
            report.status = FoldStatus::Failed { message };
            return (report, Vec::new());
        }
    };
    let results: Vec<(Vec<PageScore>, Option<String>)> = test
        .par_iter()
        .map(|page| match extractor.extract(page) {
            Ok(a) => (score_one(fold, page, &a, cfg), None),
            Err(e) => {
                let empty = Article {
                    url: page.record.url.clone(),
                    ..Article::default()
                };
                (score_one(fold, page, &empty, cfg), Some(format!("{}: {e}", page.record.page_key)))
            }
        })
        .collect();
    let mut scores = Vec::new();
    for (s, err) in results {
        scores.extend(s);
        report.page_errors.extend(err);
    }
    report.summary = summarize(scores.iter());
    (report, scores)
}

fn build_report(
    method: &dyn ExtractionMethod,
    design: String,
    plan: Option<&SplitPlan>,
    folds: Vec<(FoldReport, Vec<PageScore>)>,
) -> EvalReport {
    let mut pages: Vec<PageScore> = Vec::new();
    let mut fold_reports = Vec::new();
    for (r, s) in folds {
        fold_reports.push(r);
        pages.extend(s);
    }
    let languages: BTreeSet<String> = pages.iter().map(|p| p.language.clone()).collect();
    let by_language: BTreeMap<String, _> = languages
        .into_iter()
        .map(|l| {
            let s = super::report::fold_mean(&fold_reports, &pages, |p| p.language == l);
            (l, s)
        })
        .collect();
    EvalReport {
        method: method.name(),
        design,
        k: plan.map_or(1, |p| p.k),
        seed: plan.map(|p| p.seed),
        overall: super::report::fold_mean(&fold_reports, &pages, |_| true),
        by_language,
        folds: fold_reports,
        pages,
    }
}

/// Cross-validation over one site-level plan shared by every design.
/// Training pages never share a site with the fold's test pages.
pub fn run_experiment(
    design: &Design,
    pages: &[MappedPage],
    method: &dyn ExtractionMethod,
    cfg: &ExperimentConfig,
) -> Result<EvalReport, EvaluateError> {
    let sites: Vec<String> = pages.iter().map(|p| p.record.site_id.clone()).collect();
    let plan = make_splits(&sites, cfg.k, cfg.seed)?;
    let fold_of: BTreeMap<&str, usize> = plan
        .folds
        .iter()
        .enumerate()
        .flat_map(|(f, s)| s.iter().map(move |site| (site.as_str(), f)))
        .collect();
    let folds: Vec<(FoldReport, Vec<PageScore>)> = (0..plan.k)
        .into_par_iter()
        .map(|f| {
            let in_fold = |p: &MappedPage| fold_of[p.record.site_id.as_str()] == f;
            let test: Vec<&MappedPage> = pages.iter().filter(|p| in_fold(p) && design.tests(&p.record.language)).collect();
            let test_sites: BTreeSet<&str> = test.iter().map(|p| p.record.site_id.as_str()).collect();
            let train: Vec<&MappedPage> = pages
                .iter()
                .filter(|p| design.trains(&p.record.language))
                .filter(|p| design.trains_across_folds() || !in_fold(p))
                .filter(|p| !test_sites.contains(p.record.site_id.as_str()))
                .collect();
            run_fold(f, train, test, method, &cfg.scoring)
        })
        .collect();
    Ok(build_report(method, design.to_string(), Some(&plan), folds))
}

/// Scores `method` on every page without splitting; training sees no pages.
pub fn evaluate_method(pages: &[MappedPage], method: &dyn ExtractionMethod, cfg: &ScoringConfig) -> EvalReport {
    let fold = run_fold(0, Vec::new(), pages.iter().collect(), method, cfg);
    build_report(method, "all".into(), None, vec![fold])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_names_round_trip() {
        for d in [Design::Mixed, Design::OneLanguage("ru".into()), Design::LeaveOneLanguageOut("zh".into())] {
            assert_eq!(d.to_string().parse::<Design>().unwrap(), d);
        }
        assert!("lolo".parse::<Design>().is_err());
        assert!("mixed:en".parse::<Design>().is_err());
    }

    #[test]
    fn filters() {
        let one = Design::OneLanguage("ru".into());
        assert!(one.tests("ru") && one.trains("ru") && !one.trains("en"));
        let lolo = Design::LeaveOneLanguageOut("zh".into());
        assert!(lolo.tests("zh") && !lolo.tests("en") && lolo.trains("en") && !lolo.trains("zh"));
    }
}
