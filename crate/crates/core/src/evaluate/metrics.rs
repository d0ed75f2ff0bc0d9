use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::aggregate::Article;
use crate::dataset::AttributeKind;
use crate::dom::{is_cjk, normalize_value};
use crate::scalar::{f1_score, safe_ratio, Scalar};

use super::dates::{dates_match, parse_date_hint};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchCounts<T> {
    pub tp: T,
    pub fp: T,
    #[serde(rename = "fn")]
    pub fn_: T,
}

impl<T: Scalar> MatchCounts<T> {
    pub fn new(tp: T, fp: T, fn_: T) -> Self {
        MatchCounts { tp, fp, fn_ }
    }

    pub fn zero() -> Self {
        MatchCounts::new(T::zero(), T::zero(), T::zero())
    }

    fn counts(tp: usize, fp: usize, fn_: usize) -> Self {
        MatchCounts::new(T::from_count(tp), T::from_count(fp), T::from_count(fn_))
    }

    pub fn is_zero(&self) -> bool {
        self.tp == T::zero() && self.fp == T::zero() && self.fn_ == T::zero()
    }

    pub fn precision(&self) -> T {
        safe_ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> T {
        safe_ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> T {
        f1_score(self.precision(), self.recall())
    }
}

impl<T: Scalar> std::ops::Add for MatchCounts<T> {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        MatchCounts::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

/// Unit that n-grams are built from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramUnit {
    /// Characters when either side contains Han or Kana, words otherwise.
    #[default]
    Auto,
    Word,
    Char,
}

fn units(s: &str, unit: GramUnit) -> Vec<String> {
    match unit {
        GramUnit::Char => s.chars().filter(|c| !c.is_whitespace()).map(String::from).collect(),
        _ => s.split_whitespace().map(String::from).collect(),
    }
}

/// Multiset of `n`-grams. A non-empty sequence shorter than `n` is one
/// gram.
fn grams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut bag = HashMap::new();
    if tokens.is_empty() {
        return bag;
    }
    if tokens.len() < n {
        bag.insert(tokens, 1);
        return bag;
    }
    for w in tokens.windows(n) {
        *bag.entry(w).or_insert(0) += 1;
    }
    bag
}

/// Bag-of-n-grams overlap after lowercasing and whitespace collapsing.
pub fn match_ngrams<T: Scalar>(pred: &str, truth: &str, n: usize, unit: GramUnit) -> MatchCounts<T> {
    let n = n.max(1);
    let (p, t) = (normalize_value(pred), normalize_value(truth));
    let unit = match unit {
        GramUnit::Auto if p.chars().chain(t.chars()).any(is_cjk) => GramUnit::Char,
        GramUnit::Auto => GramUnit::Word,
        u => u,
    };
    let (pt, tt) = (units(&p, unit), units(&t, unit));
    let (pb, tb) = (grams(&pt, n), grams(&tt, n));
    let tp: usize = pb.iter().map(|(g, c)| (*c).min(tb.get(g).copied().unwrap_or(0))).sum();
    let np: usize = pb.values().sum();
    let nt: usize = tb.values().sum();
    MatchCounts::counts(tp, np - tp, nt - tp)
}

/// Set overlap after trimming and lowercasing each value.
pub fn match_sets<T: Scalar>(pred: &[String], truth: &[String]) -> MatchCounts<T> {
    let norm = |v: &[String]| -> HashSet<String> {
        v.iter().map(|s| normalize_value(s)).filter(|s| !s.is_empty()).collect()
    };
    let (p, t) = (norm(pred), norm(truth));
    let tp = p.intersection(&t).count();
    MatchCounts::counts(tp, p.len() - tp, t.len() - tp)
}

fn present(s: Option<&str>) -> Option<&str> {
    s.filter(|v| !v.trim().is_empty())
}

/// One date against another; absent or unparseable sides never match.
pub fn match_dates<T: Scalar>(pred: Option<&str>, truth: Option<&str>, lang: Option<&str>) -> MatchCounts<T> {
    match (present(pred), present(truth)) {
        (None, None) => MatchCounts::zero(),
        (Some(_), None) => MatchCounts::counts(0, 1, 0),
        (None, Some(_)) => MatchCounts::counts(0, 0, 1),
        (Some(p), Some(t)) => match (parse_date_hint(p, lang), parse_date_hint(t, lang)) {
            (Some(a), Some(b)) if dates_match(&a, &b) => MatchCounts::counts(1, 0, 0),
            _ => MatchCounts::counts(0, 1, 1),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoringConfig {
    pub n: usize,
    pub unit: GramUnit,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig { n: 4, unit: GramUnit::Auto }
    }
}

/// Whether the attribute takes part in averaging for this page.
pub fn is_scored(pred: &Article, truth: &Article, kind: AttributeKind) -> bool {
    let has = |a: &Article| a.values(kind).iter().any(|v| !v.trim().is_empty());
    has(pred) || has(truth)
}

/// Counts per attribute in [`AttributeKind::ALL`] order.
pub fn score_page<T: Scalar>(pred: &Article, truth: &Article, lang: Option<&str>, cfg: &ScoringConfig) -> [MatchCounts<T>; 5] {
    let text = |o: &Option<String>| o.clone().unwrap_or_default();
    AttributeKind::ALL.map(|kind| match kind {
        AttributeKind::Title => match_ngrams(&text(&pred.title), &text(&truth.title), cfg.n, cfg.unit),
        AttributeKind::Text => match_ngrams(&text(&pred.text), &text(&truth.text), cfg.n, cfg.unit),
        AttributeKind::Date => match_dates(pred.date.as_deref(), truth.date.as_deref(), lang),
        AttributeKind::Author => match_sets(&pred.authors, &truth.authors),
        AttributeKind::Tag => match_sets(&pred.tags, &truth.tags),
    })
}
