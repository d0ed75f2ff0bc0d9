//! End-to-end extraction methods: page in, article out.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate, from_labels, page_assemble, AggregationStrategy, Article, NodePrediction};
use crate::classify::{
    heuristic_extract, ClassifyError, FeatureExtractor, PageInput, SoftmaxClassifier, TokenClassifier, TrainConfig,
};
use crate::dataset::{node_labels, MappedPage};
use crate::dom::DomTree;
use crate::evaluate::{ExtractionMethod, PageExtractor};
use crate::featurize::{chunk, node_tuples, split_subtrees, ByteTokenizer, Chunk, ChunkingConfig, FeaturizeError, TagVocab};
use crate::translate::{translate_tree, TranslationBackend};

/// How a page becomes token sequences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Flat node tuples cut by a sliding window.
    #[default]
    Tuples,
    /// Token-budgeted subtrees with an ancestor context.
    Subtrees,
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tuples" | "a" => Ok(Scheme::Tuples),
            "subtrees" | "b" => Ok(Scheme::Subtrees),
            _ => Err(format!("unknown scheme {s:?}; expected tuples or subtrees")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub scheme: Scheme,
    pub chunking: ChunkingConfig,
    pub strategy: AggregationStrategy,
    pub train: TrainConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Featurize(#[from] FeaturizeError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Aggregate(#[from] crate::aggregate::AggregateError),
}

/// Chunks of `tree` under `cfg`. Labels come from `labels` when given and
/// are otherwise left as none.
pub fn featurize_tree(
    page_id: &str,
    tree: &DomTree,
    labels: Option<&MappedPage>,
    cfg: &PipelineConfig,
) -> Result<Vec<Chunk>, FeaturizeError> {
    let tok = ByteTokenizer;
    match cfg.scheme {
        Scheme::Tuples => {
            let anns = labels.map(|p| p.record.annotations.as_slice()).unwrap_or(&[]);
            chunk(page_id, &node_tuples(tree, anns), &tok, &TagVocab::default_tags(), &cfg.chunking)
        }
        Scheme::Subtrees => {
            let node = match labels {
                Some(p) => node_labels(tree, &p.record.annotations),
                None => vec![None; tree.len()],
            };
            Ok(split_subtrees(page_id, tree, &tok, &cfg.chunking)?.to_chunks(&node, &cfg.chunking))
        }
    }
}

/// Node predictions for one page from a token classifier. A page without
/// text yields no predictions.
pub fn predict_nodes(
    classifier: &dyn TokenClassifier<f64>,
    page_id: &str,
    tree: &DomTree,
    cfg: &PipelineConfig,
) -> Result<Vec<NodePrediction<f64>>, PipelineError> {
    let chunks = match featurize_tree(page_id, tree, None, cfg) {
        Ok(c) => c,
        Err(FeaturizeError::EmptyPage(_)) => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let preds = classifier.predict_page(&PageInput { page_id, tree, chunks: &chunks })?;
    Ok(aggregate(&preds, cfg.strategy)?)
}

/// Rule-based article for one tree.
pub fn extract_heuristic(tree: &DomTree, url: &str) -> Article {
    page_assemble(&from_labels::<f64>(&heuristic_extract(tree)), tree, url)
}

/// Article for one tree through a token classifier.
pub fn extract_with(
    classifier: &dyn TokenClassifier<f64>,
    tree: &DomTree,
    url: &str,
    cfg: &PipelineConfig,
) -> Result<Article, PipelineError> {
    Ok(page_assemble(&predict_nodes(classifier, url, tree, cfg)?, tree, url))
}

/// Trains a softmax classifier on labeled pages. Pages without text are
/// skipped.
pub fn train_softmax(pages: &[&MappedPage], cfg: &PipelineConfig) -> Result<SoftmaxClassifier<f64>, PipelineError> {
    let mut chunks = Vec::with_capacity(pages.len());
    for p in pages {
        match featurize_tree(p.page_id(), &p.tree, Some(p), cfg) {
            Ok(c) => chunks.push((p, c)),
            Err(FeaturizeError::EmptyPage(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let inputs: Vec<PageInput<'_>> = chunks
        .iter()
        .map(|(p, c)| PageInput {
            page_id: p.page_id(),
            tree: &p.tree,
            chunks: c,
        })
        .collect();
    let extractor = FeatureExtractor::new(TagVocab::default_tags());
    Ok(SoftmaxClassifier::train(extractor, &inputs, &cfg.train)?.0)
}

/// The rule cascade; training pages are ignored.
#[derive(Clone, Copy, Debug, Default)]
pub struct HeuristicMethod;

impl PageExtractor for HeuristicMethod {
    fn extract(&self, page: &MappedPage) -> Result<Article, String> {
        Ok(extract_heuristic(&page.tree, page.page_id()))
    }
}

impl ExtractionMethod for HeuristicMethod {
    fn name(&self) -> String {
        "heuristic".into()
    }

    fn fit(&self, _: &[&MappedPage]) -> Result<Box<dyn PageExtractor>, String> {
        Ok(Box::new(HeuristicMethod))
    }
}

/// A fixed token classifier, e.g. a checkpoint or external predictions.
#[derive(Clone)]
pub struct ClassifierMethod {
    pub classifier: Arc<dyn TokenClassifier<f64>>,
    pub config: PipelineConfig,
}

impl PageExtractor for ClassifierMethod {
    fn extract(&self, page: &MappedPage) -> Result<Article, String> {
        extract_with(self.classifier.as_ref(), &page.tree, page.page_id(), &self.config).map_err(|e| e.to_string())
    }
}

impl ExtractionMethod for ClassifierMethod {
    fn name(&self) -> String {
        format!("{}/{}", self.classifier.name(), self.config.strategy)
    }

    fn fit(&self, _: &[&MappedPage]) -> Result<Box<dyn PageExtractor>, String> {
        Ok(Box::new(self.clone()))
    }
}

/// A softmax classifier trained afresh on each fold's training pages.
#[derive(Clone, Debug, Default)]
pub struct SoftmaxMethod {
    pub config: PipelineConfig,
}

impl ExtractionMethod for SoftmaxMethod {
    fn name(&self) -> String {
        format!("softmax/{}", self.config.strategy)
    }

    fn fit(&self, train: &[&MappedPage]) -> Result<Box<dyn PageExtractor>, String> {
        let model = train_softmax(train, &self.config).map_err(|e| e.to_string())?;
        Ok(Box::new(ClassifierMethod {
            classifier: Arc::new(model),
            config: self.config.clone(),
        }))
    }
}

/// Previously extracted articles looked up by URL.
#[derive(Clone, Debug, Default)]
pub struct ArticleLookup {
    pub name: String,
    pub articles: HashMap<String, Article>,
}

impl PageExtractor for ArticleLookup {
    fn extract(&self, page: &MappedPage) -> Result<Article, String> {
        self.articles
            .get(page.page_id())
            .cloned()
            .ok_or_else(|| format!("no article for {}", page.page_id()))
    }
}

impl ExtractionMethod for ArticleLookup {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn fit(&self, _: &[&MappedPage]) -> Result<Box<dyn PageExtractor>, String> {
        Ok(Box::new(self.clone()))
    }
}

/// Runs `inner` on English translations of every page. Node ids survive
/// translation, so predictions made on the translated tree are assembled
/// from the original page text.
pub struct TranslatedMethod<M> {
    pub inner: M,
    pub backend: Arc<dyn TranslationBackend>,
}

/// `page` with its tree translated; annotations stay as they are.
pub fn translate_page(page: &MappedPage, backend: &dyn TranslationBackend) -> (MappedPage, usize) {
    let t = translate_tree(&page.tree, &page.record.language, backend);
    (
        MappedPage {
            record: page.record.clone(),
            tree: t.tree,
        },
        t.warnings,
    )
}

struct TranslatedExtractor {
    inner: Box<dyn PageExtractor>,
    backend: Arc<dyn TranslationBackend>,
}

impl PageExtractor for TranslatedExtractor {
    fn extract(&self, page: &MappedPage) -> Result<Article, String> {
        let (translated, warnings) = translate_page(page, self.backend.as_ref());
        if warnings > 0 {
            log::warn!("{}: {warnings} nodes kept their original text", page.page_id());
        }
        let labeled = self.inner.extract(&translated)?;
        Ok(relabel(&labeled, &translated.tree, &page.tree))
    }
}

/// Re-reads every extracted value from the original tree by locating the
/// translated node that produced it.
fn relabel(article: &Article, translated: &DomTree, original: &DomTree) -> Article {
    if translated == original {
        return article.clone();
    }
    let back = |v: &String| -> String {
        translated
            .ids()
            .find(|&id| translated.value_text(id) == *v)
            .map(|id| original.value_text(id))
            .unwrap_or_else(|| v.clone())
    };
    let back_text = |v: &String| -> String {
        v.split('\n').map(|line| back(&line.to_string())).collect::<Vec<_>>().join("\n")
    };
    Article {
        url: article.url.clone(),
        title: article.title.as_ref().map(back),
        date: article.date.clone(),
        text: article.text.as_ref().map(back_text),
        authors: article.authors.iter().map(back).collect(),
        tags: article.tags.iter().map(back).collect(),
    }
}

impl<M: ExtractionMethod> ExtractionMethod for TranslatedMethod<M> {
    fn name(&self) -> String {
        format!("{}-en({})", self.inner.name(), self.backend.name())
    }

    fn fit(&self, train: &[&MappedPage]) -> Result<Box<dyn PageExtractor>, String> {
        let translated: Vec<MappedPage> = train.iter().map(|p| translate_page(p, self.backend.as_ref()).0).collect();
        let refs: Vec<&MappedPage> = translated.iter().collect();
        Ok(Box::new(TranslatedExtractor {
            inner: self.inner.fit(&refs)?,
            backend: self.backend.clone(),
        }))
    }
}
