//! Run configuration: command-line flags over an optional JSON file over
//! built-in defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use newsgrid::aggregate::AggregationStrategy;
use newsgrid::classify::TrainConfig;
use newsgrid::evaluate::Design;
use newsgrid::featurize::{ChunkingConfig, LabelingScheme};
use newsgrid::pipeline::{PipelineConfig, Scheme};

use crate::CliError;

/// Extraction method as written on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MethodSpec {
    Heuristic,
    /// Trained per fold during cross-validation.
    Softmax,
    Checkpoint(PathBuf),
    External(PathBuf),
    Articles(PathBuf),
}

impl FromStr for MethodSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("heuristic", None) => Ok(MethodSpec::Heuristic),
            ("softmax", None) => Ok(MethodSpec::Softmax),
            ("softmax", Some(p)) if !p.is_empty() => Ok(MethodSpec::Checkpoint(p.into())),
            ("external", Some(p)) if !p.is_empty() => Ok(MethodSpec::External(p.into())),
            ("articles", Some(p)) if !p.is_empty() => Ok(MethodSpec::Articles(p.into())),
            _ => Err(format!(
                "unknown method {s:?}; expected heuristic, softmax, softmax:<checkpoint>, external:<dir> or articles:<dir>"
            )),
        }
    }
}

/// Translation backend as written on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TranslatorSpec {
    Identity,
    Glossary(PathBuf),
    Remote(String),
}

impl FromStr for TranslatorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "identity" => Ok(TranslatorSpec::Identity),
            Some(("glossary", p)) if !p.is_empty() => Ok(TranslatorSpec::Glossary(p.into())),
            Some(("remote", u)) if !u.is_empty() => Ok(TranslatorSpec::Remote(u.into())),
            _ => Err(format!("unknown translator {s:?}; expected identity, glossary:<file> or remote:<url>")),
        }
    }
}

/// The JSON config file. Every field is optional; unknown keys are errors.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub chunking: Option<ChunkingConfig>,
    pub scheme: Option<Scheme>,
    pub strategy: Option<AggregationStrategy>,
    pub design: Option<Design>,
    pub method: Option<String>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub threads: Option<usize>,
    pub languages: Option<Vec<String>>,
    pub train: Option<TrainConfig>,
    pub translator: Option<String>,
    /// Run the method on English translations of every page.
    pub translate: Option<bool>,
    pub translate_batch: Option<usize>,
    pub min_text_chars: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&raw);
        serde_path_to_error::deserialize(de)
            .map_err(|e| CliError::Usage(format!("{}: `{}`: {}", path.display(), e.path(), e.inner())))
    }
}

/// Flags shared by the commands; `None` means not given.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub dataset: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub scheme: Option<Scheme>,
    pub strategy: Option<AggregationStrategy>,
    pub design: Option<Design>,
    pub method: Option<String>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub threads: Option<usize>,
    pub languages: Vec<String>,
    pub max_seq_length: Option<usize>,
    pub doc_stride: Option<usize>,
    pub labeling: Option<LabelingScheme>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub train_seed: Option<u64>,
    pub translator: Option<String>,
    pub translate: bool,
    pub translate_batch: Option<usize>,
    pub min_text_chars: Option<usize>,
}

/// Fully resolved and validated settings.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub pipeline: PipelineConfig,
    pub design: Design,
    pub method: MethodSpec,
    pub seed: u64,
    pub k: usize,
    pub threads: Option<usize>,
    pub languages: Vec<String>,
    pub translator: TranslatorSpec,
    pub translate: bool,
    pub translate_batch: usize,
    pub min_text_chars: usize,
}

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: Overrides) -> Result<Self, CliError> {
        let usage = CliError::Usage;
        let mut chunking = file.chunking.unwrap_or_default();
        if let Some(v) = flags.max_seq_length {
            chunking.max_seq_length = v;
        }
        if let Some(v) = flags.doc_stride {
            chunking.doc_stride = v;
        }
        if let Some(v) = flags.labeling {
            chunking.labeling_scheme = v;
        }
        chunking.validate().map_err(|e| usage(e.to_string()))?;

        let mut train = file.train.unwrap_or_default();
        if let Some(v) = flags.epochs {
            train.epochs = v;
        }
        if let Some(v) = flags.learning_rate {
            train.learning_rate = v;
        }
        if let Some(v) = flags.batch_size {
            train.batch_size = v;
        }
        if let Some(v) = flags.train_seed {
            train.seed = v;
        }
        train.validate().map_err(|e| usage(e.to_string()))?;

        let method = flags.method.or(file.method).unwrap_or_else(|| "heuristic".into());
        let method: MethodSpec = method.parse().map_err(usage)?;
        let translator = flags.translator.or(file.translator).unwrap_or_else(|| "identity".into());
        let translator: TranslatorSpec = translator.parse().map_err(usage)?;
        let k = flags.k.or(file.k).unwrap_or(5);
        if k == 0 {
            return Err(usage("k must be positive".into()));
        }
        let threads = flags.threads.or(file.threads);
        if threads == Some(0) {
            return Err(usage("threads must be positive".into()));
        }
        let translate_batch = flags.translate_batch.or(file.translate_batch).unwrap_or(64);
        if translate_batch == 0 {
            return Err(usage("translate batch size must be positive".into()));
        }
        let languages = if flags.languages.is_empty() {
            file.languages.unwrap_or_default()
        } else {
            flags.languages
        };
        Ok(RunConfig {
            dataset: flags.dataset.or(file.dataset),
            output: flags.output.or(file.output),
            pipeline: PipelineConfig {
                scheme: flags.scheme.or(file.scheme).unwrap_or_default(),
                chunking,
                strategy: flags.strategy.or(file.strategy).unwrap_or_default(),
                train,
            },
            design: flags.design.or(file.design).unwrap_or(Design::Mixed),
            method,
            seed: flags.seed.or(file.seed).unwrap_or(42),
            k,
            threads,
            languages: languages.into_iter().map(|l| l.to_ascii_lowercase()).collect(),
            translator,
            translate: flags.translate || file.translate.unwrap_or(false),
            translate_batch,
            min_text_chars: flags.min_text_chars.or(file.min_text_chars).unwrap_or(100),
        })
    }

    pub fn dataset(&self) -> Result<&Path, CliError> {
        self.dataset
            .as_deref()
            .ok_or_else(|| CliError::Usage("no dataset given; pass --dataset or set it in the config".into()))
    }

    pub fn output(&self) -> Result<&Path, CliError> {
        self.output
            .as_deref()
            .ok_or_else(|| CliError::Usage("no output given; pass --out or set it in the config".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beats_defaults() {
        let file: FileConfig = serde_json::from_str(r#"{"k": 3, "seed": 9, "strategy": "AVG"}"#).unwrap();
        let flags = Overrides {
            k: Some(4),
            ..Overrides::default()
        };
        let cfg = RunConfig::resolve(file, flags).unwrap();
        assert_eq!(cfg.k, 4);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.pipeline.strategy, AggregationStrategy::Avg);
        assert_eq!(cfg.method, MethodSpec::Heuristic);
        assert_eq!(cfg.pipeline.chunking, ChunkingConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"folds": 3}"#).is_err());
        assert!(serde_json::from_str::<FileConfig>(r#"{"chunking": {"stride": 3}}"#).is_err());
    }

    #[test]
    fn invalid_values_fail_before_work() {
        let bad = |flags: Overrides| RunConfig::resolve(FileConfig::default(), flags).is_err();
        assert!(bad(Overrides { doc_stride: Some(0), ..Default::default() }));
        assert!(bad(Overrides { method: Some("bert".into()), ..Default::default() }));
        assert!(bad(Overrides { k: Some(0), ..Default::default() }));
        assert!(bad(Overrides { translator: Some("argos".into()), ..Default::default() }));
    }

    #[test]
    fn method_specs() {
        assert_eq!("softmax:m.json".parse::<MethodSpec>().unwrap(), MethodSpec::Checkpoint("m.json".into()));
        assert_eq!("external:preds".parse::<MethodSpec>().unwrap(), MethodSpec::External("preds".into()));
        assert!("external".parse::<MethodSpec>().is_err());
    }
}
