use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::featurize::TagVocab;
use crate::scalar::Real;

use super::{ClassProbs, ClassifyError, FeatureExtractor, PageInput, TokenClassifier, TokenPrediction, NUM_CLASSES};
use super::ChunkPos;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Per-class loss weights in class order; unweighted when absent.
    pub class_weights: Option<Vec<f64>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 30,
            batch_size: 32,
            seed: 7,
            class_weights: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        let bad = |m: &str| Err(ClassifyError::InvalidConfig(m.to_string()));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if let Some(w) = &self.class_weights {
            if w.len() != NUM_CLASSES || w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return bad("class_weights needs six positive values");
            }
        }
        Ok(())
    }
}

/// One labeled token; `key` is `(page_id, offset)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Example<T> {
    pub key: (String, usize),
    pub x: Vec<T>,
    pub y: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub examples: usize,
    /// Training-set loss after each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Multinomial logistic regression, weights row-major `classes × dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SoftmaxModel<T> {
    pub dim: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Real> SoftmaxModel<T> {
    pub fn zeros(dim: usize) -> Self {
        SoftmaxModel {
            dim,
            weights: vec![T::zero(); NUM_CLASSES * dim],
            bias: vec![T::zero(); NUM_CLASSES],
        }
    }

    pub fn logits(&self, x: &[T]) -> Result<ClassProbs<T>, ClassifyError> {
        if x.len() != self.dim {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut z = [T::zero(); NUM_CLASSES];
        for (c, zc) in z.iter_mut().enumerate() {
            let row = &self.weights[c * self.dim..(c + 1) * self.dim];
            *zc = row.iter().zip(x).fold(self.bias[c], |acc, (w, v)| acc + *w * *v);
        }
        Ok(z)
    }

    pub fn probs(&self, x: &[T]) -> Result<ClassProbs<T>, ClassifyError> {
        Ok(softmax(self.logits(x)?))
    }

    fn weight_of(y: usize, class_weights: Option<&[f64]>) -> T {
        class_weights.map_or(T::one(), |w| T::of(w[y]))
    }

    /// Weighted mean cross-entropy.
    pub fn loss(&self, examples: &[Example<T>], class_weights: Option<&[f64]>) -> Result<T, ClassifyError> {
        let mut total = T::zero();
        let mut norm = T::zero();
        for e in examples {
            let p = self.probs(&e.x)?;
            let w = Self::weight_of(e.y, class_weights);
            total = total - w * p[e.y].max(T::min_positive_value()).ln();
            norm = norm + w;
        }
        Ok(if norm > T::zero() { total / norm } else { T::zero() })
    }

    /// Gradient of [`Self::loss`] with respect to `(weights, bias)`.
    pub fn gradient(
        &self,
        examples: &[&Example<T>],
        class_weights: Option<&[f64]>,
    ) -> Result<(Vec<T>, Vec<T>), ClassifyError> {
        let mut gw = vec![T::zero(); self.weights.len()];
        let mut gb = vec![T::zero(); NUM_CLASSES];
        let mut norm = T::zero();
        for e in examples {
            let p = self.probs(&e.x)?;
            let w = Self::weight_of(e.y, class_weights);
            norm = norm + w;
            for c in 0..NUM_CLASSES {
                let delta = w * (p[c] - if c == e.y { T::one() } else { T::zero() });
                gb[c] = gb[c] + delta;
                let row = &mut gw[c * self.dim..(c + 1) * self.dim];
                for (g, v) in row.iter_mut().zip(&e.x) {
                    *g = *g + delta * *v;
                }
            }
        }
        if norm > T::zero() {
            gw.iter_mut().chain(gb.iter_mut()).for_each(|g| *g = *g / norm);
        }
        Ok((gw, gb))
    }

    /// Weights then bias, flattened.
    pub fn params(&self) -> Vec<T> {
        self.weights.iter().chain(&self.bias).copied().collect()
    }

    pub fn set_params(&mut self, params: &[T]) {
        let (w, b) = params.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias.copy_from_slice(b);
    }

    /// Seeded mini-batch gradient descent. Examples are deduplicated by key
    /// and put in key order before the per-epoch shuffle, so the result does
    /// not depend on input order.
    pub fn train(&mut self, examples: Vec<Example<T>>, cfg: &TrainConfig) -> Result<TrainReport, ClassifyError> {
        cfg.validate()?;
        let mut examples = examples;
        examples.sort_by(|a, b| a.key.cmp(&b.key));
        examples.dedup_by(|a, b| a.key == b.key);
        if examples.is_empty() {
            return Err(ClassifyError::NoLabeledTokens);
        }
        if let Some(e) = examples.iter().find(|e| e.x.len() != self.dim) {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.dim,
                got: e.x.len(),
            });
        }
        let weights = cfg.class_weights.as_deref();
        let lr = T::of(cfg.learning_rate);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut order: Vec<usize> = (0..examples.len()).collect();
        let mut losses = Vec::with_capacity(cfg.epochs);
        for _ in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(cfg.batch_size) {
                let refs: Vec<&Example<T>> = batch.iter().map(|&i| &examples[i]).collect();
                let (gw, gb) = self.gradient(&refs, weights)?;
                for (w, g) in self.weights.iter_mut().zip(gw) {
                    *w = *w - lr * g;
                }
                for (b, g) in self.bias.iter_mut().zip(gb) {
                    *b = *b - lr * g;
                }
            }
            losses.push(self.loss(&examples, weights)?.as_f64());
        }
        Ok(TrainReport {
            examples: examples.len(),
            epoch_losses: losses,
        })
    }
}

/// Numerically stable softmax.
pub fn softmax<T: Real>(z: ClassProbs<T>) -> ClassProbs<T> {
    let m = z.iter().copied().fold(T::neg_infinity(), T::max);
    let mut e = z.map(|v| (v - m).exp());
    let s = e.iter().fold(T::zero(), |a, b| a + *b);
    e.iter_mut().for_each(|v| *v = *v / s);
    e
}

/// Labeled tokens of every chunk; labels outside the class range are
/// skipped.
pub fn examples_from<T: Real>(extractor: &FeatureExtractor, pages: &[PageInput<'_>]) -> Vec<Example<T>> {
    let mut out = Vec::new();
    for page in pages {
        let stats = extractor.page_stats(page.tree);
        for chunk in page.chunks {
            let labeled = |i: usize| (0..NUM_CLASSES as i64).contains(&chunk.labels[i]);
            for (i, x) in extractor.chunk_features::<T>(&stats, chunk, labeled) {
                out.push(Example {
                    key: (page.page_id.to_string(), chunk.offsets[i]),
                    x,
                    y: chunk.labels[i] as usize,
                });
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    format: String,
    classes: usize,
    features: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    seed: u64,
    feature_hash: String,
    tags: Vec<String>,
    config: TrainConfig,
}

const CHECKPOINT_FORMAT: &str = "newsgrid-softmax-1";

/// A trained model bundled with its feature layout.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftmaxClassifier<T> {
    pub model: SoftmaxModel<T>,
    pub extractor: FeatureExtractor,
    pub config: TrainConfig,
}

impl<T: Real> SoftmaxClassifier<T> {
    pub fn untrained(extractor: FeatureExtractor) -> Self {
        SoftmaxClassifier {
            model: SoftmaxModel::zeros(extractor.dim()),
            extractor,
            config: TrainConfig::default(),
        }
    }

    pub fn train(
        extractor: FeatureExtractor,
        pages: &[PageInput<'_>],
        cfg: &TrainConfig,
    ) -> Result<(Self, TrainReport), ClassifyError> {
        let mut model = SoftmaxModel::zeros(extractor.dim());
        let report = model.train(examples_from(&extractor, pages), cfg)?;
        Ok((
            SoftmaxClassifier {
                model,
                extractor,
                config: cfg.clone(),
            },
            report,
        ))
    }

    pub fn to_json(&self) -> String {
        let ck = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            classes: NUM_CLASSES,
            features: self.model.dim,
            weights: self.model.weights.iter().map(|w| w.as_f64()).collect(),
            bias: self.model.bias.iter().map(|b| b.as_f64()).collect(),
            seed: self.config.seed,
            feature_hash: self.extractor.schema_hash(),
            tags: self.extractor.vocab.tags.clone(),
            config: self.config.clone(),
        };
        serde_json::to_string_pretty(&ck).expect("checkpoint serializes")
    }

    pub fn from_json(raw: &str, source_name: &str) -> Result<Self, ClassifyError> {
        let ck: Checkpoint = serde_json::from_str(raw).map_err(|e| ClassifyError::Malformed {
            source_name: source_name.to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let malformed = |message: &str| ClassifyError::Malformed {
            source_name: source_name.to_string(),
            line: 0,
            message: message.to_string(),
        };
        if ck.format != CHECKPOINT_FORMAT || ck.classes != NUM_CLASSES {
            return Err(malformed("unsupported checkpoint format"));
        }
        let extractor = FeatureExtractor::new(TagVocab::new(ck.tags));
        if extractor.schema_hash() != ck.feature_hash {
            return Err(ClassifyError::SchemaMismatch {
                expected: ck.feature_hash,
                got: extractor.schema_hash(),
            });
        }
        if ck.features != extractor.dim() || ck.weights.len() != NUM_CLASSES * ck.features {
            return Err(ClassifyError::DimensionMismatch {
                expected: extractor.dim(),
                got: ck.features,
            });
        }
        if ck.bias.len() != NUM_CLASSES || ck.weights.iter().chain(&ck.bias).any(|w| !w.is_finite()) {
            return Err(malformed("bias must hold six finite values"));
        }
        Ok(SoftmaxClassifier {
            model: SoftmaxModel {
                dim: ck.features,
                weights: ck.weights.into_iter().map(T::of).collect(),
                bias: ck.bias.into_iter().map(T::of).collect(),
            },
            extractor,
            config: ck.config,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ClassifyError> {
        let raw = std::fs::read_to_string(path).map_err(|source| ClassifyError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&raw, &path.display().to_string())
    }
}

impl<T: Real> TokenClassifier<T> for SoftmaxClassifier<T> {
    fn name(&self) -> String {
        "softmax".into()
    }

    fn predict_page(&self, page: &PageInput<'_>) -> Result<Vec<TokenPrediction<T>>, ClassifyError> {
        if self.model.dim != self.extractor.dim() {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.model.dim,
                got: self.extractor.dim(),
            });
        }
        let stats = self.extractor.page_stats(page.tree);
        let mut out = Vec::new();
        for chunk in page.chunks {
            for (i, x) in self.extractor.chunk_features::<T>(&stats, chunk, |i| chunk.is_predicted(i)) {
                out.push(TokenPrediction {
                    page_id: page.page_id.to_string(),
                    node_id: chunk.node_ids[i],
                    offset: chunk.offsets[i],
                    role: chunk.roles[i],
                    probs: self.model.probs(&x)?,
                    chunk: Some(ChunkPos {
                        start: chunk.chunk_start,
                        index: i,
                        len: chunk.len(),
                    }),
                });
            }
        }
        Ok(out)
    }
}
