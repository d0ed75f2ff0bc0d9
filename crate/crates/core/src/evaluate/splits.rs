use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvaluateError;

/// Site-level partition into `k` folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub k: usize,
    pub seed: u64,
    /// Sorted site ids per fold.
    pub folds: Vec<Vec<String>>,
}

impl SplitPlan {
    pub fn fold_of(&self, site: &str) -> Option<usize> {
        self.folds.iter().position(|f| f.iter().any(|s| s == site))
    }
}

/// Sorts and deduplicates `sites`, shuffles them with a seeded generator and
/// deals them round-robin.
pub fn make_splits(sites: &[String], k: usize, seed: u64) -> Result<SplitPlan, EvaluateError> {
    let mut sites: Vec<String> = sites.to_vec();
    sites.sort();
    sites.dedup();
    if k == 0 || k > sites.len() {
        return Err(EvaluateError::TooFewSites { k, sites: sites.len() });
    }
    sites.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (i, s) in sites.into_iter().enumerate() {
        folds[i % k].push(s);
    }
    folds.iter_mut().for_each(|f| f.sort());
    Ok(SplitPlan { k, seed, folds })
}
