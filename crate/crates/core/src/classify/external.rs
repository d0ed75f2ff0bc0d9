use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::scalar::Real;

use super::{ClassifyError, PageInput, TokenClassifier, TokenPrediction};

pub fn write_predictions<T: Real + serde::Serialize, W: Write>(
    mut out: W,
    preds: &[TokenPrediction<T>],
) -> std::io::Result<()> {
    for p in preds {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Parses line-delimited predictions, rejecting invalid distributions.
pub fn read_predictions<T, R>(input: R, source_name: &str) -> Result<Vec<TokenPrediction<T>>, ClassifyError>
where
    T: Real + serde::de::DeserializeOwned,
    R: BufRead,
{
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let malformed = |message: String| ClassifyError::Malformed {
            source_name: source_name.to_string(),
            line: i + 1,
            message,
        };
        let line = line.map_err(|e| malformed(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let p: TokenPrediction<T> = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if !p.is_valid() {
            return Err(malformed("probabilities must be non-negative and sum to 1".into()));
        }
        out.push(p);
    }
    Ok(out)
}

/// Predictions produced outside this crate, grouped by page id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExternalPredictions<T> {
    pub pages: BTreeMap<String, Vec<TokenPrediction<T>>>,
}

impl<T: Real + serde::de::DeserializeOwned> ExternalPredictions<T> {
    pub fn from_predictions(preds: Vec<TokenPrediction<T>>) -> Self {
        let mut pages: BTreeMap<String, Vec<TokenPrediction<T>>> = BTreeMap::new();
        for p in preds {
            pages.entry(p.page_id.clone()).or_default().push(p);
        }
        ExternalPredictions { pages }
    }

    /// Reads every `*.jsonl` file in `dir`, in name order.
    pub fn load_dir(dir: &Path) -> Result<Self, ClassifyError> {
        let io = |source| ClassifyError::Io {
            path: dir.to_path_buf(),
            source,
        };
        let mut files: Vec<_> = fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
            .collect();
        files.sort();
        let mut all = Vec::new();
        for f in files {
            let file = fs::File::open(&f).map_err(|source| ClassifyError::Io {
                path: f.clone(),
                source,
            })?;
            all.extend(read_predictions(BufReader::new(file), &f.display().to_string())?);
        }
        Ok(Self::from_predictions(all))
    }
}

impl<T: Real + serde::de::DeserializeOwned> TokenClassifier<T> for ExternalPredictions<T> {
    fn name(&self) -> String {
        "external".into()
    }

    fn predict_page(&self, page: &PageInput<'_>) -> Result<Vec<TokenPrediction<T>>, ClassifyError> {
        self.pages
            .get(page.page_id)
            .cloned()
            .ok_or_else(|| ClassifyError::MissingPage(page.page_id.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_grouping() {
        let raw = "{\"page_id\":\"b\",\"node_id\":1,\"offset\":0,\"probs\":[1,0,0,0,0,0]}\n\n\
                   {\"page_id\":\"a\",\"node_id\":2,\"offset\":4,\"role\":\"bos\",\"probs\":[0.5,0.5,0,0,0,0]}\n";
        let preds: Vec<TokenPrediction<f64>> = read_predictions(raw.as_bytes(), "mem").unwrap();
        let mut buf = Vec::new();
        write_predictions(&mut buf, &preds).unwrap();
        let again: Vec<TokenPrediction<f64>> = read_predictions(buf.as_slice(), "mem").unwrap();
        assert_eq!(again, preds);
        let ext = ExternalPredictions::from_predictions(preds);
        assert_eq!(ext.pages.keys().collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn bad_distribution_names_the_line() {
        let raw = "{\"page_id\":\"b\",\"node_id\":1,\"offset\":0,\"probs\":[0.9,0,0,0,0,0]}";
        match read_predictions::<f64, _>(raw.as_bytes(), "x.jsonl") {
            Err(ClassifyError::Malformed { line: 1, source_name, .. }) => assert_eq!(source_name, "x.jsonl"),
            other => panic!("{other:?}"),
        }
    }
}
