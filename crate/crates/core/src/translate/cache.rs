use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{TranslateError, TranslationBackend};

#[derive(Serialize, Deserialize)]
struct Entry {
    key_hash: String,
    source: String,
    text: String,
}

fn key_hash(backend: &str, lang: &str, text: &str) -> String {
    let mut h = Sha256::new();
    for part in [backend, lang, text] {
        h.update(part.as_bytes());
        h.update([0]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Memoizes another backend in an append-only JSON-lines file keyed by
/// (backend, source language, text). Unreadable lines are skipped.
pub struct CachedBackend<B> {
    inner: B,
    path: PathBuf,
    entries: Mutex<HashMap<String, String>>,
}

impl<B: TranslationBackend> CachedBackend<B> {
    pub fn open(inner: B, path: &Path) -> Result<Self, TranslateError> {
        let io = |source| TranslateError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut entries = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(path).map_err(io)?).lines() {
                let line = line.map_err(io)?;
                match serde_json::from_str::<Entry>(&line) {
                    Ok(e) => {
                        entries.insert(e.key_hash, e.text);
                    }
                    Err(e) if !line.trim().is_empty() => log::warn!("{}: skipping cache line: {e}", path.display()),
                    Err(_) => {}
                }
            }
        }
        Ok(CachedBackend {
            inner,
            path: path.to_path_buf(),
            entries: Mutex::new(entries),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<B: TranslationBackend> TranslationBackend for CachedBackend<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn translate(&self, source_lang: &str, texts: &[String]) -> Result<Vec<String>, TranslateError> {
        let keys: Vec<String> = texts.iter().map(|t| key_hash(self.inner.name(), source_lang, t)).collect();
        let mut out: Vec<Option<String>> = {
            let entries = self.entries.lock().unwrap();
            keys.iter().map(|k| entries.get(k).cloned()).collect()
        };
        let missing: Vec<usize> = (0..texts.len()).filter(|&i| out[i].is_none()).collect();
        if !missing.is_empty() {
            let batch: Vec<String> = missing.iter().map(|&i| texts[i].clone()).collect();
            let fresh = self.inner.translate(source_lang, &batch)?;
            if fresh.len() != batch.len() {
                return Err(TranslateError::LengthMismatch {
                    expected: batch.len(),
                    got: fresh.len(),
                });
            }
            let mut entries = self.entries.lock().unwrap();
            let io = |source| TranslateError::Io {
                path: self.path.display().to_string(),
                source,
            };
            let mut file = OpenOptions::new().create(true).append(true).open(&self.path).map_err(io)?;
            let mut buf = String::new();
            for (&i, text) in missing.iter().zip(fresh) {
                if !entries.contains_key(&keys[i]) {
                    let line = Entry {
                        key_hash: keys[i].clone(),
                        source: texts[i].clone(),
                        text: text.clone(),
                    };
                    buf.push_str(&serde_json::to_string(&line).expect("entry serializes"));
                    buf.push('\n');
                    entries.insert(keys[i].clone(), text.clone());
                }
                out[i] = Some(text);
            }
            file.write_all(buf.as_bytes()).map_err(io)?;
        }
        Ok(out.into_iter().map(|t| t.expect("filled")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting(AtomicUsize);

    impl TranslationBackend for Counting {
        fn name(&self) -> &str {
            "counting"
        }
        fn translate(&self, _: &str, texts: &[String]) -> Result<Vec<String>, TranslateError> {
            self.0.fetch_add(texts.len(), Ordering::SeqCst);
            Ok(texts.iter().map(|t| format!("<{t}>")).collect())
        }
    }

    #[test]
    fn second_run_hits_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let texts = vec!["a".to_string(), "b".to_string(), "a".to_string()];
        let c = CachedBackend::open(Counting(AtomicUsize::new(0)), &path).unwrap();
        assert_eq!(c.translate("ru", &texts).unwrap(), ["<a>", "<b>", "<a>"]);
        assert_eq!(c.inner.0.load(Ordering::SeqCst), 3);
        assert_eq!(c.len(), 2);

        let again = CachedBackend::open(Counting(AtomicUsize::new(0)), &path).unwrap();
        assert_eq!(again.translate("ru", &texts).unwrap(), ["<a>", "<b>", "<a>"]);
        assert_eq!(again.inner.0.load(Ordering::SeqCst), 0);
        // A different source language is a different key.
        again.translate("zh", &texts[..1]).unwrap();
        assert_eq!(again.inner.0.load(Ordering::SeqCst), 1);

        let lines = std::fs::read_to_string(&path).unwrap();
        let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
        assert_eq!(first["source"], "a");
        assert_eq!(first["text"], "<a>");
        assert_eq!(first["key_hash"].as_str().unwrap().len(), 64);
    }
}
