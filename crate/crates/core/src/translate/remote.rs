use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{TranslateError, TranslationBackend};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RemoteConfig {
    pub batch_size: usize,
    pub attempts: u32,
    /// Delay before the second attempt; doubles afterwards.
    pub backoff_ms: u64,
    pub timeout_ms: u64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            batch_size: 64,
            attempts: 3,
            backoff_ms: 500,
            timeout_ms: 30_000,
        }
    }
}

#[derive(Serialize)]
struct Request<'a> {
    source_lang: &'a str,
    texts: &'a [String],
}

#[derive(Deserialize)]
struct Response {
    texts: Vec<String>,
}

/// HTTP client for a JSON translation service. Each batch is one POST of
/// `{"source_lang", "texts"}` answered by `{"texts"}`.
pub struct RemoteBackend {
    endpoint: String,
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemoteBackend {
    pub fn new(endpoint: impl Into<String>, config: RemoteConfig) -> Result<Self, TranslateError> {
        let endpoint = endpoint.into();
        url::Url::parse(&endpoint).map_err(|e| TranslateError::Config {
            path: endpoint.clone(),
            message: e.to_string(),
        })?;
        if config.batch_size == 0 || config.attempts == 0 {
            return Err(TranslateError::Config {
                path: endpoint,
                message: "batch_size and attempts must be positive".into(),
            });
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
            .build()
            .into();
        Ok(RemoteBackend { endpoint, config, agent })
    }

    fn post(&self, source_lang: &str, texts: &[String]) -> Result<Vec<String>, String> {
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .send_json(Request { source_lang, texts })
            .map_err(|e| e.to_string())?;
        let body: Response = resp.body_mut().read_json().map_err(|e| e.to_string())?;
        if body.texts.len() != texts.len() {
            return Err(format!("expected {} texts, got {}", texts.len(), body.texts.len()));
        }
        Ok(body.texts)
    }

    fn batch(&self, source_lang: &str, texts: &[String]) -> Result<Vec<String>, TranslateError> {
        let mut delay = Duration::from_millis(self.config.backoff_ms);
        let mut last = String::new();
        for attempt in 0..self.config.attempts {
            if attempt > 0 {
                std::thread::sleep(delay);
                delay *= 2;
            }
            match self.post(source_lang, texts) {
                Ok(t) => return Ok(t),
                Err(e) => {
                    log::debug!("{} attempt {}: {e}", self.endpoint, attempt + 1);
                    last = e;
                }
            }
        }
        Err(TranslateError::BackendUnavailable(format!(
            "{} after {} attempts: {last}",
            self.endpoint, self.config.attempts
        )))
    }
}

impl TranslationBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn translate(&self, source_lang: &str, texts: &[String]) -> Result<Vec<String>, TranslateError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.config.batch_size) {
            out.extend(self.batch(source_lang, chunk)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::{Arc, Mutex};

    /// Serves canned status codes; 200 answers upper-case the texts.
    /// Returns the endpoint and the received request bodies.
    pub(crate) fn serve(statuses: Vec<u16>) -> (String, Arc<Mutex<Vec<serde_json::Value>>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = seen.clone();
        std::thread::spawn(move || {
            for status in statuses {
                let Ok((stream, _)) = listener.accept() else { return };
                let mut reader = BufReader::new(stream);
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                let req: serde_json::Value = serde_json::from_slice(&body).unwrap();
                let reply = if status == 200 {
                    let texts: Vec<String> = req["texts"]
                        .as_array()
                        .unwrap()
                        .iter()
                        .map(|t| t.as_str().unwrap().to_uppercase())
                        .collect();
                    serde_json::json!({ "texts": texts }).to_string()
                } else {
                    "{}".to_string()
                };
                log.lock().unwrap().push(req);
                let mut stream = reader.into_inner();
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                    reply.len()
                )
                .unwrap();
            }
        });
        (format!("http://{addr}/translate"), seen)
    }

    fn fast() -> RemoteConfig {
        RemoteConfig {
            backoff_ms: 1,
            ..RemoteConfig::default()
        }
    }

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn one_request_per_batch_in_order() {
        let (url, seen) = serve(vec![200]);
        let b = RemoteBackend::new(url, fast()).unwrap();
        let out = b.translate("ru", &strings(&["a", "b", "c"])).unwrap();
        assert_eq!(out, ["A", "B", "C"]);
        let seen = seen.lock().unwrap();
        assert_eq!(seen.len(), 1);
        assert_eq!(seen[0], serde_json::json!({"source_lang": "ru", "texts": ["a", "b", "c"]}));
    }

    #[test]
    fn batches_split_by_size() {
        let (url, seen) = serve(vec![200, 200]);
        let cfg = RemoteConfig { batch_size: 2, ..fast() };
        let out = RemoteBackend::new(url, cfg).unwrap().translate("ru", &strings(&["a", "b", "c"])).unwrap();
        assert_eq!(out, ["A", "B", "C"]);
        assert_eq!(seen.lock().unwrap().len(), 2);
    }

    #[test]
    fn retries_then_gives_up() {
        let (url, seen) = serve(vec![503, 500, 502]);
        let err = RemoteBackend::new(url, fast()).unwrap().translate("ru", &strings(&["a"])).unwrap_err();
        assert!(matches!(err, TranslateError::BackendUnavailable(_)));
        assert_eq!(seen.lock().unwrap().len(), 3);
    }

    #[test]
    fn recovers_on_a_later_attempt() {
        let (url, _) = serve(vec![500, 200]);
        let out = RemoteBackend::new(url, fast()).unwrap().translate("ru", &strings(&["x"])).unwrap();
        assert_eq!(out, ["X"]);
    }

    #[test]
    fn empty_batch_sends_nothing() {
        let (url, seen) = serve(vec![]);
        let out = RemoteBackend::new(url, fast()).unwrap().translate("ru", &[]).unwrap();
        assert!(out.is_empty());
        assert!(seen.lock().unwrap().is_empty());
    }

    #[test]
    fn unreachable_endpoint() {
        let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
        let b = RemoteBackend::new(format!("http://127.0.0.1:{port}/"), fast()).unwrap();
        assert!(matches!(b.translate("ru", &strings(&["a"])), Err(TranslateError::BackendUnavailable(_))));
    }
}
