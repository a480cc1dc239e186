//! Generation (LLM) and machine-translation client contracts, a record/replay
//! fixture store keyed by request digest, and generic HTTP+JSON adapters.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::language::Language;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("transport error: {message}")]
    Transport { message: String, retryable: bool },
    #[error("quota exceeded: {0}")]
    Quota(String),
    #[error("request timed out")]
    Timeout,
    #[error("no recorded fixture for request digest {digest}")]
    MissingFixture { digest: String },
    #[error("unsupported language `{0}`")]
    UnsupportedLanguage(String),
    #[error("empty prompt")]
    EmptyPrompt,
    #[error("unexpected response: {0}")]
    BadResponse(String),
    #[error("fixture file error: {0}")]
    FixtureFile(String),
    #[error("missing configuration: {0}")]
    Config(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Transport { retryable, .. } => *retryable,
            BackendError::Quota(_) | BackendError::Timeout => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequestKind {
    Generate,
    Translate,
}

impl RequestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RequestKind::Generate => "generate",
            RequestKind::Translate => "translate",
        }
    }
}

/// A request in canonical form together with its SHA-256 digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendRequest {
    pub kind: RequestKind,
    pub payload: String,
    pub digest: String,
}

fn canonical_text(s: &str) -> String {
    s.replace("\r\n", "\n").replace('\r', "\n")
}

impl BackendRequest {
    pub fn new(kind: RequestKind, payload: &str) -> Self {
        let payload = canonical_text(payload);
        let mut hasher = Sha256::new();
        hasher.update(kind.as_str().as_bytes());
        hasher.update(b"\n");
        hasher.update(payload.as_bytes());
        let digest = hex::encode(hasher.finalize());
        BackendRequest { kind, payload, digest }
    }

    pub fn generate(prompt: &str) -> Self {
        Self::new(RequestKind::Generate, prompt)
    }

    /// Payload is `<source>-><target>` on the first line, then the text.
    pub fn translate(text: &str, source: &Language, target: &Language) -> Self {
        let payload = format!("{}->{}\n{}", source.code(), target.code(), text);
        Self::new(RequestKind::Translate, &payload)
    }
}

pub trait GenerationBackend: Send + Sync {
    fn generate(&self, prompt: &str) -> Result<String, BackendError>;
}

pub trait TranslationBackend: Send + Sync {
    fn translate_text(
        &self,
        source: &str,
        source_lang: &Language,
        target_lang: &Language,
    ) -> Result<String, BackendError>;
}

impl<T: GenerationBackend + ?Sized> GenerationBackend for Arc<T> {
    fn generate(&self, prompt: &str) -> Result<String, BackendError> {
        (**self).generate(prompt)
    }
}

impl<T: TranslationBackend + ?Sized> TranslationBackend for Arc<T> {
    fn translate_text(
        &self,
        source: &str,
        source_lang: &Language,
        target_lang: &Language,
    ) -> Result<String, BackendError> {
        (**self).translate_text(source, source_lang, target_lang)
    }
}

/// At most `max_attempts` tries; waits `initial_backoff`, then doubles.
/// Non-retryable errors are returned immediately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    pub fn no_backoff() -> Self {
        RetryPolicy {
            initial_backoff: Duration::ZERO,
            ..Default::default()
        }
    }

    pub fn run<T>(&self, mut op: impl FnMut() -> Result<T, BackendError>) -> Result<T, BackendError> {
        let attempts = self.max_attempts.max(1);
        let mut backoff = self.initial_backoff;
        let mut attempt = 1;
        loop {
            match op() {
                Ok(v) => return Ok(v),
                Err(e) if e.is_retryable() && attempt < attempts => {
                    log::warn!("attempt {attempt}/{attempts} failed: {e}; retrying in {backoff:?}");
                    if !backoff.is_zero() {
                        std::thread::sleep(backoff);
                    }
                    backoff *= 2;
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub digest: String,
    pub kind: RequestKind,
    pub response: String,
}

/// Recorded backend responses keyed by request digest.
///
/// Reads may happen concurrently; recording takes a write lock.
#[derive(Debug, Default)]
pub struct FixtureStore {
    entries: RwLock<BTreeMap<String, FixtureEntry>>,
}

impl FixtureStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = FixtureEntry>) -> Self {
        let map = entries.into_iter().map(|e| (e.digest.clone(), e)).collect();
        FixtureStore {
            entries: RwLock::new(map),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, BackendError> {
        let entries: Vec<FixtureEntry> =
            serde_json::from_str(text).map_err(|e| BackendError::FixtureFile(e.to_string()))?;
        for e in &entries {
            if e.digest.len() != 64 || !e.digest.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(BackendError::FixtureFile(format!("bad digest `{}`", e.digest)));
            }
        }
        Ok(Self::from_entries(entries))
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::FixtureFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// JSON array ordered by digest, so equal stores serialize identically.
    pub fn to_json(&self) -> String {
        let entries = self.entries();
        let mut s = serde_json::to_string_pretty(&entries).expect("fixture entries serialize");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), BackendError> {
        std::fs::write(path, self.to_json())
            .map_err(|e| BackendError::FixtureFile(format!("{}: {e}", path.display())))
    }

    pub fn entries(&self) -> Vec<FixtureEntry> {
        self.entries.read().expect("fixture lock").values().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("fixture lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn record_fixture(&self, request: &BackendRequest, response: &str) -> FixtureEntry {
        let entry = FixtureEntry {
            digest: request.digest.clone(),
            kind: request.kind,
            response: response.to_owned(),
        };
        self.entries
            .write()
            .expect("fixture lock")
            .insert(entry.digest.clone(), entry.clone());
        entry
    }

    pub fn replay_fixture(&self, request: &BackendRequest) -> Result<String, BackendError> {
        self.entries
            .read()
            .expect("fixture lock")
            .get(&request.digest)
            .filter(|e| e.kind == request.kind)
            .map(|e| e.response.clone())
            .ok_or_else(|| BackendError::MissingFixture {
                digest: request.digest.clone(),
            })
    }
}

/// Offline backend answering only from recorded fixtures.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    store: Arc<FixtureStore>,
}

impl ReplayBackend {
    pub fn new(store: Arc<FixtureStore>) -> Self {
        ReplayBackend { store }
    }
}

impl GenerationBackend for ReplayBackend {
    fn generate(&self, prompt: &str) -> Result<String, BackendError> {
        if prompt.is_empty() {
            return Err(BackendError::EmptyPrompt);
        }
        self.store.replay_fixture(&BackendRequest::generate(prompt))
    }
}

impl TranslationBackend for ReplayBackend {
    fn translate_text(
        &self,
        source: &str,
        source_lang: &Language,
        target_lang: &Language,
    ) -> Result<String, BackendError> {
        self.store
            .replay_fixture(&BackendRequest::translate(source, source_lang, target_lang))
    }
}

/// Forwards to `inner` and records every successful response.
pub struct RecordingBackend<B> {
    inner: B,
    store: Arc<FixtureStore>,
}

impl<B> RecordingBackend<B> {
    pub fn new(inner: B, store: Arc<FixtureStore>) -> Self {
        RecordingBackend { inner, store }
    }
}

impl<B: GenerationBackend> GenerationBackend for RecordingBackend<B> {
    fn generate(&self, prompt: &str) -> Result<String, BackendError> {
        let response = self.inner.generate(prompt)?;
        self.store
            .record_fixture(&BackendRequest::generate(prompt), &response);
        Ok(response)
    }
}

impl<B: TranslationBackend> TranslationBackend for RecordingBackend<B> {
    fn translate_text(
        &self,
        source: &str,
        source_lang: &Language,
        target_lang: &Language,
    ) -> Result<String, BackendError> {
        let response = self.inner.translate_text(source, source_lang, target_lang)?;
        self.store.record_fixture(
            &BackendRequest::translate(source, source_lang, target_lang),
            &response,
        );
        Ok(response)
    }
}

/// Where a live adapter sends requests and how it authenticates.
#[derive(Debug, Clone, PartialEq)]
pub struct HttpEndpoint {
    pub url: String,
    /// Name of the environment variable holding a bearer token, if any.
    pub api_key_env: Option<String>,
    /// Dot-separated path of the text field in the JSON response,
    /// e.g. `choices.0.message.content`.
    pub response_path: String,
    pub timeout: Duration,
    /// Extra JSON fields merged into every request body (model, temperature, ...).
    pub options: serde_json::Map<String, Value>,
}

impl HttpEndpoint {
    pub fn new(url: impl Into<String>, response_path: impl Into<String>) -> Self {
        HttpEndpoint {
            url: url.into(),
            api_key_env: None,
            response_path: response_path.into(),
            timeout: DEFAULT_TIMEOUT,
            options: serde_json::Map::new(),
        }
    }

    fn post(&self, mut body: serde_json::Map<String, Value>) -> Result<String, BackendError> {
        for (k, v) in &self.options {
            body.entry(k.clone()).or_insert_with(|| v.clone());
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .new_agent();
        let mut request = agent.post(&self.url);
        if let Some(var) = &self.api_key_env {
            let key = std::env::var(var)
                .map_err(|_| BackendError::Config(format!("environment variable {var} is not set")))?;
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = request.send_json(Value::Object(body)).map_err(map_ureq_error)?;
        let json: Value = response.body_mut().read_json().map_err(map_ureq_error)?;
        extract_path(&json, &self.response_path)
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| {
                BackendError::BadResponse(format!("no string at `{}`", self.response_path))
            })
    }
}

fn map_ureq_error(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::StatusCode(429) => BackendError::Quota("HTTP 429".into()),
        ureq::Error::StatusCode(code) => BackendError::Transport {
            message: format!("HTTP {code}"),
            retryable: code >= 500,
        },
        ureq::Error::Timeout(_) => BackendError::Timeout,
        ureq::Error::Io(io) => BackendError::Transport {
            message: io.to_string(),
            retryable: true,
        },
        other => BackendError::Transport {
            message: other.to_string(),
            retryable: false,
        },
    }
}

fn extract_path<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.')
        .filter(|p| !p.is_empty())
        .try_fold(value, |v, key| match v {
            Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get(i)),
            Value::Object(map) => map.get(key),
            _ => None,
        })
}

/// Generation over HTTP: posts `{"prompt": ...}` plus the endpoint options.
pub struct HttpGenerationBackend {
    pub endpoint: HttpEndpoint,
}

impl GenerationBackend for HttpGenerationBackend {
    fn generate(&self, prompt: &str) -> Result<String, BackendError> {
        if prompt.is_empty() {
            return Err(BackendError::EmptyPrompt);
        }
        let mut body = serde_json::Map::new();
        body.insert("prompt".into(), Value::String(prompt.to_owned()));
        self.endpoint.post(body)
    }
}

/// Machine translation over HTTP: posts `{"q", "source", "target"}`.
pub struct HttpTranslationBackend {
    pub endpoint: HttpEndpoint,
    /// Empty means every language is accepted.
    pub supported: Vec<Language>,
}

impl TranslationBackend for HttpTranslationBackend {
    fn translate_text(
        &self,
        source: &str,
        source_lang: &Language,
        target_lang: &Language,
    ) -> Result<String, BackendError> {
        for lang in [source_lang, target_lang] {
            if !self.supported.is_empty() && !self.supported.contains(lang) {
                return Err(BackendError::UnsupportedLanguage(lang.code().to_owned()));
            }
        }
        let mut body = serde_json::Map::new();
        body.insert("q".into(), Value::String(source.to_owned()));
        body.insert("source".into(), Value::String(source_lang.code().to_owned()));
        body.insert("target".into(), Value::String(target_lang.code().to_owned()));
        self.endpoint.post(body)
    }
}

/// Applies `f` to every item with at most `parallelism` calls in flight.
/// Results come back in input order.
pub fn map_bounded<I, O, F>(items: &[I], parallelism: usize, f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync,
{
    let parallelism = parallelism.max(1);
    if parallelism == 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let mut out = Vec::with_capacity(items.len());
    for wave in items.chunks(parallelism) {
        let results: Vec<O> = std::thread::scope(|scope| {
            let handles: Vec<_> = wave.iter().map(|item| scope.spawn(|| f(item))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("backend worker panicked"))
                .collect()
        });
        out.extend(results);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    #[test]
    fn digest_is_hex_sha256_and_canonical() {
        let a = BackendRequest::generate("abc\r\ndef");
        let b = BackendRequest::generate("abc\ndef");
        assert_eq!(a.digest, b.digest);
        assert_eq!(a.digest.len(), 64);
        assert!(a.digest.bytes().all(|c| c.is_ascii_hexdigit()));
        let t = BackendRequest::translate("abc\ndef", &"en".into(), &"fr".into());
        assert_ne!(t.digest, b.digest);
        // sha256("generate\nabc")
        assert_eq!(
            BackendRequest::generate("abc").digest,
            "98b8d2d19b2d1a71a6a36b9c38d5f0dc0b7ad74c9a6aaceb4cd0963ea4daf30e"
        );
    }

    #[test]
    fn record_then_replay() {
        let store = FixtureStore::new();
        let req = BackendRequest::generate("Please expand these terms: pow");
        store.record_fixture(&req, "pow => power");
        assert_eq!(store.replay_fixture(&req).unwrap(), "pow => power");
        let changed = BackendRequest::generate("Please expand these terms:  pow");
        assert!(matches!(
            store.replay_fixture(&changed),
            Err(BackendError::MissingFixture { .. })
        ));
    }

    #[test]
    fn replay_is_deterministic_and_strict() {
        let store = Arc::new(FixtureStore::new());
        store.record_fixture(&BackendRequest::generate("p"), "r");
        let backend = ReplayBackend::new(store);
        assert_eq!(backend.generate("p").unwrap(), backend.generate("p").unwrap());
        assert!(matches!(backend.generate("q"), Err(BackendError::MissingFixture { .. })));
        let fr: Language = "fr".into();
        assert!(matches!(
            backend.translate_text("p", &"en".into(), &fr),
            Err(BackendError::MissingFixture { .. })
        ));
    }

    #[test]
    fn fixture_file_round_trip() {
        let store = FixtureStore::new();
        store.record_fixture(&BackendRequest::generate("one"), "1");
        store.record_fixture(
            &BackendRequest::translate("absolute", &"en".into(), &"fr".into()),
            "absolue",
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        store.save(&path).unwrap();
        let back = FixtureStore::load(&path).unwrap();
        assert_eq!(back.entries(), store.entries());
        assert_eq!(back.to_json(), store.to_json());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"kind\": \"translate\""));
    }

    #[test]
    fn bad_fixture_files() {
        assert!(FixtureStore::from_json("{").is_err());
        assert!(FixtureStore::from_json(r#"[{"digest":"zz","kind":"generate","response":""}]"#).is_err());
    }

    struct Flaky {
        calls: AtomicU32,
        fail_times: u32,
        error: BackendError,
    }

    impl GenerationBackend for Flaky {
        fn generate(&self, _prompt: &str) -> Result<String, BackendError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if n < self.fail_times {
                Err(self.error.clone())
            } else {
                Ok("ok".into())
            }
        }
    }

    #[test]
    fn retry_policy_bounds() {
        let policy = RetryPolicy::no_backoff();
        let transient = BackendError::Timeout;

        let f = Flaky { calls: AtomicU32::new(0), fail_times: 2, error: transient.clone() };
        assert_eq!(policy.run(|| f.generate("x")).unwrap(), "ok");
        assert_eq!(f.calls.load(Ordering::SeqCst), 3);

        let f = Flaky { calls: AtomicU32::new(0), fail_times: 10, error: transient };
        assert!(policy.run(|| f.generate("x")).is_err());
        assert_eq!(f.calls.load(Ordering::SeqCst), 3);

        let f = Flaky {
            calls: AtomicU32::new(0),
            fail_times: 10,
            error: BackendError::MissingFixture { digest: "0".repeat(64) },
        };
        assert!(policy.run(|| f.generate("x")).is_err());
        assert_eq!(f.calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn recording_wraps_inner() {
        let store = Arc::new(FixtureStore::new());
        let inner = Flaky { calls: AtomicU32::new(0), fail_times: 0, error: BackendError::Timeout };
        let rec = RecordingBackend::new(inner, store.clone());
        rec.generate("hello").unwrap();
        assert_eq!(ReplayBackend::new(store).generate("hello").unwrap(), "ok");
    }

    #[test]
    fn bounded_map_keeps_order() {
        let items: Vec<u32> = (0..23).collect();
        let out = map_bounded(&items, 4, |x| x * 2);
        assert_eq!(out, items.iter().map(|x| x * 2).collect::<Vec<_>>());
        assert!(map_bounded(&[] as &[u32], 4, |x| *x).is_empty());
    }

    #[test]
    fn json_path_extraction() {
        let v: Value = serde_json::json!({"choices": [{"message": {"content": "hi"}}], "text": "t"});
        assert_eq!(extract_path(&v, "choices.0.message.content"), Some(&Value::from("hi")));
        assert_eq!(extract_path(&v, "text"), Some(&Value::from("t")));
        assert_eq!(extract_path(&v, "choices.1"), None);
    }

    #[test]
    fn unreachable_endpoint_is_transport_error() {
        let mut ep = HttpEndpoint::new("http://127.0.0.1:9/generate", "text");
        ep.timeout = Duration::from_secs(2);
        let backend = HttpGenerationBackend { endpoint: ep };
        let err = backend.generate("x").unwrap_err();
        assert!(matches!(err, BackendError::Transport { .. } | BackendError::Timeout), "{err:?}");
    }
}
