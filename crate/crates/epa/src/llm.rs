//! Generation-backend abstraction: a live chat-completion API client, a set
//! of deterministic mocks for tests, an append-only on-disk response cache,
//! and retry/concurrency plumbing around dispatch.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub model_id: String,
    pub temperature: f64,
    pub max_output_length: u32,
    #[serde(default)]
    pub stop_sequences: Vec<String>,
}

impl GenerationParams {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.temperature < 0.0 || !self.temperature.is_finite() {
            return Err(LlmError::InvalidParams("temperature must be finite and >= 0".into()));
        }
        if self.max_output_length < 1 {
            return Err(LlmError::InvalidParams("max_output_length must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            model_id: "gpt-3.5-turbo".into(),
            temperature: 0.0,
            max_output_length: 512,
            stop_sequences: Vec::new(),
        }
    }
}

/// One completed generation, whether served from the backend or the cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub request_text: String,
    pub output_text: String,
    pub backend_id: String,
    pub cache_hit: bool,
    pub latency_ms: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("backend unavailable after {attempts} attempts: {last}")]
    BackendUnavailable { attempts: u32, last: String },
    #[error("invalid generation params: {0}")]
    InvalidParams(String),
    #[error("authentication rejected: {0}")]
    AuthError(String),
    #[error("cache I/O: {0}")]
    CacheIo(#[from] std::io::Error),
    #[error("malformed cache line {line}: {message}")]
    CacheCorrupt { line: usize, message: String },
}

/// A single dispatch failure, classified for retry purposes.
#[derive(Debug, thiserror::Error)]
pub enum DispatchError {
    #[error("request timed out")]
    Timeout,
    #[error("rate limited")]
    RateLimited,
    #[error("server error: {0}")]
    Server(String),
    #[error("auth rejected: {0}")]
    Auth(String),
    #[error("{0}")]
    Other(String),
}

impl DispatchError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, DispatchError::Timeout | DispatchError::RateLimited | DispatchError::Server(_))
    }
}

/// Anything that turns a request text into a completion. Implementations
/// count their own dispatches so tests and cache-effectiveness checks can
/// observe network traffic.
pub trait Backend: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, request_text: &str, params: &GenerationParams) -> Result<String, DispatchError>;
    /// Number of times `complete` has been invoked on this backend.
    fn dispatch_count(&self) -> u64;
}

/// Echoes the request text back. Identity backend for plumbing tests.
#[derive(Debug, Default)]
pub struct MockEcho {
    dispatches: AtomicU64,
}

impl MockEcho {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Backend for MockEcho {
    fn id(&self) -> &str {
        "mock-echo"
    }

    fn complete(&self, request_text: &str, _params: &GenerationParams) -> Result<String, DispatchError> {
        self.dispatches.fetch_add(1, Ordering::SeqCst);
        Ok(request_text.to_string())
    }

    fn dispatch_count(&self) -> u64 {
        self.dispatches.load(Ordering::SeqCst)
    }
}

/// Deterministic lookup-table backend. Unmapped requests are an error so a
/// test with an incomplete fixture fails loudly instead of fabricating text.
#[derive(Debug, Default)]
pub struct MockFixture {
    table: HashMap<String, String>,
    dispatches: AtomicU64,
}

impl MockFixture {
    pub fn new(table: HashMap<String, String>) -> Self {
        MockFixture { table, dispatches: AtomicU64::new(0) }
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        Self::new(pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

impl Backend for MockFixture {
    fn id(&self) -> &str {
        "mock-fixture"
    }

    fn complete(&self, request_text: &str, _params: &GenerationParams) -> Result<String, DispatchError> {
        self.dispatches.fetch_add(1, Ordering::SeqCst);
        self.table
            .get(request_text)
            .cloned()
            .ok_or_else(|| DispatchError::Other(format!("no fixture entry for request: {request_text:?}")))
    }

    fn dispatch_count(&self) -> u64 {
        self.dispatches.load(Ordering::SeqCst)
    }
}

/// Fails with a retryable error for the first `failures` dispatches, then
/// behaves like an echo. Used to exercise the retry loop.
#[derive(Debug)]
pub struct FlakyEcho {
    failures: u64,
    dispatches: AtomicU64,
}

impl FlakyEcho {
    pub fn new(failures: u64) -> Self {
        FlakyEcho { failures, dispatches: AtomicU64::new(0) }
    }
}

impl Backend for FlakyEcho {
    fn id(&self) -> &str {
        "mock-flaky-echo"
    }

    fn complete(&self, request_text: &str, _params: &GenerationParams) -> Result<String, DispatchError> {
        let n = self.dispatches.fetch_add(1, Ordering::SeqCst);
        if n < self.failures {
            Err(DispatchError::Server("injected failure".into()))
        } else {
            Ok(request_text.to_string())
        }
    }

    fn dispatch_count(&self) -> u64 {
        self.dispatches.load(Ordering::SeqCst)
    }
}

/// Live chat-completion HTTP backend (OpenAI-compatible wire format). The
/// request carries a single user-role message with the request text verbatim.
pub struct HttpChatBackend {
    endpoint: String,
    api_key: String,
    client: reqwest::blocking::Client,
    dispatches: AtomicU64,
}

impl HttpChatBackend {
    /// `api_key_env` names the environment variable holding the credential.
    pub fn from_env(endpoint: impl Into<String>, api_key_env: &str) -> Result<Self, LlmError> {
        let api_key = std::env::var(api_key_env)
            .map_err(|_| LlmError::AuthError(format!("environment variable {api_key_env} not set")))?;
        Ok(HttpChatBackend {
            endpoint: endpoint.into(),
            api_key,
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(120))
                .build()
                .map_err(|e| LlmError::InvalidParams(e.to_string()))?,
            dispatches: AtomicU64::new(0),
        })
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
    max_tokens: u32,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    stop: Vec<String>,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: String,
}

impl Backend for HttpChatBackend {
    fn id(&self) -> &str {
        "http-chat"
    }

    fn complete(&self, request_text: &str, params: &GenerationParams) -> Result<String, DispatchError> {
        self.dispatches.fetch_add(1, Ordering::SeqCst);
        let body = ChatRequest {
            model: &params.model_id,
            messages: [ChatMessage { role: "user", content: request_text }],
            temperature: params.temperature,
            max_tokens: params.max_output_length,
            stop: params.stop_sequences.clone(),
        };
        let resp = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    DispatchError::Timeout
                } else {
                    DispatchError::Other(e.to_string())
                }
            })?;
        let status = resp.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(DispatchError::Auth(format!("HTTP {status}")));
        }
        if status.as_u16() == 429 {
            return Err(DispatchError::RateLimited);
        }
        if status.is_server_error() {
            return Err(DispatchError::Server(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(DispatchError::Other(format!("HTTP {status}")));
        }
        let parsed: ChatResponse = resp
            .json()
            .map_err(|e| DispatchError::Other(format!("malformed response: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| DispatchError::Other("response had no choices".into()))
    }

    fn dispatch_count(&self) -> u64 {
        self.dispatches.load(Ordering::SeqCst)
    }
}

/// Content-addressed cache key over the request text and every decoding
/// parameter. Fields are length-prefixed so concatenation is unambiguous.
pub fn cache_key(request_text: &str, params: &GenerationParams) -> String {
    let mut hasher = Sha256::new();
    let mut feed = |bytes: &[u8]| {
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(bytes);
    };
    feed(params.model_id.as_bytes());
    feed(&params.temperature.to_le_bytes());
    feed(&params.max_output_length.to_le_bytes());
    for stop in &params.stop_sequences {
        feed(stop.as_bytes());
    }
    feed(&(params.stop_sequences.len() as u64).to_le_bytes());
    feed(request_text.as_bytes());
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    request_text: String,
    params: GenerationParams,
    output_text: String,
    timestamp: u64,
}

/// Append-only on-disk response store, one JSON record per line. Entries are
/// never evicted within a run; the last entry for a key wins on reload.
pub struct ResponseCache {
    path: PathBuf,
    entries: Mutex<HashMap<String, String>>,
    writer: Mutex<File>,
}

impl ResponseCache {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheEntry = serde_json::from_str(&line)
                    .map_err(|e| LlmError::CacheCorrupt { line: i + 1, message: e.to_string() })?;
                entries.insert(entry.key, entry.output_text);
            }
        }
        let writer = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(ResponseCache { path, entries: Mutex::new(entries), writer: Mutex::new(writer) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.entries.lock().unwrap().get(key).cloned()
    }

    pub fn put(
        &self,
        key: &str,
        request_text: &str,
        params: &GenerationParams,
        output_text: &str,
    ) -> Result<(), LlmError> {
        let entry = CacheEntry {
            key: key.to_string(),
            request_text: request_text.to_string(),
            params: params.clone(),
            output_text: output_text.to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        };
        let line = serde_json::to_string(&entry).expect("cache entry serializes");
        {
            let mut writer = self.writer.lock().unwrap();
            writeln!(writer, "{line}")?;
        }
        self.entries.lock().unwrap().insert(entry.key, entry.output_text);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(30),
            jitter: true,
        }
    }
}

impl RetryPolicy {
    /// Zero-delay policy for tests.
    pub fn immediate(max_attempts: u32) -> Self {
        RetryPolicy {
            max_attempts,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
            jitter: false,
        }
    }

    fn delay_for(&self, attempt: u32) -> Duration {
        let base = self.base_delay.saturating_mul(1u32 << attempt.min(16));
        let capped = base.min(self.max_delay);
        if self.jitter && !capped.is_zero() {
            use rand::Rng;
            let jitter_ms = rand::thread_rng().gen_range(0..=capped.as_millis() as u64 / 2);
            capped + Duration::from_millis(jitter_ms)
        } else {
            capped
        }
    }
}

/// Dispatch front-end: retries, temperature-0 caching, bounded concurrency.
pub struct Generator<'a> {
    backend: &'a dyn Backend,
    cache: Option<&'a ResponseCache>,
    retry: RetryPolicy,
    concurrency: usize,
}

impl<'a> Generator<'a> {
    pub fn new(backend: &'a dyn Backend) -> Self {
        Generator { backend, cache: None, retry: RetryPolicy::default(), concurrency: 4 }
    }

    pub fn with_cache(mut self, cache: &'a ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_concurrency(mut self, workers: usize) -> Self {
        self.concurrency = workers.max(1);
        self
    }

    pub fn backend(&self) -> &dyn Backend {
        self.backend
    }

    /// Run one request through cache, retries and the backend.
    ///
    /// Only temperature-0 requests consult or populate the cache; sampled
    /// requests always dispatch.
    pub fn generate(&self, request_text: &str, params: &GenerationParams) -> Result<GenerationRecord, LlmError> {
        if request_text.is_empty() {
            return Err(LlmError::InvalidParams("request_text must be non-empty".into()));
        }
        params.validate()?;

        let cacheable = params.temperature == 0.0;
        let key = cacheable.then(|| cache_key(request_text, params));
        if let (Some(cache), Some(key)) = (self.cache, key.as_deref()) {
            if let Some(output) = cache.get(key) {
                return Ok(GenerationRecord {
                    request_text: request_text.to_string(),
                    output_text: output,
                    backend_id: self.backend.id().to_string(),
                    cache_hit: true,
                    latency_ms: 0,
                });
            }
        }

        let start = Instant::now();
        let mut last_err: Option<DispatchError> = None;
        for attempt in 0..self.retry.max_attempts {
            match self.backend.complete(request_text, params) {
                Ok(output) => {
                    if let (Some(cache), Some(key)) = (self.cache, key.as_deref()) {
                        cache.put(key, request_text, params, &output)?;
                    }
                    return Ok(GenerationRecord {
                        request_text: request_text.to_string(),
                        output_text: output,
                        backend_id: self.backend.id().to_string(),
                        cache_hit: false,
                        latency_ms: start.elapsed().as_millis() as u64,
                    });
                }
                Err(DispatchError::Auth(msg)) => return Err(LlmError::AuthError(msg)),
                Err(err) if !err.is_retryable() => {
                    return Err(LlmError::BackendUnavailable { attempts: attempt + 1, last: err.to_string() })
                }
                Err(err) => {
                    last_err = Some(err);
                    if attempt + 1 < self.retry.max_attempts {
                        std::thread::sleep(self.retry.delay_for(attempt));
                    }
                }
            }
        }
        Err(LlmError::BackendUnavailable {
            attempts: self.retry.max_attempts,
            last: last_err.map(|e| e.to_string()).unwrap_or_else(|| "no attempts made".into()),
        })
    }

    /// Generate completions for many requests with bounded concurrency.
    /// Output order matches input order regardless of completion order.
    pub fn generate_many(
        &self,
        requests: &[String],
        params: &GenerationParams,
    ) -> Vec<Result<GenerationRecord, LlmError>> {
        if requests.is_empty() {
            return Vec::new();
        }
        let workers = self.concurrency.min(requests.len());
        if workers <= 1 {
            return requests.iter().map(|r| self.generate(r, params)).collect();
        }

        let next = AtomicU64::new(0);
        let slots: Vec<Mutex<Option<Result<GenerationRecord, LlmError>>>> =
            requests.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst) as usize;
                    if i >= requests.len() {
                        break;
                    }
                    let result = self.generate(&requests[i], params);
                    *slots[i].lock().unwrap() = Some(result);
                });
            }
        });
        slots
            .into_iter()
            .map(|slot| slot.into_inner().unwrap().expect("worker filled slot"))
            .collect()
    }
}
