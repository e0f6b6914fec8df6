//! Text-completion back-end client.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use tracing::{info, warn};

use super::{IntentError, PromptText};

pub const ENDPOINT_ENV: &str = "INTENT_RAN_LLM_ENDPOINT";
pub const TIMEOUT_ENV: &str = "INTENT_RAN_LLM_TIMEOUT_MS";

/// Anything that turns a prompt into a completion.
pub trait LlmBackend: Send + Sync {
    fn complete(&self, prompt: &PromptText) -> Result<String, IntentError>;
}

/// Wraps a closure as a back-end; handy for scripted or offline use.
pub struct FnBackend<F>(F);

impl<F> FnBackend<F>
where
    F: Fn(&PromptText) -> Result<String, IntentError> + Send + Sync,
{
    pub fn new(f: F) -> Self {
        FnBackend(f)
    }
}

impl<F> LlmBackend for FnBackend<F>
where
    F: Fn(&PromptText) -> Result<String, IntentError> + Send + Sync,
{
    fn complete(&self, prompt: &PromptText) -> Result<String, IntentError> {
        (self.0)(prompt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmBackendConfig {
    pub endpoint: String,
    pub timeout: Duration,
    pub max_response_bytes: u64,
    pub max_in_flight: usize,
}

impl LlmBackendConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        LlmBackendConfig {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(5),
            max_response_bytes: 4096,
            max_in_flight: 4,
        }
    }

    /// Reads the endpoint (and optional timeout) from the environment.
    pub fn from_env() -> Option<Self> {
        let endpoint = std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.trim().is_empty())?;
        let mut cfg = LlmBackendConfig::new(endpoint.trim());
        if let Some(ms) = std::env::var(TIMEOUT_ENV).ok().and_then(|v| v.parse::<u64>().ok()) {
            cfg.timeout = Duration::from_millis(ms);
        }
        Some(cfg)
    }
}

/// Counting gate bounding concurrent requests.
struct Gate {
    used: Mutex<usize>,
    freed: Condvar,
    cap: usize,
}

impl Gate {
    fn enter(&self) -> GateGuard<'_> {
        let mut used = self.used.lock().unwrap_or_else(|e| e.into_inner());
        while *used >= self.cap {
            used = self.freed.wait(used).unwrap_or_else(|e| e.into_inner());
        }
        *used += 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        let mut used = self.0.used.lock().unwrap_or_else(|e| e.into_inner());
        *used -= 1;
        self.0.freed.notify_one();
    }
}

/// POSTs the prompt as UTF-8 text and reads a UTF-8 completion back.
pub struct HttpBackend {
    cfg: LlmBackendConfig,
    agent: ureq::Agent,
    gate: Gate,
    next_id: AtomicU64,
}

impl HttpBackend {
    pub fn new(cfg: LlmBackendConfig) -> Result<Self, IntentError> {
        if cfg.endpoint.is_empty() || cfg.max_in_flight == 0 || cfg.timeout.is_zero() {
            return Err(IntentError::Config("back-end needs an endpoint, a timeout and at least one slot".into()));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let gate = Gate { used: Mutex::new(0), freed: Condvar::new(), cap: cfg.max_in_flight };
        Ok(HttpBackend { cfg, agent, gate, next_id: AtomicU64::new(1) })
    }

    pub fn config(&self) -> &LlmBackendConfig {
        &self.cfg
    }
}

impl LlmBackend for HttpBackend {
    fn complete(&self, prompt: &PromptText) -> Result<String, IntentError> {
        let _slot = self.gate.enter();
        let id = format!("intent-{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        info!(correlation_id = %id, endpoint = %self.cfg.endpoint, bytes = prompt.as_str().len(), "llm request");
        let mut resp = self
            .agent
            .post(&self.cfg.endpoint)
            .header("Content-Type", "text/plain; charset=utf-8")
            .header("X-Correlation-Id", &id)
            .send(prompt.as_str())
            .map_err(|e| {
                warn!(correlation_id = %id, error = %e, "llm transport failure");
                IntentError::BackendUnavailable(e.to_string())
            })?;
        let status = resp.status();
        if !status.is_success() {
            warn!(correlation_id = %id, %status, "llm non-success status");
            return Err(IntentError::BackendUnavailable(format!("status {status}")));
        }
        let body = resp
            .body_mut()
            .with_config()
            .limit(self.cfg.max_response_bytes)
            .read_to_string()
            .map_err(|e| match e {
                ureq::Error::BodyExceedsLimit(_) => {
                    warn!(correlation_id = %id, cap = self.cfg.max_response_bytes, "llm response over cap");
                    IntentError::BackendMisbehavior(format!("response exceeds {} bytes", self.cfg.max_response_bytes))
                }
                ureq::Error::Timeout(_) | ureq::Error::Io(_) => IntentError::BackendUnavailable(e.to_string()),
                other => IntentError::BackendMisbehavior(other.to_string()),
            })?;
        info!(correlation_id = %id, response = %body, "llm response");
        Ok(body)
    }
}
