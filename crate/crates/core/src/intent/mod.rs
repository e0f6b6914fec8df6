//! Natural-language intent processing: few-shot prompting, response
//! parsing and a deterministic grammar fallback.

mod fallback;
mod llm;
mod prompt;

use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use crate::sim::{KpiKind, TrafficKind};

pub use fallback::{fallback_parse, magnitude_from_text, Direction};
pub use llm::{FnBackend, HttpBackend, LlmBackend, LlmBackendConfig, ENDPOINT_ENV, TIMEOUT_ENV};
pub use prompt::{create_prompt, parse_response, PromptText};

/// The intent type is the KPI the operator wants changed.
pub type IntentType = KpiKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentExample {
    pub intent: String,
    #[serde(rename = "type")]
    pub kind: IntentType,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentSource {
    Llm,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessedIntent {
    pub raw: String,
    #[serde(rename = "type")]
    pub kind: IntentType,
    pub keywords: Vec<String>,
    /// Signed percentage change of the KPI; negative delay means a reduction.
    pub magnitude_pct: f64,
    pub source: IntentSource,
    /// Class the intent is aimed at; all classes when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_class: Option<TrafficKind>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("language-model back-end unavailable: {0}")]
    BackendUnavailable(String),
    #[error("language-model back-end misbehaved: {0}")]
    BackendMisbehavior(String),
    #[error("could not parse response: {0}")]
    ParseFailure(String),
    #[error("unintelligible intent: {0}")]
    Unintelligible(String),
}

pub const SHIPPED_EXAMPLES: &str = include_str!("../../data/intent_examples.toml");

#[derive(Deserialize)]
struct ExampleFile {
    example: Vec<IntentExample>,
}

/// Reads an example store; every record needs an intent and keywords.
pub fn load_examples(text: &str) -> Result<Vec<IntentExample>, IntentError> {
    let file: ExampleFile = toml::from_str(text).map_err(|e| IntentError::Config(e.to_string()))?;
    for (i, e) in file.example.iter().enumerate() {
        if e.intent.trim().is_empty() || e.keywords.is_empty() {
            return Err(IntentError::Config(format!("example {} needs an intent and keywords", i + 1)));
        }
    }
    Ok(file.example)
}

pub fn shipped_examples() -> Vec<IntentExample> {
    load_examples(SHIPPED_EXAMPLES).expect("shipped examples parse")
}

/// Classifies `intent` through the back-end when one is given and its answer
/// parses, otherwise through the grammar fallback.
pub fn classify_and_extract(
    intent: &str,
    examples: &[IntentExample],
    backend: Option<&dyn LlmBackend>,
) -> Result<ProcessedIntent, IntentError> {
    if intent.trim().is_empty() {
        return Err(IntentError::Unintelligible("empty intent".into()));
    }
    if let Some(backend) = backend {
        match llm_path(intent, examples, backend) {
            Ok(p) => return Ok(p),
            Err(e) => warn!(error = %e, "falling back to grammar parser"),
        }
    }
    let p = fallback_parse(intent)?;
    info!(kind = %p.kind, magnitude = p.magnitude_pct, "intent parsed by fallback");
    Ok(p)
}

fn llm_path(intent: &str, examples: &[IntentExample], backend: &dyn LlmBackend) -> Result<ProcessedIntent, IntentError> {
    let prompt = create_prompt(intent, examples)?;
    let response = backend.complete(&prompt)?;
    let (kind, keywords) = parse_response(&response)?;
    let pct = keywords
        .iter()
        .find_map(|k| fallback::percent_in(k))
        .or_else(|| magnitude_from_text(intent))
        .ok_or_else(|| IntentError::ParseFailure(format!("no percentage in {keywords:?}")))?;
    let dir = Direction::detect(intent).unwrap_or(Direction::Better);
    let magnitude_pct = dir.sign(kind) * pct;
    if magnitude_pct == 0.0 {
        return Err(IntentError::ParseFailure("zero magnitude".into()));
    }
    Ok(ProcessedIntent {
        raw: intent.to_string(),
        kind,
        keywords,
        magnitude_pct,
        source: IntentSource::Llm,
        target_class: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_store_has_two_per_type() {
        let ex = shipped_examples();
        assert_eq!(ex.len(), 6);
        for k in KpiKind::ALL {
            assert_eq!(ex.iter().filter(|e| e.kind == k).count(), 2);
        }
    }

    #[test]
    fn store_rejects_missing_keywords() {
        let bad = "[[example]]\nintent = \"x\"\ntype = \"delay\"\nkeywords = []\n";
        assert!(matches!(load_examples(bad), Err(IntentError::Config(_))));
    }

    #[test]
    fn empty_intent_is_unintelligible() {
        assert!(matches!(classify_and_extract("  ", &[], None), Err(IntentError::Unintelligible(_))));
    }

    #[test]
    fn backend_failure_degrades_to_fallback() {
        let down = FnBackend::new(|_| Err(IntentError::BackendUnavailable("down".into())));
        let p = classify_and_extract("Boost system throughput by 15%", &shipped_examples(), Some(&down)).unwrap();
        assert_eq!(p.source, IntentSource::Fallback);
        assert_eq!((p.kind, p.magnitude_pct), (KpiKind::Throughput, 15.0));
    }

    #[test]
    fn garbage_response_is_not_reported_as_llm() {
        let junk = FnBackend::new(|_| Ok("no idea".into()));
        let p = classify_and_extract("Reduce network delay by 13%", &shipped_examples(), Some(&junk)).unwrap();
        assert_eq!(p.source, IntentSource::Fallback);
        assert_eq!(p.magnitude_pct, -13.0);
    }
}
