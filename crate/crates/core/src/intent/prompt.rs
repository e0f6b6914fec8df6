use serde::{Deserialize, Serialize};

use super::{IntentError, IntentExample, IntentType};
use crate::sim::KpiKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptText(pub String);

impl PromptText {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Few-shot prompt: one block per example in order, then the new intent and
/// the request line.
pub fn create_prompt(intent: &str, examples: &[IntentExample]) -> Result<PromptText, IntentError> {
    if examples.is_empty() {
        return Err(IntentError::Config("example store is empty".into()));
    }
    if intent.trim().is_empty() {
        return Err(IntentError::Config("intent is empty".into()));
    }
    let mut p = String::new();
    for e in examples {
        p.push_str("Example:\n");
        p.push_str(&format!("Intent: {}\n", e.intent));
        p.push_str(&format!("Type: {}\n", e.kind));
        p.push_str(&format!("Keywords: {}\n", e.keywords.join(", ")));
    }
    p.push_str(&format!("New Intent: {intent}\n"));
    p.push_str("Type, Keywords");
    Ok(PromptText(p))
}

fn normalise_label(s: &str) -> String {
    s.trim()
        .trim_matches(|c: char| c == '"' || c == '\'' || c == '.')
        .to_lowercase()
        .replace([' ', '-'], "_")
}

/// Extracts the first `Type:` value and the first `Keywords:` list.
pub fn parse_response(response: &str) -> Result<(IntentType, Vec<String>), IntentError> {
    let field = |name: &str| {
        response.lines().find_map(|l| {
            let l = l.trim();
            let (k, v) = l.split_once(':')?;
            k.trim().eq_ignore_ascii_case(name).then(|| v.trim().to_string())
        })
    };
    let (Some(t), Some(k)) = (field("type"), field("keywords")) else {
        return Err(IntentError::ParseFailure(format!("missing Type or Keywords in {response:?}")));
    };
    let label = normalise_label(&t);
    let kind = KpiKind::parse(&label).ok_or_else(|| IntentError::ParseFailure(format!("unknown type label {t:?}")))?;
    let keywords: Vec<String> = k.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if keywords.is_empty() {
        return Err(IntentError::ParseFailure("empty keyword list".into()));
    }
    Ok((kind, keywords))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(intent: &str, kind: KpiKind, kw: &[&str]) -> IntentExample {
        IntentExample { intent: intent.into(), kind, keywords: kw.iter().map(|s| s.to_string()).collect() }
    }

    #[test]
    fn single_example_prompt_layout() {
        let e = ex("Boost system throughput by 15%", KpiKind::Throughput, &["throughput", "15%"]);
        let p = create_prompt("Reduce network delay by 13%", &[e]).unwrap();
        assert_eq!(
            p.as_str(),
            "Example:\nIntent: Boost system throughput by 15%\nType: throughput\nKeywords: throughput, 15%\n\
             New Intent: Reduce network delay by 13%\nType, Keywords"
        );
    }

    #[test]
    fn empty_store_is_config_error() {
        assert!(matches!(create_prompt("x", &[]), Err(IntentError::Config(_))));
    }

    #[test]
    fn block_count_preserved() {
        let e = ex("a", KpiKind::Delay, &["delay"]);
        let p = create_prompt("b", &[e.clone(), e.clone(), e]).unwrap();
        assert_eq!(p.as_str().matches("Example:").count(), 3);
    }

    #[test]
    fn parses_fields() {
        let (k, kw) = parse_response("Type: energy_efficiency\nKeywords: energy efficiency, 10%").unwrap();
        assert_eq!(k, KpiKind::EnergyEfficiency);
        assert_eq!(kw, vec!["energy efficiency", "10%"]);
        let (k, _) = parse_response("type: Energy Efficiency\nkeywords: x").unwrap();
        assert_eq!(k, KpiKind::EnergyEfficiency);
    }

    #[test]
    fn parse_failures() {
        assert!(matches!(parse_response("gibberish"), Err(IntentError::ParseFailure(_))));
        assert!(matches!(parse_response("Type: latency\nKeywords: delay"), Err(IntentError::ParseFailure(_))));
        assert!(parse_response("Type: delay").is_err());
    }

    #[test]
    fn first_field_wins() {
        let (k, _) = parse_response("Type: delay\nKeywords: a\nType: throughput").unwrap();
        assert_eq!(k, KpiKind::Delay);
    }
}
