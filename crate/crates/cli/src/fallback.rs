//! Client for the external QA module consulted when the sub-graph path has
//! no answer.

use std::time::Duration;

use serde_json::Value;

use crate::response::AskRequest;

pub const FALLBACK_TIMEOUT: Duration = Duration::from_millis(200);

#[derive(Debug, Clone, PartialEq)]
pub struct FallbackAnswer {
    pub answer: String,
    pub entity: Option<String>,
    pub predicate: Option<String>,
    pub score: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FallbackClient {
    url: String,
    client: reqwest::Client,
}

impl FallbackClient {
    pub fn new(url: impl Into<String>) -> reqwest::Result<Self> {
        Self::with_timeout(url, FALLBACK_TIMEOUT)
    }

    pub fn with_timeout(url: impl Into<String>, timeout: Duration) -> reqwest::Result<Self> {
        Ok(FallbackClient {
            url: url.into(),
            client: reqwest::Client::builder().timeout(timeout).build()?,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    /// `None` on timeout, transport error, non-2xx status, unparsable body or
    /// a body that carries no answer.
    pub async fn ask(&self, question: &str) -> Option<FallbackAnswer> {
        let request = AskRequest {
            question: question.to_string(),
        };
        let response = match self.client.post(&self.url).json(&request).send().await {
            Ok(r) if r.status().is_success() => r,
            Ok(r) => {
                tracing::debug!(status = %r.status(), "fallback returned an error status");
                return None;
            }
            Err(e) => {
                tracing::debug!(error = %e, "fallback request failed");
                return None;
            }
        };
        let body: Value = response.json().await.ok()?;
        parse_answer(&body)
    }
}

/// Accepts the same shape `POST /ask` produces. A missing `status` with a
/// non-empty `answer` also counts as answered.
pub fn parse_answer(body: &Value) -> Option<FallbackAnswer> {
    if let Some(status) = body.get("status").and_then(Value::as_str) {
        if status != "answered" {
            return None;
        }
    }
    let answer = body.get("answer")?.as_str()?.trim();
    if answer.is_empty() {
        return None;
    }
    let text = |k: &str| body.get(k).and_then(Value::as_str).map(str::to_string);
    Some(FallbackAnswer {
        answer: answer.to_string(),
        entity: text("entity"),
        predicate: text("predicate"),
        score: body.get("score").and_then(Value::as_f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn parse_shapes() {
        assert_eq!(
            parse_answer(&json!({"answer": "42"})).unwrap().answer,
            "42"
        );
        let a = parse_answer(&json!({"status": "answered", "answer": "x", "score": 0.5})).unwrap();
        assert_eq!(a.score, Some(0.5));
        assert!(parse_answer(&json!({"status": "no_answer", "answer": "x"})).is_none());
        assert!(parse_answer(&json!({"answer": null})).is_none());
        assert!(parse_answer(&json!({"answer": "  "})).is_none());
        assert!(parse_answer(&json!([1, 2])).is_none());
    }
}
