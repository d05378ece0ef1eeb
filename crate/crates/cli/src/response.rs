use kgqa_core::{QaResult, QaStatus};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AskRequest {
    pub question: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Subgraph,
    Fallback,
}

/// Wire shape of an answer, shared by `POST /ask` and `kgqa ask`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AskResponse {
    pub status: QaStatus,
    pub answer: Option<String>,
    pub entity: Option<String>,
    pub predicate: Option<String>,
    pub score: Option<f64>,
    pub latency_ms: f64,
    pub source: Source,
}

impl From<&QaResult> for AskResponse {
    fn from(r: &QaResult) -> Self {
        AskResponse {
            status: r.status,
            answer: r.answer.clone(),
            entity: r.entity.clone(),
            predicate: r.predicate.clone(),
            score: r.score,
            latency_ms: r.latency_ms(),
            source: Source::Subgraph,
        }
    }
}
