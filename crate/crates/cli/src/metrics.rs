use std::sync::atomic::{AtomicU64, Ordering};

use kgqa_core::QaStatus;
use serde::Serialize;

/// Upper bounds of the latency buckets in milliseconds; a final unbounded
/// bucket catches the rest.
pub const LATENCY_BUCKETS_MS: [f64; 8] = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];

/// Request counters and latency histogram, safe under concurrent updates.
#[derive(Debug, Default)]
pub struct ServiceMetrics {
    answered: AtomicU64,
    no_answer: AtomicU64,
    multi_entity: AtomicU64,
    fallback_answered: AtomicU64,
    buckets: [AtomicU64; LATENCY_BUCKETS_MS.len() + 1],
    latency_sum_us: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Status(QaStatus),
    FallbackAnswered,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bucket {
    /// Upper bound in ms, or `"+Inf"`.
    pub le: serde_json::Value,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencySnapshot {
    pub count: u64,
    pub sum_ms: f64,
    /// Upper bound of the bucket holding the median; `null` before any request.
    pub p50_ms: Option<f64>,
    pub buckets: Vec<Bucket>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsSnapshot {
    pub requests: u64,
    pub answered: u64,
    pub no_answer: u64,
    pub multi_entity: u64,
    pub fallback_answered: u64,
    pub latency_ms: LatencySnapshot,
}

impl ServiceMetrics {
    pub fn record(&self, outcome: Outcome, latency_ms: f64) {
        let counter = match outcome {
            Outcome::Status(QaStatus::Answered) => &self.answered,
            Outcome::Status(QaStatus::NoAnswer) => &self.no_answer,
            Outcome::Status(QaStatus::MultiEntity) => &self.multi_entity,
            Outcome::FallbackAnswered => &self.fallback_answered,
        };
        counter.fetch_add(1, Ordering::Relaxed);
        let bucket = LATENCY_BUCKETS_MS
            .iter()
            .position(|&le| latency_ms <= le)
            .unwrap_or(LATENCY_BUCKETS_MS.len());
        self.buckets[bucket].fetch_add(1, Ordering::Relaxed);
        self.latency_sum_us
            .fetch_add((latency_ms * 1000.0).round() as u64, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> MetricsSnapshot {
        let load = |c: &AtomicU64| c.load(Ordering::Relaxed);
        let counts: Vec<u64> = self.buckets.iter().map(load).collect();
        let total: u64 = counts.iter().sum();
        let p50_ms = (total > 0).then(|| {
            let target = total.div_ceil(2);
            let mut seen = 0;
            for (i, c) in counts.iter().enumerate() {
                seen += c;
                if seen >= target {
                    return LATENCY_BUCKETS_MS.get(i).copied().unwrap_or(f64::INFINITY);
                }
            }
            f64::INFINITY
        });
        let buckets = counts
            .iter()
            .enumerate()
            .map(|(i, &count)| Bucket {
                le: LATENCY_BUCKETS_MS
                    .get(i)
                    .map(|&b| serde_json::json!(b))
                    .unwrap_or_else(|| serde_json::json!("+Inf")),
                count,
            })
            .collect();
        let answered = load(&self.answered);
        let no_answer = load(&self.no_answer);
        let multi_entity = load(&self.multi_entity);
        let fallback_answered = load(&self.fallback_answered);
        MetricsSnapshot {
            requests: answered + no_answer + multi_entity + fallback_answered,
            answered,
            no_answer,
            multi_entity,
            fallback_answered,
            latency_ms: LatencySnapshot {
                count: total,
                sum_ms: load(&self.latency_sum_us) as f64 / 1000.0,
                // p50 past the last bound is reported as the last bound
                p50_ms: p50_ms.map(|p| p.min(LATENCY_BUCKETS_MS[LATENCY_BUCKETS_MS.len() - 1])),
                buckets,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counters_and_buckets() {
        let m = ServiceMetrics::default();
        assert_eq!(m.snapshot().latency_ms.p50_ms, None);
        m.record(Outcome::Status(QaStatus::Answered), 0.2);
        m.record(Outcome::Status(QaStatus::NoAnswer), 0.5);
        m.record(Outcome::Status(QaStatus::MultiEntity), 3.0);
        m.record(Outcome::FallbackAnswered, 250.0);
        let s = m.snapshot();
        assert_eq!(s.requests, 4);
        assert_eq!((s.answered, s.no_answer, s.multi_entity, s.fallback_answered), (1, 1, 1, 1));
        let counts: Vec<u64> = s.latency_ms.buckets.iter().map(|b| b.count).collect();
        assert_eq!(counts, [2, 0, 0, 1, 0, 0, 0, 0, 1]);
        assert_eq!(s.latency_ms.p50_ms, Some(0.5));
        assert_eq!(s.latency_ms.buckets[8].le, serde_json::json!("+Inf"));
    }

    #[test]
    fn concurrent_updates_are_conserved() {
        let m = ServiceMetrics::default();
        std::thread::scope(|s| {
            for t in 0..8 {
                let m = &m;
                s.spawn(move || {
                    for i in 0..1000 {
                        let status = [QaStatus::Answered, QaStatus::NoAnswer, QaStatus::MultiEntity]
                            [(t + i) % 3];
                        m.record(Outcome::Status(status), i as f64 / 10.0);
                    }
                });
            }
        });
        let s = m.snapshot();
        assert_eq!(s.requests, 8000);
        assert_eq!(s.latency_ms.count, 8000);
    }
}
