//! In-process latency and coverage benchmark.

use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Result};
use kgqa_core::{QaEngine, QaStatus};
use serde::Serialize;

use crate::response::{AskRequest, AskResponse};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencySummary {
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub mean: f64,
    pub max: f64,
}

impl LatencySummary {
    /// Nearest-rank percentiles over millisecond samples.
    pub fn from_samples(samples: &mut [f64]) -> Self {
        samples.sort_by(f64::total_cmp);
        let rank = |q: f64| {
            let n = samples.len();
            let i = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
            samples[i]
        };
        LatencySummary {
            p50: rank(0.50),
            p90: rank(0.90),
            p99: rank(0.99),
            mean: samples.iter().sum::<f64>() / samples.len() as f64,
            max: samples[samples.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub total: usize,
    pub answered: usize,
    pub no_answer: usize,
    pub multi_entity: usize,
    /// `answered / total`
    pub coverage: f64,
    pub latency_ms: LatencySummary,
    pub throughput_qps: f64,
    pub warmup: usize,
    pub concurrency: usize,
}

/// Non-blank lines of a question file.
pub fn read_questions(content: &str) -> Vec<String> {
    content
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect()
}

/// Answers the first `warmup` questions unmeasured, then measures the rest
/// across `concurrency` threads.
pub fn run_bench(
    engine: &QaEngine,
    questions: &[String],
    warmup: usize,
    concurrency: usize,
) -> Result<BenchReport> {
    if questions.is_empty() {
        bail!("question file is empty; nothing to measure");
    }
    if warmup >= questions.len() {
        bail!(
            "warmup ({warmup}) consumes all {} questions; nothing to measure",
            questions.len()
        );
    }
    let concurrency = concurrency.max(1);
    for q in &questions[..warmup] {
        engine.answer(q);
    }
    let measured = &questions[warmup..];

    let started = Instant::now();
    let per_thread: Vec<Vec<(QaStatus, f64)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..concurrency)
            .map(|t| {
                s.spawn(move || {
                    measured
                        .iter()
                        .skip(t)
                        .step_by(concurrency)
                        .map(|q| {
                            let r = engine.answer(q);
                            (r.status, r.latency_ms())
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("bench worker panicked")).collect()
    });
    let wall = started.elapsed().as_secs_f64();

    let results: Vec<(QaStatus, f64)> = per_thread.into_iter().flatten().collect();
    Ok(report(&results, wall, warmup, concurrency))
}

pub fn report(
    results: &[(QaStatus, f64)],
    wall_secs: f64,
    warmup: usize,
    concurrency: usize,
) -> BenchReport {
    let count = |s: QaStatus| results.iter().filter(|r| r.0 == s).count();
    let answered = count(QaStatus::Answered);
    let mut latencies: Vec<f64> = results.iter().map(|r| r.1).collect();
    BenchReport {
        total: results.len(),
        answered,
        no_answer: count(QaStatus::NoAnswer),
        multi_entity: count(QaStatus::MultiEntity),
        coverage: answered as f64 / results.len() as f64,
        latency_ms: LatencySummary::from_samples(&mut latencies),
        throughput_qps: if wall_secs > 0.0 {
            results.len() as f64 / wall_secs
        } else {
            0.0
        },
        warmup,
        concurrency,
    }
}

/// Same measurement over HTTP against a running service's `POST /ask`.
pub async fn run_http_bench(
    base_url: &str,
    questions: &[String],
    warmup: usize,
    concurrency: usize,
) -> Result<BenchReport> {
    if questions.is_empty() {
        bail!("question file is empty; nothing to measure");
    }
    if warmup >= questions.len() {
        bail!(
            "warmup ({warmup}) consumes all {} questions; nothing to measure",
            questions.len()
        );
    }
    let concurrency = concurrency.max(1);
    let url = format!("{}/ask", base_url.trim_end_matches('/'));
    let client = reqwest::Client::new();
    for q in &questions[..warmup] {
        ask_http(&client, &url, q).await?;
    }
    let measured: Arc<Vec<String>> = Arc::new(questions[warmup..].to_vec());
    let started = Instant::now();
    let mut tasks = Vec::new();
    for t in 0..concurrency {
        let (client, url, measured) = (client.clone(), url.clone(), measured.clone());
        tasks.push(tokio::spawn(async move {
            let mut out = Vec::new();
            for q in measured.iter().skip(t).step_by(concurrency) {
                let sent = Instant::now();
                let status = ask_http(&client, &url, q).await?;
                out.push((status, sent.elapsed().as_secs_f64() * 1000.0));
            }
            anyhow::Ok(out)
        }));
    }
    let mut results = Vec::new();
    for task in tasks {
        results.extend(task.await??);
    }
    let wall = started.elapsed().as_secs_f64();
    Ok(report(&results, wall, warmup, concurrency))
}

async fn ask_http(client: &reqwest::Client, url: &str, question: &str) -> Result<QaStatus> {
    let response: AskResponse = client
        .post(url)
        .json(&AskRequest {
            question: question.to_string(),
        })
        .send()
        .await?
        .error_for_status()?
        .json()
        .await?;
    Ok(response.status)
}
