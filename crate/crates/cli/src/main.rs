use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use kgqa_core::synth::{SynthConfig, SynthCorpus};
use kgqa_core::QaEngine;
use kgqa_service::bench::{read_questions, run_bench, run_http_bench};
use kgqa_service::build::{run_build, BuildOptions};
use kgqa_service::fallback::FallbackClient;
use kgqa_service::server::{self, AppState};
use kgqa_service::AskResponse;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "kgqa", version, about = "Sub-graph knowledge-graph question answering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine frequent entities from a question log and build the sub-graph index.
    BuildIndex {
        #[arg(long)]
        kg: PathBuf,
        #[arg(long)]
        aliases: Option<PathBuf>,
        #[arg(long, required_unless_present = "all_entities")]
        logs: Option<PathBuf>,
        #[arg(long)]
        patterns: Option<PathBuf>,
        #[arg(long)]
        pred_aliases: Option<PathBuf>,
        /// Keep entities mentioned in strictly more than this many questions.
        #[arg(long, default_value_t = kgqa_core::miner::DEFAULT_MIN_FREQUENCY)]
        min_freq: u64,
        /// Index every subject of the KG and skip log mining.
        #[arg(long)]
        all_entities: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer one question and print the result as JSON.
    Ask {
        #[arg(long)]
        index: PathBuf,
        question: String,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Consulted for questions the sub-graph path cannot answer.
        #[arg(long)]
        fallback_url: Option<String>,
    },
    /// Measure coverage and latency over a question file.
    Bench {
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        questions: PathBuf,
        #[arg(long, default_value_t = 0)]
        warmup: usize,
        #[arg(long, default_value_t = 1)]
        concurrency: usize,
        /// Benchmark a running service at this base URL instead of in-process.
        #[arg(long, conflicts_with = "index", required_unless_present = "index")]
        http: Option<String>,
    },
    /// Write a deterministic synthetic KG, logs and question file.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        entities: usize,
        #[arg(long, default_value_t = 10)]
        triples_per_entity: usize,
        #[arg(long, default_value_t = 1000)]
        questions: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn init_logging() {
    let level = std::env::var("KGQA_LOG_LEVEL").unwrap_or_else(|_| "info".into());
    let filter = EnvFilter::try_new(&level).unwrap_or_else(|_| EnvFilter::new("info"));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
}

fn load_engine(dir: &PathBuf) -> Result<QaEngine> {
    QaEngine::load(dir).with_context(|| format!("failed to load index from {}", dir.display()))
}

fn main() -> Result<()> {
    init_logging();
    match Cli::parse().command {
        Command::BuildIndex {
            kg,
            aliases,
            logs,
            patterns,
            pred_aliases,
            min_freq,
            all_entities,
            out,
        } => {
            let opts = BuildOptions {
                aliases,
                logs,
                patterns,
                pred_aliases,
                min_freq,
                all_entities,
                ..BuildOptions::new(kg, out)
            };
            let summary = run_build(&opts)?;
            println!("{}", serde_json::to_string(&summary)?);
        }
        Command::Ask { index, question } => {
            let engine = load_engine(&index)?;
            let result = engine.answer(&question);
            println!("{}", serde_json::to_string(&AskResponse::from(&result))?);
        }
        Command::Serve {
            index,
            port,
            host,
            fallback_url,
        } => {
            let engine = load_engine(&index)?;
            let fallback = fallback_url.map(FallbackClient::new).transpose()?;
            let addr: SocketAddr = format!("{host}:{port}").parse()?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .with_context(|| format!("failed to bind {addr}"))?;
                tracing::info!(%addr, entities = engine.index().len(), "serving");
                server::serve(listener, AppState::new(engine, fallback)).await?;
                anyhow::Ok(())
            })?;
        }
        Command::Bench {
            index,
            questions,
            warmup,
            concurrency,
            http,
        } => {
            let content = fs::read_to_string(&questions)
                .with_context(|| format!("failed to read {}", questions.display()))?;
            let questions = read_questions(&content);
            let report = match (index, http) {
                (Some(index), _) => run_bench(&load_engine(&index)?, &questions, warmup, concurrency)?,
                (None, Some(url)) => tokio::runtime::Runtime::new()?
                    .block_on(run_http_bench(&url, &questions, warmup, concurrency))?,
                (None, None) => unreachable!("clap requires --index or --http"),
            };
            println!("{}", serde_json::to_string(&report)?);
        }
        Command::Synth {
            out,
            entities,
            triples_per_entity,
            questions,
            seed,
        } => {
            let corpus = SynthCorpus::generate(&SynthConfig {
                entities,
                triples_per_entity,
                seed,
                ..Default::default()
            });
            corpus.write_dir(&out, questions)?;
            println!(
                "{}",
                serde_json::json!({
                    "entities": corpus.entities.len(),
                    "triples": corpus.triples.len(),
                    "aliases": corpus.aliases.len(),
                    "out": out,
                })
            );
        }
    }
    Ok(())
}
