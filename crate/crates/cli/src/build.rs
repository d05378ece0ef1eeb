//! Offline pipeline: KG load, log mining, sub-graph indexing, save.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::PathBuf;

use anyhow::{Context, Result};
use kgqa_core::engine::PredicateAliasTable;
use kgqa_core::miner::{self, Deduper, MiningConfig, DEFAULT_MIN_FREQUENCY};
use kgqa_core::pattern::{default_patterns, load_patterns};
use kgqa_core::{Dictionary, Index, IndexParams, QaEngine, TripleStore};
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub kg: PathBuf,
    pub aliases: Option<PathBuf>,
    /// Question log; required unless `all_entities` is set.
    pub logs: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub pred_aliases: Option<PathBuf>,
    pub min_freq: u64,
    /// Index every subject of the KG instead of mining the logs.
    pub all_entities: bool,
    pub out: PathBuf,
    pub params: IndexParams,
}

impl BuildOptions {
    pub fn new(kg: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        BuildOptions {
            kg: kg.into(),
            aliases: None,
            logs: None,
            patterns: None,
            pred_aliases: None,
            min_freq: DEFAULT_MIN_FREQUENCY,
            all_entities: false,
            out: out.into(),
            params: IndexParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildSummary {
    pub triples: usize,
    pub triple_warnings: usize,
    pub aliases: usize,
    pub alias_warnings: usize,
    pub log_lines: usize,
    pub unique_questions: usize,
    pub mentioned_entities: usize,
    pub selected_entities: usize,
    pub index_terms: usize,
    pub subgraph_triples: usize,
    pub min_freq: u64,
    pub out: PathBuf,
}

pub fn run_build(opts: &BuildOptions) -> Result<BuildSummary> {
    let (mut store, triple_warnings) = TripleStore::load_triples(&opts.kg)?;
    tracing::info!(triples = store.len(), warnings = triple_warnings, "loaded KG");
    let alias_warnings = match &opts.aliases {
        Some(path) => store.load_aliases(path)?,
        None => 0,
    };

    let patterns = match &opts.patterns {
        Some(path) => load_patterns(path)?,
        None => default_patterns(),
    };
    let mut pred_aliases = match &opts.pred_aliases {
        Some(path) => {
            let (table, warnings) = PredicateAliasTable::load(path)?;
            if warnings > 0 {
                tracing::warn!(warnings, "skipped malformed predicate alias lines");
            }
            table
        }
        None => PredicateAliasTable::default(),
    };
    let dropped = pred_aliases.retain_known(&store);
    if dropped > 0 {
        tracing::warn!(dropped, "predicate aliases point at predicates absent from the KG");
    }

    let config = MiningConfig {
        min_frequency: opts.min_freq,
        capture_patterns: patterns.clone(),
    };
    let mut log_lines = 0;
    let mut unique_questions = 0;
    let mut mentioned_entities = 0;
    let records = if opts.all_entities {
        miner::records_for_all_subjects(&store)
    } else {
        let path = opts
            .logs
            .as_ref()
            .context("--logs is required unless --all-entities is given")?;
        let file = File::open(path).with_context(|| format!("failed to open {}", path.display()))?;
        let dict = Dictionary::build(store.surface_forms());
        let mut dedup = Deduper::default();
        let mut questions = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.with_context(|| format!("failed to read {}", path.display()))?;
            if let Some(q) = dedup.push(&line) {
                questions.push(q);
            }
        }
        log_lines = dedup.lines_seen();
        unique_questions = dedup.unique();
        let counts = miner::count_frequencies(&questions, &dict, &config, &store);
        mentioned_entities = counts.len();
        miner::select_high_frequency(&counts, &config, &store)
    };

    let index = Index::build(&store, &records, opts.params)?;
    let summary = BuildSummary {
        triples: store.len(),
        triple_warnings,
        aliases: store.alias_map().len(),
        alias_warnings,
        log_lines,
        unique_questions,
        mentioned_entities,
        selected_entities: index.len(),
        index_terms: index.term_count(),
        subgraph_triples: (0..index.len() as u32)
            .filter_map(|d| index.subgraph(d))
            .map(|sg| sg.triples.len())
            .sum(),
        min_freq: opts.min_freq,
        out: opts.out.clone(),
    };
    QaEngine::new(index, patterns, pred_aliases).save(&opts.out)?;
    Ok(summary)
}
