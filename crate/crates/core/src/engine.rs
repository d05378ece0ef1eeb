//! Online question answering over recalled sub-graphs.
//!
//! The engine holds the loaded [`Index`] (which carries the sub-graphs), the
//! entity dictionary derived from the indexed records, the question patterns
//! and the predicate alias table. It has no access to the full triple store,
//! so every answer is produced from a recalled sub-graph.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{Index, SubGraph};
use crate::kg::TripleStore;
use crate::miner::EntityRecord;
use crate::pattern::{self, match_pattern, PatternKind, PatternMatch, QuestionPattern};
use crate::text::{normalize_label, token_texts, tokenize, Dictionary};

pub const DEFAULT_JACCARD_THRESHOLD: f64 = 0.5;

/// File names used when engine assets are stored next to an index.
pub const PATTERNS_FILE: &str = "patterns.tsv";
pub const PREDICATE_ALIASES_FILE: &str = "predicate_aliases.tsv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QaStatus {
    Answered,
    NoAnswer,
    MultiEntity,
}

impl QaStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            QaStatus::Answered => "answered",
            QaStatus::NoAnswer => "no_answer",
            QaStatus::MultiEntity => "multi_entity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaResult {
    pub status: QaStatus,
    pub answer: Option<String>,
    pub entity: Option<String>,
    pub predicate: Option<String>,
    pub score: Option<f64>,
    pub latency_us: u64,
}

impl QaResult {
    fn no_answer(entity: Option<String>) -> Self {
        QaResult {
            status: QaStatus::NoAnswer,
            answer: None,
            entity,
            predicate: None,
            score: None,
            latency_us: 0,
        }
    }

    pub fn latency_ms(&self) -> f64 {
        self.latency_us as f64 / 1000.0
    }
}

/// Normalized phrase → predicate label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredicateAliasTable {
    entries: BTreeMap<String, String>,
}

impl PredicateAliasTable {
    /// Keys are stored as their space-joined token sequence so lookups are
    /// insensitive to punctuation.
    pub fn insert(&mut self, phrase: &str, predicate: &str) -> bool {
        let key = token_texts(phrase).join(" ");
        let predicate = normalize_label(predicate);
        if key.is_empty() || predicate.is_empty() {
            return false;
        }
        self.entries.insert(key, predicate);
        true
    }

    pub fn get(&self, phrase: &[String]) -> Option<&str> {
        self.entries.get(&phrase.join(" ")).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `phrase<TAB>predicate` lines; returns the table and the number
    /// of skipped lines.
    pub fn parse(content: &str) -> (Self, usize) {
        let mut table = PredicateAliasTable::default();
        let mut warnings = 0;
        for line in content.lines().filter(|l| !l.trim().is_empty()) {
            match line.split_once('\t') {
                Some((phrase, predicate)) if table.insert(phrase, predicate) => {}
                _ => warnings += 1,
            }
        }
        (table, warnings)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, usize)> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&content))
    }

    /// Drops entries whose predicate never occurs in `store`; returns how many.
    pub fn retain_known(&mut self, store: &TripleStore) -> usize {
        let known: HashSet<&str> = store.triples().iter().map(|t| t.predicate.as_str()).collect();
        let before = self.entries.len();
        self.entries.retain(|_, p| known.contains(p.as_str()));
        before - self.entries.len()
    }

    pub fn to_tsv(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}\t{v}\n"))
            .collect()
    }
}

/// Predicate label for a question phrase, restricted to predicates of `sg`:
/// exact token match, then alias table, then best token-set Jaccard ≥ 0.5.
pub fn resolve_predicate(
    phrase: &[String],
    sg: &SubGraph,
    aliases: &PredicateAliasTable,
) -> Option<String> {
    resolve_predicate_with(phrase, sg, aliases, DEFAULT_JACCARD_THRESHOLD)
}

pub fn resolve_predicate_with(
    phrase: &[String],
    sg: &SubGraph,
    aliases: &PredicateAliasTable,
    threshold: f64,
) -> Option<String> {
    if phrase.is_empty() {
        return None;
    }
    let predicates = sg.predicates();
    if let Some(p) = predicates.iter().find(|p| token_texts(p) == phrase) {
        return Some(p.to_string());
    }
    if let Some(p) = aliases.get(phrase) {
        if sg.has_predicate(p) {
            return Some(p.to_string());
        }
    }
    let wanted: HashSet<&str> = phrase.iter().map(String::as_str).collect();
    let mut best: Option<(f64, &str)> = None;
    for p in predicates {
        let tokens = token_texts(p);
        let have: HashSet<&str> = tokens.iter().map(String::as_str).collect();
        let union = wanted.union(&have).count();
        if union == 0 {
            continue;
        }
        let score = wanted.intersection(&have).count() as f64 / union as f64;
        let better = match best {
            None => true,
            Some((s, label)) => score > s || (score == s && p < label),
        };
        if better {
            best = Some((score, p));
        }
    }
    best.filter(|(s, _)| *s >= threshold)
        .map(|(_, p)| p.to_string())
}

/// Renders the templated answer from the first matching triple of `sg`.
pub fn generate_answer(
    m: &PatternMatch,
    sg: &SubGraph,
    predicate: &str,
    record: &EntityRecord,
) -> Option<String> {
    let center = sg.center.as_str();
    let name = record.entity.as_str();
    let outgoing = sg
        .triples
        .iter()
        .find(|t| t.subject == center && t.predicate == predicate);
    match m.pattern.kind {
        PatternKind::Factoid => {
            if let Some(t) = outgoing {
                return Some(format!("The {predicate} of {name} is {}.", t.object));
            }
            sg.triples
                .iter()
                .find(|t| t.object == center && t.predicate == predicate)
                .map(|t| format!("The {predicate} of {} is {name}.", t.subject))
        }
        PatternKind::Judgment => outgoing.map(|t| {
            let verdict = if token_texts(&t.object) == m.object_phrase {
                "Yes"
            } else {
                "No"
            };
            format!("{verdict}, the {predicate} of {name} is {}.", t.object)
        }),
    }
}

#[derive(Debug, Clone)]
pub struct QaEngine {
    index: Index,
    dictionary: Dictionary,
    patterns: Vec<QuestionPattern>,
    predicate_aliases: PredicateAliasTable,
    jaccard_threshold: f64,
}

impl QaEngine {
    /// The dictionary covers every alias of every indexed entity.
    pub fn new(
        index: Index,
        patterns: Vec<QuestionPattern>,
        predicate_aliases: PredicateAliasTable,
    ) -> Self {
        let surfaces: Vec<(String, String)> = index
            .records()
            .iter()
            .flat_map(|r| r.aliases.iter().map(|a| (a.clone(), r.entity.clone())))
            .collect();
        let dictionary = Dictionary::build(surfaces);
        Self::with_dictionary(index, dictionary, patterns, predicate_aliases)
    }

    /// Uses a caller-supplied dictionary, e.g. one that also knows entities
    /// that were not indexed; those are recalled through index search.
    pub fn with_dictionary(
        index: Index,
        dictionary: Dictionary,
        patterns: Vec<QuestionPattern>,
        predicate_aliases: PredicateAliasTable,
    ) -> Self {
        QaEngine {
            index,
            dictionary,
            patterns,
            predicate_aliases,
            jaccard_threshold: DEFAULT_JACCARD_THRESHOLD,
        }
    }

    pub fn set_jaccard_threshold(&mut self, threshold: f64) {
        self.jaccard_threshold = threshold;
    }

    /// Loads an index directory. Patterns and predicate aliases stored next to
    /// the index are used when present; otherwise the bundled patterns and an
    /// empty alias table.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let index = Index::load(dir)?;
        let patterns_path = dir.join(PATTERNS_FILE);
        let patterns = if patterns_path.exists() {
            pattern::load_patterns(&patterns_path)?
        } else {
            pattern::default_patterns()
        };
        let aliases_path = dir.join(PREDICATE_ALIASES_FILE);
        let aliases = if aliases_path.exists() {
            PredicateAliasTable::load(&aliases_path)?.0
        } else {
            PredicateAliasTable::default()
        };
        Ok(Self::new(index, patterns, aliases))
    }

    /// Writes the index plus pattern and alias files into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        self.index.save(dir)?;
        let patterns: String = self
            .patterns
            .iter()
            .map(|p| format!("{}\t{}\n", p.kind, p.template))
            .collect();
        for (name, content) in [
            (PATTERNS_FILE, patterns),
            (PREDICATE_ALIASES_FILE, self.predicate_aliases.to_tsv()),
        ] {
            let path = dir.join(name);
            fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn patterns(&self) -> &[QuestionPattern] {
        &self.patterns
    }

    pub fn answer(&self, question: &str) -> QaResult {
        self.answer_traced(question).0
    }

    /// Like [`answer`](Self::answer), also returning the doc ids of every
    /// sub-graph the call read.
    pub fn answer_traced(&self, question: &str) -> (QaResult, Vec<u32>) {
        let started = Instant::now();
        let mut touched = Vec::new();
        let mut result = self.run(question, &mut touched);
        result.latency_us = started.elapsed().as_micros() as u64;
        (result, touched)
    }

    fn run(&self, question: &str, touched: &mut Vec<u32>) -> QaResult {
        let q = normalize_label(question);
        let tokens = tokenize(&q);
        let matches = self.dictionary.recognize_tokens(&q, &tokens);
        let entities: BTreeSet<&str> = matches.iter().map(|m| m.entity.as_str()).collect();
        match entities.len() {
            0 => return QaResult::no_answer(None),
            1 => {}
            _ => {
                return QaResult {
                    status: QaStatus::MultiEntity,
                    ..QaResult::no_answer(None)
                }
            }
        }
        let mention = &matches[0];
        let entity = mention.entity.clone();

        let candidates = match self.index.doc_id(&entity) {
            Some(doc) => vec![(doc, 1.0)],
            None => self.index.search_docs(&q, self.index.params().top_k),
        };
        let Some(pm) = match_pattern(&tokens, mention, &self.patterns) else {
            return QaResult::no_answer(Some(entity));
        };

        for (doc, score) in candidates {
            touched.push(doc);
            let (Some(sg), Some(record)) = (self.index.subgraph(doc), self.index.record(doc)) else {
                continue;
            };
            let Some(predicate) = resolve_predicate_with(
                &pm.predicate_phrase,
                sg,
                &self.predicate_aliases,
                self.jaccard_threshold,
            ) else {
                continue;
            };
            if let Some(text) = generate_answer(&pm, sg, &predicate, record) {
                return QaResult {
                    status: QaStatus::Answered,
                    answer: Some(text),
                    entity: Some(record.entity.clone()),
                    predicate: Some(predicate),
                    score: Some(score),
                    latency_us: 0,
                };
            }
        }
        QaResult::no_answer(Some(entity))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::IndexParams;
    use crate::kg::Triple;
    use crate::miner::records_for;

    fn sg(center: &str, triples: &[(&str, &str, &str)]) -> SubGraph {
        SubGraph {
            center: center.into(),
            triples: triples
                .iter()
                .map(|(s, p, o)| Triple::new(s, p, o).unwrap())
                .collect(),
        }
    }

    fn phrase(s: &str) -> Vec<String> {
        token_texts(s)
    }

    fn everest() -> SubGraph {
        sg("mount everest", &[("mount everest", "height", "8848 m")])
    }

    fn record(entity: &str) -> EntityRecord {
        EntityRecord {
            entity: entity.into(),
            aliases: [entity.to_string()].into(),
            frequency: 0,
        }
    }

    fn pattern_match(kind: PatternKind, p: &str, o: &str) -> PatternMatch {
        let template = match kind {
            PatternKind::Factoid => "what is the {p} of {e}",
            PatternKind::Judgment => "is the {p} of {e} {o}",
        };
        PatternMatch {
            pattern: QuestionPattern::parse(kind, template, 0).unwrap(),
            predicate_phrase: phrase(p),
            object_phrase: phrase(o),
        }
    }

    #[test]
    fn resolve_examples() {
        let none = PredicateAliasTable::default();
        assert_eq!(
            resolve_predicate(&phrase("height"), &everest(), &none).as_deref(),
            Some("height")
        );

        let (aliases, _) = PredicateAliasTable::parse("how tall\theight\n");
        assert_eq!(
            resolve_predicate(&phrase("how tall"), &everest(), &aliases).as_deref(),
            Some("height")
        );
        // alias target must occur in the sub-graph
        let (aliases, _) = PredicateAliasTable::parse("how tall\televation\n");
        assert_eq!(resolve_predicate(&phrase("how tall"), &everest(), &aliases), None);

        let g = sg("x", &[("x", "elevation above sea", "1")]);
        assert_eq!(resolve_predicate(&phrase("peak elevation"), &g, &none), None);
    }

    #[test]
    fn jaccard_threshold_and_ties() {
        let none = PredicateAliasTable::default();
        let g = sg("x", &[("x", "birth place", "a"), ("x", "death date", "b")]);
        // {place, of, birth} vs {birth, place}: 2/3
        assert_eq!(
            resolve_predicate(&phrase("place of birth"), &g, &none).as_deref(),
            Some("birth place")
        );
        // exactly 0.5 is accepted
        let g = sg("x", &[("x", "zeta alpha", "a"), ("x", "beta alpha", "b")]);
        assert_eq!(
            resolve_predicate(&phrase("alpha"), &g, &none).as_deref(),
            Some("beta alpha")
        );
    }

    #[test]
    fn answer_templates() {
        let rec = record("mount everest");
        let m = pattern_match(PatternKind::Factoid, "height", "");
        assert_eq!(
            generate_answer(&m, &everest(), "height", &rec).as_deref(),
            Some("The height of mount everest is 8848 m.")
        );
        let m = pattern_match(PatternKind::Judgment, "height", "8848 m");
        assert_eq!(
            generate_answer(&m, &everest(), "height", &rec).as_deref(),
            Some("Yes, the height of mount everest is 8848 m.")
        );
        let m = pattern_match(PatternKind::Judgment, "height", "9000 m");
        assert_eq!(
            generate_answer(&m, &everest(), "height", &rec).as_deref(),
            Some("No, the height of mount everest is 8848 m.")
        );
    }

    #[test]
    fn factoid_over_incoming_edge() {
        let g = sg("paris", &[("france", "capital", "paris")]);
        let m = pattern_match(PatternKind::Factoid, "capital", "");
        assert_eq!(
            generate_answer(&m, &g, "capital", &record("paris")).as_deref(),
            Some("The capital of france is paris.")
        );
        // judgments need the outgoing direction
        let m = pattern_match(PatternKind::Judgment, "capital", "paris");
        assert_eq!(generate_answer(&m, &g, "capital", &record("paris")), None);
    }

    #[test]
    fn first_triple_wins_for_multi_valued() {
        let g = sg("x", &[("x", "child", "a"), ("x", "child", "b")]);
        let m = pattern_match(PatternKind::Factoid, "child", "");
        assert_eq!(
            generate_answer(&m, &g, "child", &record("x")).as_deref(),
            Some("The child of x is a.")
        );
    }

    #[test]
    fn search_recall_for_unindexed_mentions() {
        let (store, _) = TripleStore::parse_triples("france\tcapital\tparis\nparis\tpopulation\t2 million\n");
        let records = records_for(&store, [("paris", 0)]);
        let index = Index::build(&store, &records, IndexParams::default()).unwrap();
        let dict = Dictionary::build([("france", "france"), ("paris", "paris")]);
        let engine = QaEngine::with_dictionary(
            index,
            dict,
            pattern::default_patterns(),
            PredicateAliasTable::default(),
        );
        let r = engine.answer("What is the capital of France?");
        assert_eq!(r.status, QaStatus::Answered);
        assert_eq!(r.answer.as_deref(), Some("The capital of france is paris."));
        assert!(r.score.unwrap() > 0.0 && r.score.unwrap() != 1.0);
    }
}
