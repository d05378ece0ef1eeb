//! Offline mining of frequently asked entities from question logs.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::kg::TripleStore;
use crate::pattern::QuestionPattern;
use crate::text::{normalize_label, tokenize, Dictionary};

pub const DEFAULT_MIN_FREQUENCY: u64 = 10;

#[derive(Debug, Clone)]
pub struct MiningConfig {
    /// Entities are kept when their frequency is strictly greater than this.
    pub min_frequency: u64,
    pub capture_patterns: Vec<QuestionPattern>,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            min_frequency: DEFAULT_MIN_FREQUENCY,
            capture_patterns: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub entity: String,
    pub aliases: BTreeSet<String>,
    pub frequency: u64,
}

impl EntityRecord {
    /// Record for `entity` with every alias the store knows for it.
    pub fn from_store(store: &TripleStore, entity: &str, frequency: u64) -> Self {
        EntityRecord {
            entity: entity.to_string(),
            aliases: store.aliases_of(entity),
            frequency,
        }
    }
}

/// Streaming order-preserving deduplication of normalized questions.
#[derive(Debug, Default)]
pub struct Deduper {
    seen: HashSet<String>,
    lines: usize,
}

impl Deduper {
    /// Returns the normalized question the first time it is seen.
    pub fn push(&mut self, raw: &str) -> Option<String> {
        self.lines += 1;
        let q = normalize_label(raw);
        if self.seen.contains(&q) {
            None
        } else {
            self.seen.insert(q.clone());
            Some(q)
        }
    }

    pub fn lines_seen(&self) -> usize {
        self.lines
    }

    pub fn unique(&self) -> usize {
        self.seen.len()
    }
}

pub fn dedup_questions<I, S>(questions: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut dedup = Deduper::default();
    questions
        .into_iter()
        .filter_map(|q| dedup.push(q.as_ref()))
        .collect()
}

/// Canonical entities mentioned in one normalized question: dictionary hits
/// plus `{e}` captures of the configured patterns that resolve to KG labels.
pub fn extract_question_entities(
    question: &str,
    dict: &Dictionary,
    config: &MiningConfig,
    store: &TripleStore,
) -> BTreeSet<String> {
    let tokens = tokenize(question);
    let mut found: BTreeSet<String> = dict
        .recognize_tokens(question, &tokens)
        .into_iter()
        .map(|m| m.entity)
        .collect();
    for pattern in &config.capture_patterns {
        if let Some(label) =
            pattern.capture_entity(question, &tokens, |s| store.resolve(s).map(str::to_string))
        {
            found.insert(label);
        }
    }
    found
}

/// Number of questions mentioning each entity, counted once per question.
pub fn count_frequencies<I, S>(
    questions: I,
    dict: &Dictionary,
    config: &MiningConfig,
    store: &TripleStore,
) -> HashMap<String, u64>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts = HashMap::new();
    for q in questions {
        for entity in extract_question_entities(q.as_ref(), dict, config, store) {
            *counts.entry(entity).or_insert(0) += 1;
        }
    }
    counts
}

/// Entities with `count > min_frequency`, by descending count then label.
pub fn select_high_frequency(
    counts: &HashMap<String, u64>,
    config: &MiningConfig,
    store: &TripleStore,
) -> Vec<EntityRecord> {
    let mut selected: Vec<(&String, u64)> = counts
        .iter()
        .filter(|(_, &c)| c > config.min_frequency)
        .map(|(e, &c)| (e, c))
        .collect();
    selected.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    records_for(store, selected.into_iter().map(|(e, c)| (e.as_str(), c)))
}

/// Builds records for the given `(entity, frequency)` pairs, keeping order.
pub fn records_for<'a>(
    store: &TripleStore,
    entities: impl IntoIterator<Item = (&'a str, u64)>,
) -> Vec<EntityRecord> {
    let by_entity = store.aliases_by_entity();
    entities
        .into_iter()
        .map(|(entity, frequency)| {
            let mut aliases: BTreeSet<String> = by_entity
                .get(entity)
                .into_iter()
                .flatten()
                .map(|a| a.to_string())
                .collect();
            aliases.insert(entity.to_string());
            EntityRecord {
                entity: entity.to_string(),
                aliases,
                frequency,
            }
        })
        .collect()
}

/// One record per distinct subject of the store, frequency zero.
pub fn records_for_all_subjects(store: &TripleStore) -> Vec<EntityRecord> {
    records_for(store, store.subjects().into_iter().map(|s| (s, 0)))
}

/// `entity<TAB>frequency` lines in selection order.
pub fn format_mined(records: &[EntityRecord]) -> String {
    records
        .iter()
        .map(|r| format!("{}\t{}\n", r.entity, r.frequency))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::PatternKind;
    use proptest::prelude::*;

    fn toy_store() -> TripleStore {
        let (mut store, _) = TripleStore::parse_triples(
            "mount everest\theight\t8848 m\nk2\theight\t8611 m\nnepal\tcapital\tkathmandu\n",
        );
        store.parse_aliases("mount everest\teverest\n");
        store
    }

    fn counts(pairs: &[(&str, u64)]) -> HashMap<String, u64> {
        pairs.iter().map(|(e, c)| (e.to_string(), *c)).collect()
    }

    fn labels(records: &[EntityRecord]) -> Vec<(&str, u64)> {
        records.iter().map(|r| (r.entity.as_str(), r.frequency)).collect()
    }

    #[test]
    fn dedup_examples() {
        assert_eq!(dedup_questions(["Hi", "hi ", "HI"]), ["hi"]);
        assert!(dedup_questions(Vec::<String>::new()).is_empty());
        assert_eq!(dedup_questions(["a b", "b a", "a b"]), ["a b", "b a"]);
    }

    #[test]
    fn extraction_examples() {
        let store = toy_store();
        let dict = Dictionary::build([("everest", "mount everest")]);
        let mut config = MiningConfig::default();

        let got = extract_question_entities("what is the height of everest", &dict, &config, &store);
        assert_eq!(got, BTreeSet::from(["mount everest".to_string()]));
        assert!(extract_question_entities("thanks", &dict, &config, &store).is_empty());

        // k2 is in the KG but not in the dictionary
        assert!(extract_question_entities("what is the height of k2", &dict, &config, &store)
            .is_empty());
        config.capture_patterns =
            vec![QuestionPattern::parse(PatternKind::Factoid, "what is the {p} of {e}", 0).unwrap()];
        let got = extract_question_entities("what is the height of k2", &dict, &config, &store);
        assert_eq!(got, BTreeSet::from(["k2".to_string()]));
        // captures that do not resolve are dropped
        assert!(extract_question_entities("what is the height of atlantis", &dict, &config, &store)
            .is_empty());
    }

    #[test]
    fn counting_is_per_question() {
        let store = toy_store();
        let dict = Dictionary::build([("everest", "mount everest")]);
        let config = MiningConfig::default();
        let c = count_frequencies(
            ["everest height", "climb everest", "everest weather"],
            &dict,
            &config,
            &store,
        );
        assert_eq!(c["mount everest"], 3);
        let c = count_frequencies(["everest or everest"], &dict, &config, &store);
        assert_eq!(c["mount everest"], 1);
        assert!(count_frequencies(Vec::<&str>::new(), &dict, &config, &store).is_empty());
    }

    #[test]
    fn selection_examples() {
        let store = TripleStore::default();
        let config = MiningConfig::default();
        let got = select_high_frequency(&counts(&[("a", 11), ("b", 10), ("c", 12)]), &config, &store);
        assert_eq!(labels(&got), [("c", 12), ("a", 11)]);
        assert!(select_high_frequency(&HashMap::new(), &config, &store).is_empty());
        let config = MiningConfig {
            min_frequency: 1,
            ..Default::default()
        };
        assert_eq!(labels(&select_high_frequency(&counts(&[("a", 5)]), &config, &store)), [("a", 5)]);
    }

    #[test]
    fn selection_ties_by_label_and_aliases() {
        let store = toy_store();
        let config = MiningConfig {
            min_frequency: 0,
            ..Default::default()
        };
        let got = select_high_frequency(&counts(&[("mount everest", 2), ("k2", 2)]), &config, &store);
        assert_eq!(labels(&got), [("k2", 2), ("mount everest", 2)]);
        assert_eq!(
            got[1].aliases,
            BTreeSet::from(["everest".to_string(), "mount everest".to_string()])
        );
        assert_eq!(format_mined(&got), "k2\t2\nmount everest\t2\n");
    }

    proptest! {
        #[test]
        fn dedup_is_idempotent(log in prop::collection::vec("[ aAbB]{0,4}", 0..30)) {
            let once = dedup_questions(&log);
            prop_assert_eq!(dedup_questions(&once), once.clone());
            prop_assert!(once.len() <= log.len());
        }

        #[test]
        fn selection_is_monotone(raw in prop::collection::vec(0u64..30, 0..20), lo in 0u64..15, step in 0u64..15) {
            let c: HashMap<String, u64> =
                raw.iter().enumerate().map(|(i, &n)| (format!("e{i}"), n)).collect();
            let store = TripleStore::default();
            let at = |min| -> BTreeSet<String> {
                let cfg = MiningConfig { min_frequency: min, ..Default::default() };
                select_high_frequency(&c, &cfg, &store).into_iter().map(|r| r.entity).collect()
            };
            prop_assert!(at(lo + step).is_subset(&at(lo)));
        }
    }
}
