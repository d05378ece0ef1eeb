//! In-memory triple store with subject/object incidence maps.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::normalize_label;

/// One `(subject, predicate, object)` edge. All three labels are normalized.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Triple {
    /// Normalizes the three labels; `None` if any is empty afterwards.
    pub fn new(subject: &str, predicate: &str, object: &str) -> Option<Self> {
        let t = Triple {
            subject: normalize_label(subject),
            predicate: normalize_label(predicate),
            object: normalize_label(object),
        };
        if t.subject.is_empty() || t.predicate.is_empty() || t.object.is_empty() {
            None
        } else {
            Some(t)
        }
    }

    pub fn is_incident(&self, entity: &str) -> bool {
        self.subject == entity || self.object == entity
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TripleStore {
    triples: Vec<Triple>,
    by_subject: HashMap<String, Vec<usize>>,
    by_object: HashMap<String, Vec<usize>>,
    alias_map: BTreeMap<String, String>,
}

impl TripleStore {
    /// Reads a `subject<TAB>predicate<TAB>object` file. Returns the store and
    /// the number of skipped malformed lines.
    pub fn load_triples(path: impl AsRef<Path>) -> Result<(Self, usize)> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse_triples(&content))
    }

    pub fn parse_triples(content: &str) -> (Self, usize) {
        let mut warnings = 0;
        let mut parsed = Vec::new();
        for line in content.lines() {
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                [s, p, o] => match Triple::new(s, p, o) {
                    Some(t) => parsed.push(t),
                    None => warnings += 1,
                },
                // trailing blank line is not a triple
                [only] if only.trim().is_empty() => {}
                _ => warnings += 1,
            }
        }
        (Self::from_triples(parsed), warnings)
    }

    /// Builds a store keeping the first occurrence of every triple.
    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut store = TripleStore::default();
        let mut seen = HashSet::new();
        for t in triples {
            if seen.contains(&t) {
                continue;
            }
            seen.insert(t.clone());
            let pos = store.triples.len();
            store.by_subject.entry(t.subject.clone()).or_default().push(pos);
            store.by_object.entry(t.object.clone()).or_default().push(pos);
            store.triples.push(t);
        }
        store
    }

    /// Reads an `entity<TAB>alias` file into the alias map. Returns the
    /// number of skipped lines (malformed, or canonical label not in the KG).
    pub fn load_aliases(&mut self, path: impl AsRef<Path>) -> Result<usize> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(self.parse_aliases(&content))
    }

    pub fn parse_aliases(&mut self, content: &str) -> usize {
        let mut warnings = 0;
        for line in content.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(entity), Some(alias), None) = (fields.next(), fields.next(), fields.next())
            else {
                warnings += 1;
                continue;
            };
            if !self.add_alias(entity, alias) {
                warnings += 1;
            }
        }
        warnings
    }

    /// Adds one alias; false if either side is empty or the entity is unknown.
    pub fn add_alias(&mut self, entity: &str, alias: &str) -> bool {
        let entity = normalize_label(entity);
        let alias = normalize_label(alias);
        if entity.is_empty() || alias.is_empty() || !self.contains_label(&entity) {
            return false;
        }
        self.alias_map.insert(alias, entity);
        true
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn alias_map(&self) -> &BTreeMap<String, String> {
        &self.alias_map
    }

    /// True if `label` is the subject or object of at least one triple.
    pub fn contains_label(&self, label: &str) -> bool {
        self.by_subject.contains_key(label) || self.by_object.contains_key(label)
    }

    /// Canonical label for a normalized mention: the label itself if it is in
    /// the KG, otherwise its alias target.
    pub fn resolve(&self, mention: &str) -> Option<&str> {
        if let Some((label, _)) = self.by_subject.get_key_value(mention) {
            return Some(label);
        }
        if let Some((label, _)) = self.by_object.get_key_value(mention) {
            return Some(label);
        }
        self.alias_map.get(mention).map(String::as_str)
    }

    /// Distinct subject labels in first-appearance order.
    pub fn subjects(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.triples
            .iter()
            .filter(|t| seen.insert(t.subject.as_str()))
            .map(|t| t.subject.as_str())
            .collect()
    }

    /// Every triple whose subject or object is `entity`, in store order.
    pub fn incident_triples(&self, entity: &str) -> Vec<&Triple> {
        let empty = Vec::new();
        let subj = self.by_subject.get(entity).unwrap_or(&empty);
        let obj = self.by_object.get(entity).unwrap_or(&empty);
        let mut out = Vec::with_capacity(subj.len() + obj.len());
        let (mut i, mut j) = (0, 0);
        while i < subj.len() || j < obj.len() {
            let next = match (subj.get(i), obj.get(j)) {
                (Some(&a), Some(&b)) if a == b => {
                    i += 1;
                    j += 1;
                    a
                }
                (Some(&a), Some(&b)) if a < b => {
                    i += 1;
                    a
                }
                (Some(_), Some(&b)) => {
                    j += 1;
                    b
                }
                (Some(&a), None) => {
                    i += 1;
                    a
                }
                (None, Some(&b)) => {
                    j += 1;
                    b
                }
                (None, None) => unreachable!(),
            };
            out.push(&self.triples[next]);
        }
        out
    }

    /// Aliases pointing at `entity`, plus the entity itself.
    pub fn aliases_of(&self, entity: &str) -> std::collections::BTreeSet<String> {
        let mut set: std::collections::BTreeSet<String> = self
            .alias_map
            .iter()
            .filter(|(_, target)| target.as_str() == entity)
            .map(|(alias, _)| alias.clone())
            .collect();
        set.insert(entity.to_string());
        set
    }

    /// Alias sets for every entity that has at least one alias.
    pub fn aliases_by_entity(&self) -> HashMap<&str, Vec<&str>> {
        let mut out: HashMap<&str, Vec<&str>> = HashMap::new();
        for (alias, target) in &self.alias_map {
            out.entry(target.as_str()).or_default().push(alias.as_str());
        }
        out
    }

    /// Surface forms for mining: every subject label plus every alias.
    pub fn surface_forms(&self) -> BTreeMap<String, String> {
        let mut forms: BTreeMap<String, String> = self
            .subjects()
            .into_iter()
            .map(|s| (s.to_string(), s.to_string()))
            .collect();
        for (alias, target) in &self.alias_map {
            forms.entry(alias.clone()).or_insert_with(|| target.clone());
        }
        forms
    }

    /// Serializes the triples back to the tab-separated file format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for t in &self.triples {
            out.push_str(&t.subject);
            out.push('\t');
            out.push_str(&t.predicate);
            out.push('\t');
            out.push_str(&t.object);
            out.push('\n');
        }
        out
    }

    #[cfg(test)]
    fn check_incidence_maps(&self) {
        let mut subj_count = 0;
        for (label, positions) in &self.by_subject {
            for &p in positions {
                assert_eq!(&self.triples[p].subject, label);
                subj_count += 1;
            }
        }
        let obj_count: usize = self.by_object.values().map(Vec::len).sum();
        assert_eq!(subj_count, self.triples.len());
        assert_eq!(obj_count, self.triples.len());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(s, p, o).unwrap()
    }

    #[test]
    fn load_dedups_and_normalizes() {
        let (store, warnings) =
            TripleStore::parse_triples("Everest\theight\t8848 m\nEverest\theight\t8848 m\n");
        assert_eq!(warnings, 0);
        assert_eq!(store.triples(), &[t("everest", "height", "8848 m")]);
        store.check_incidence_maps();
    }

    #[test]
    fn load_empty() {
        let (store, warnings) = TripleStore::parse_triples("");
        assert!(store.is_empty());
        assert_eq!(warnings, 0);
    }

    #[test]
    fn malformed_lines_are_counted() {
        let (store, warnings) = TripleStore::parse_triples("a\tb\nx\ty\tz\n");
        assert_eq!(store.len(), 1);
        assert_eq!(warnings, 1);
        let (store, warnings) = TripleStore::parse_triples("a\t \tc\na\tb\tc\td\n");
        assert_eq!(store.len(), 0);
        assert_eq!(warnings, 2);
    }

    #[test]
    fn load_missing_file_is_an_error() {
        let err = TripleStore::load_triples("/nonexistent/kg.tsv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/kg.tsv"));
    }

    #[test]
    fn aliases() {
        let (mut store, _) = TripleStore::parse_triples("Mount Everest\theight\t8848 m\n");
        let w = store.parse_aliases(
            "Mount Everest\tSagarmatha\nAtlantis\tLost City\nmount everest\tMount Everest\n",
        );
        assert_eq!(w, 1);
        assert_eq!(store.alias_map()["sagarmatha"], "mount everest");
        assert_eq!(store.alias_map()["mount everest"], "mount everest");
        assert!(!store.alias_map().contains_key("lost city"));
        assert_eq!(store.resolve("sagarmatha"), Some("mount everest"));
        assert_eq!(store.resolve("8848 m"), Some("8848 m"));
    }

    #[test]
    fn incident_triples_examples() {
        let store = TripleStore::from_triples([t("a", "p", "b"), t("b", "q", "c"), t("c", "r", "a")]);
        assert_eq!(
            store.incident_triples("a"),
            vec![&t("a", "p", "b"), &t("c", "r", "a")]
        );
        assert!(store.incident_triples("zzz").is_empty());

        let store = TripleStore::from_triples([t("a", "p", "a")]);
        assert_eq!(store.incident_triples("a"), vec![&t("a", "p", "a")]);
    }

    fn arb_store() -> impl Strategy<Value = Vec<(u8, u8, u8)>> {
        prop::collection::vec((0u8..8, 0u8..3, 0u8..8), 0..40)
    }

    fn build(raw: &[(u8, u8, u8)]) -> TripleStore {
        TripleStore::from_triples(
            raw.iter()
                .map(|(s, p, o)| t(&format!("e{s}"), &format!("p{p}"), &format!("e{o}"))),
        )
    }

    proptest! {
        #[test]
        fn incidence_matches_brute_force(raw in arb_store(), e in 0u8..9) {
            let store = build(&raw);
            let entity = format!("e{e}");
            let brute: Vec<&Triple> = store
                .triples()
                .iter()
                .filter(|t| t.subject == entity || t.object == entity)
                .collect();
            prop_assert_eq!(store.incident_triples(&entity), brute);
        }

        #[test]
        fn reload_is_idempotent(raw in arb_store()) {
            let store = build(&raw);
            store.check_incidence_maps();
            let (reloaded, warnings) = TripleStore::parse_triples(&store.to_tsv());
            prop_assert_eq!(warnings, 0);
            prop_assert_eq!(&reloaded, &store);
            prop_assert!(store.len() <= raw.len());
        }
    }
}
