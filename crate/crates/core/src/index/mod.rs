//! Per-entity 1-hop sub-graphs and a field-boosted BM25 inverted index
//! over them.
//!
//! Each selected entity becomes one document with four fields: its
//! canonical name, its aliases, the predicates of its sub-graph and the
//! labels at the far end of each incident triple. Sub-graphs are stored
//! whole next to the postings, so answering never needs the full KG.

mod persist;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

pub use persist::FORMAT_VERSION;

use crate::error::{Error, Result};
use crate::kg::{Triple, TripleStore};
use crate::miner::EntityRecord;
use crate::text::tokenize;

/// A center entity and every triple incident to it, in store order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubGraph {
    pub center: String,
    pub triples: Vec<Triple>,
}

impl SubGraph {
    /// Distinct predicates in first-appearance order.
    pub fn predicates(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.triples
            .iter()
            .map(|t| t.predicate.as_str())
            .filter(|p| seen.insert(*p))
            .collect()
    }

    pub fn has_predicate(&self, predicate: &str) -> bool {
        self.triples.iter().any(|t| t.predicate == predicate)
    }
}

pub fn extract_subgraph(store: &TripleStore, entity: &str) -> SubGraph {
    SubGraph {
        center: entity.to_string(),
        triples: store.incident_triples(entity).into_iter().cloned().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Name = 0,
    Alias = 1,
    Predicate = 2,
    Object = 3,
}

pub const FIELD_COUNT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldBoosts {
    pub name: f64,
    pub alias: f64,
    pub predicate: f64,
    pub object: f64,
}

impl FieldBoosts {
    fn as_array(&self) -> [f64; FIELD_COUNT] {
        [self.name, self.alias, self.predicate, self.object]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexParams {
    pub k1: f64,
    pub b: f64,
    pub boosts: FieldBoosts,
    pub top_k: usize,
}

impl Default for IndexParams {
    fn default() -> Self {
        IndexParams {
            k1: 1.2,
            b: 0.75,
            boosts: FieldBoosts {
                name: 3.0,
                alias: 2.0,
                predicate: 1.0,
                object: 1.0,
            },
            top_k: 3,
        }
    }
}

impl IndexParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0 && self.k1.is_finite()) {
            return Err(Error::InvalidParams(format!("k1 must be > 0, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidParams(format!("b must be in [0, 1], got {}", self.b)));
        }
        if self.boosts.as_array().iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParams("field boosts must be > 0".into()));
        }
        if self.top_k == 0 {
            return Err(Error::InvalidParams("top_k must be positive".into()));
        }
        Ok(())
    }
}

/// Tokenized fields of one indexed sub-graph.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexDocument {
    pub doc_id: u32,
    pub entity: String,
    pub field_tokens: [Vec<String>; FIELD_COUNT],
    pub field_lengths: [u32; FIELD_COUNT],
}

impl IndexDocument {
    fn new(doc_id: u32, record: &EntityRecord, subgraph: &SubGraph) -> Self {
        let toks = |s: &str| tokenize(s).into_iter().map(|t| t.text);
        let name: Vec<String> = toks(&record.entity).collect();
        let alias: Vec<String> = record.aliases.iter().flat_map(|a| toks(a)).collect();
        let predicate: Vec<String> =
            subgraph.triples.iter().flat_map(|t| toks(&t.predicate)).collect();
        let object: Vec<String> = subgraph
            .triples
            .iter()
            .flat_map(|t| toks(far_end(t, &subgraph.center)))
            .collect();
        let field_tokens = [name, alias, predicate, object];
        let field_lengths = field_tokens.each_ref().map(|f| f.len() as u32);
        IndexDocument {
            doc_id,
            entity: record.entity.clone(),
            field_tokens,
            field_lengths,
        }
    }
}

/// The label on the other side of `t` from `center`.
fn far_end<'a>(t: &'a Triple, center: &str) -> &'a str {
    if t.subject == center {
        &t.object
    } else {
        &t.subject
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc_id: u32,
    pub tf: [u32; FIELD_COUNT],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostingList {
    pub term: String,
    pub postings: Vec<Posting>,
}

impl PostingList {
    pub fn df(&self) -> usize {
        self.postings.len()
    }

    fn get(&self, doc_id: u32) -> Option<&Posting> {
        self.postings
            .binary_search_by_key(&doc_id, |p| p.doc_id)
            .ok()
            .map(|i| &self.postings[i])
    }
}

#[derive(Debug, Clone)]
pub struct Index {
    params: IndexParams,
    records: Vec<EntityRecord>,
    subgraphs: Vec<SubGraph>,
    docs: Vec<IndexDocument>,
    postings: HashMap<String, PostingList>,
    by_entity: HashMap<String, u32>,
    /// Boost-weighted document lengths.
    doc_lengths: Vec<f64>,
    avgdl: f64,
}

impl Index {
    /// One document per record, `doc_id` = position in `records`.
    pub fn build(store: &TripleStore, records: &[EntityRecord], params: IndexParams) -> Result<Self> {
        let subgraphs = records
            .iter()
            .map(|r| extract_subgraph(store, &r.entity))
            .collect();
        Self::from_parts(params, records.to_vec(), subgraphs)
    }

    fn from_parts(
        params: IndexParams,
        records: Vec<EntityRecord>,
        subgraphs: Vec<SubGraph>,
    ) -> Result<Self> {
        params.validate()?;
        let mut by_entity = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if by_entity.insert(r.entity.clone(), i as u32).is_some() {
                return Err(Error::DuplicateEntity(r.entity.clone()));
            }
        }
        let docs: Vec<IndexDocument> = records
            .iter()
            .zip(&subgraphs)
            .enumerate()
            .map(|(i, (r, sg))| IndexDocument::new(i as u32, r, sg))
            .collect();

        let mut postings: HashMap<String, PostingList> = HashMap::new();
        for doc in &docs {
            let mut per_doc: HashMap<&str, [u32; FIELD_COUNT]> = HashMap::new();
            for (field, tokens) in doc.field_tokens.iter().enumerate() {
                for t in tokens {
                    per_doc.entry(t.as_str()).or_default()[field] += 1;
                }
            }
            for (term, tf) in per_doc {
                postings
                    .entry(term.to_string())
                    .or_insert_with(|| PostingList {
                        term: term.to_string(),
                        postings: Vec::new(),
                    })
                    .postings
                    .push(Posting {
                        doc_id: doc.doc_id,
                        tf,
                    });
            }
        }

        let mut index = Index {
            params,
            records,
            subgraphs,
            docs,
            postings,
            by_entity,
            doc_lengths: Vec::new(),
            avgdl: 0.0,
        };
        index.compute_lengths();
        Ok(index)
    }

    fn compute_lengths(&mut self) {
        let boosts = self.params.boosts.as_array();
        self.doc_lengths = self
            .docs
            .iter()
            .map(|d| {
                d.field_lengths
                    .iter()
                    .zip(boosts)
                    .map(|(&len, w)| w * len as f64)
                    .sum()
            })
            .collect();
        self.avgdl = if self.doc_lengths.is_empty() {
            0.0
        } else {
            self.doc_lengths.iter().sum::<f64>() / self.doc_lengths.len() as f64
        };
    }

    pub fn params(&self) -> &IndexParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn records(&self) -> &[EntityRecord] {
        &self.records
    }

    pub fn documents(&self) -> &[IndexDocument] {
        &self.docs
    }

    pub fn doc_id(&self, entity: &str) -> Option<u32> {
        self.by_entity.get(entity).copied()
    }

    pub fn record(&self, doc_id: u32) -> Option<&EntityRecord> {
        self.records.get(doc_id as usize)
    }

    pub fn subgraph(&self, doc_id: u32) -> Option<&SubGraph> {
        self.subgraphs.get(doc_id as usize)
    }

    pub fn posting_list(&self, term: &str) -> Option<&PostingList> {
        self.postings.get(term)
    }

    /// Terms in lexicographic order.
    pub fn terms(&self) -> Vec<&str> {
        let mut terms: Vec<&str> = self.postings.keys().map(String::as_str).collect();
        terms.sort_unstable();
        terms
    }

    pub fn bm25_score<S: AsRef<str>>(&self, query_tokens: &[S], doc_id: u32) -> Result<f64> {
        if doc_id as usize >= self.docs.len() {
            return Err(Error::InvalidDocId(doc_id));
        }
        Ok(self.score_distinct(&distinct(query_tokens), doc_id))
    }

    fn score_distinct(&self, terms: &[&str], doc_id: u32) -> f64 {
        let IndexParams { k1, b, boosts, .. } = self.params;
        let boosts = boosts.as_array();
        let n = self.docs.len() as f64;
        let norm = 1.0 - b + b * self.doc_lengths[doc_id as usize] / self.avgdl;
        let mut score = 0.0;
        for term in terms {
            let Some(list) = self.postings.get(*term) else {
                continue;
            };
            let Some(posting) = list.get(doc_id) else {
                continue;
            };
            let df = list.df() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            let wtf: f64 = posting
                .tf
                .iter()
                .zip(boosts)
                .map(|(&tf, w)| w * tf as f64)
                .sum();
            score += idf * wtf * (k1 + 1.0) / (wtf + k1 * norm);
        }
        score
    }

    /// Top `k` documents for a normalized query; ties go to the lower doc id.
    pub fn search(&self, query: &str, k: usize) -> Vec<(String, f64)> {
        self.search_docs(query, k)
            .into_iter()
            .map(|(doc, score)| (self.records[doc as usize].entity.clone(), score))
            .collect()
    }

    pub fn search_docs(&self, query: &str, k: usize) -> Vec<(u32, f64)> {
        if k == 0 || self.docs.is_empty() {
            return Vec::new();
        }
        let tokens: Vec<String> = tokenize(query).into_iter().map(|t| t.text).collect();
        let terms = distinct(&tokens);
        let mut candidates: Vec<u32> = terms
            .iter()
            .filter_map(|t| self.postings.get(*t))
            .flat_map(|list| list.postings.iter().map(|p| p.doc_id))
            .collect();
        candidates.sort_unstable();
        candidates.dedup();

        let mut scored: Vec<(u32, f64)> = candidates
            .into_iter()
            .map(|doc| (doc, self.score_distinct(&terms, doc)))
            .filter(|(_, s)| *s > 0.0)
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(k);
        scored
    }
}

fn distinct<S: AsRef<str>>(tokens: &[S]) -> Vec<&str> {
    let mut seen = HashSet::new();
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| seen.insert(*t))
        .collect()
}
