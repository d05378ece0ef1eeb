//! Brute-force reference implementations. These deliberately avoid the
//! library's indexes, tokenizer and scoring code paths.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use kgqa_core::Triple;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `{t : t.subject = e or t.object = e}` in input order.
pub fn brute_incident(triples: &[Triple], entity: &str) -> Vec<Triple> {
    triples
        .iter()
        .filter(|t| t.subject == entity || t.object == entity)
        .cloned()
        .collect()
}

/// Random KG with at most `max_entities` entities and `max_triples` edges.
pub fn random_kg(rng: &mut ChaCha8Rng, max_entities: usize, max_triples: usize) -> Vec<Triple> {
    let n = rng.random_range(1..=max_entities);
    let m = rng.random_range(0..=max_triples);
    (0..m)
        .map(|_| {
            let s = rng.random_range(0..n);
            let o = rng.random_range(0..n);
            let p = rng.random_range(0..6);
            Triple::new(&format!("e{s}"), &format!("p{p}"), &format!("e{o}")).unwrap()
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Character-offset spans of alphanumeric words, ASCII-only fixtures.
fn word_spans(chars: &[char]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_alphanumeric() {
            let start = i;
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            spans.push((start, i));
        } else {
            i += 1;
        }
    }
    spans
}

/// Enumerates every substring, keeps dictionary hits whose ends sit on token
/// boundaries, then picks longest-first (leftmost on ties) without overlap.
pub fn brute_recognize(
    text: &str,
    surfaces: &BTreeMap<String, String>,
) -> Vec<(usize, usize, String, String)> {
    let chars: Vec<char> = text.chars().collect();
    let spans = word_spans(&chars);
    let starts: BTreeSet<usize> = spans.iter().map(|s| s.0).collect();
    let ends: BTreeSet<usize> = spans.iter().map(|s| s.1).collect();
    let mut hits = Vec::new();
    for i in 0..chars.len() {
        for j in i + 1..=chars.len() {
            let sub: String = chars[i..j].iter().collect();
            if sub.chars().count() < 2 {
                continue;
            }
            if let Some(entity) = surfaces.get(&sub) {
                if starts.contains(&i) && ends.contains(&j) {
                    hits.push((i, j, sub, entity.clone()));
                }
            }
        }
    }
    hits.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)));
    let mut chosen: Vec<(usize, usize, String, String)> = Vec::new();
    for h in hits {
        if chosen.iter().all(|c| h.1 <= c.0 || c.1 <= h.0) {
            chosen.push(h);
        }
    }
    chosen.sort_by_key(|c| c.0);
    chosen
}

fn words(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// One document in the closed-form evaluator: raw field word lists.
pub struct OracleDoc {
    pub fields: [Vec<String>; 4],
}

impl OracleDoc {
    /// name, aliases, predicates, far-end labels of a center's triples.
    pub fn new(center: &str, aliases: &[&str], triples: &[Triple]) -> Self {
        let name = words(center);
        let alias = aliases.iter().flat_map(|a| words(a)).collect();
        let predicate = triples.iter().flat_map(|t| words(&t.predicate)).collect();
        let object = triples
            .iter()
            .flat_map(|t| words(if t.subject == center { &t.object } else { &t.subject }))
            .collect();
        OracleDoc {
            fields: [name, alias, predicate, object],
        }
    }
}

pub struct Bm25Oracle {
    pub docs: Vec<OracleDoc>,
    pub k1: f64,
    pub b: f64,
    pub boosts: [f64; 4],
}

impl Bm25Oracle {
    pub fn new(docs: Vec<OracleDoc>) -> Self {
        Bm25Oracle {
            docs,
            k1: 1.2,
            b: 0.75,
            boosts: [3.0, 2.0, 1.0, 1.0],
        }
    }

    fn dl(&self, d: &OracleDoc) -> f64 {
        (0..4).map(|f| self.boosts[f] * d.fields[f].len() as f64).sum()
    }

    fn wtf(&self, d: &OracleDoc, term: &str) -> f64 {
        (0..4)
            .map(|f| self.boosts[f] * d.fields[f].iter().filter(|w| *w == term).count() as f64)
            .sum()
    }

    pub fn score(&self, query: &[String], doc: usize) -> f64 {
        let n = self.docs.len() as f64;
        let avgdl = self.docs.iter().map(|d| self.dl(d)).sum::<f64>() / n;
        let d = &self.docs[doc];
        let distinct: BTreeSet<&String> = query.iter().collect();
        let mut total = 0.0;
        for term in distinct {
            let df = self.docs.iter().filter(|d| self.wtf(d, term) > 0.0).count() as f64;
            let wtf = self.wtf(d, term);
            if df == 0.0 || wtf == 0.0 {
                continue;
            }
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            total += idf * wtf * (self.k1 + 1.0)
                / (wtf + self.k1 * (1.0 - self.b + self.b * self.dl(d) / avgdl));
        }
        total
    }
}

/// The three-document scoring fixture: `(center, aliases, triples)`. Each
/// triple list is the full incidence set of its center.
pub fn three_doc_corpus() -> Vec<(&'static str, Vec<&'static str>, Vec<Triple>)> {
    let t = |s: &str, p: &str, o: &str| Triple::new(s, p, o).unwrap();
    vec![
        (
            "mount everest",
            vec!["everest", "mount everest", "sagarmatha"],
            vec![
                t("mount everest", "height", "8848 m"),
                t("mount everest", "located in", "nepal"),
                t("mount everest", "mountain range", "himalayas"),
                t("tenzing norgay", "climbed", "mount everest"),
                t("nepal", "mountain", "mount everest"),
            ],
        ),
        (
            "k2",
            vec!["chhogori", "k2"],
            vec![
                t("k2", "height", "8611 m"),
                t("k2", "located in", "pakistan"),
                t("k2", "mountain range", "karakoram"),
            ],
        ),
        (
            "nepal",
            vec!["nepal"],
            vec![
                t("mount everest", "located in", "nepal"),
                t("nepal", "capital", "kathmandu"),
                t("nepal", "continent", "asia"),
                t("nepal", "mountain", "mount everest"),
            ],
        ),
    ]
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}
