//! On-disk index directory.
//!
//! ```text
//! manifest.json     format, version, counts, avgdl, params, file checksums
//! entities.jsonl    {"doc_id","entity","aliases","frequency"} in doc_id order
//! subgraphs.jsonl   {"doc_id","center","triples":[[s,p,o],..]} in doc_id order
//! postings.jsonl    {"term","postings":[[doc_id,[name,alias,predicate,object]],..]}
//!                   terms in lexicographic order, postings by doc_id
//! ```
//!
//! Object keys are written in the field order of the structs below. Floats
//! appear only in the manifest and are written with 17 significant digits,
//! so a save of the same build is byte-identical.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use super::{FieldBoosts, Index, IndexParams, Posting, SubGraph, FIELD_COUNT};
use crate::error::{Error, Result};
use crate::kg::Triple;
use crate::miner::EntityRecord;

pub const FORMAT_VERSION: u32 = 1;
const FORMAT_NAME: &str = "kgqa-subgraph-index";

const MANIFEST: &str = "manifest.json";
const ENTITIES: &str = "entities.jsonl";
const SUBGRAPHS: &str = "subgraphs.jsonl";
const POSTINGS: &str = "postings.jsonl";

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    documents: usize,
    terms: usize,
    triples: usize,
    avgdl: Box<RawValue>,
    params: ManifestParams,
    files: Vec<FileEntry>,
}

#[derive(Serialize, Deserialize)]
struct ManifestParams {
    k1: Box<RawValue>,
    b: Box<RawValue>,
    boosts: ManifestBoosts,
    top_k: usize,
}

#[derive(Serialize, Deserialize)]
struct ManifestBoosts {
    name: Box<RawValue>,
    alias: Box<RawValue>,
    predicate: Box<RawValue>,
    object: Box<RawValue>,
}

#[derive(Serialize, Deserialize)]
struct FileEntry {
    name: String,
    bytes: u64,
    sha256: String,
}

#[derive(Serialize, Deserialize)]
struct EntityLine {
    doc_id: u32,
    entity: String,
    aliases: BTreeSet<String>,
    frequency: u64,
}

#[derive(Serialize, Deserialize)]
struct SubGraphLine {
    doc_id: u32,
    center: String,
    triples: Vec<(String, String, String)>,
}

#[derive(Serialize, Deserialize)]
struct PostingLine {
    term: String,
    postings: Vec<(u32, [u32; FIELD_COUNT])>,
}

fn float(x: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{x:.16e}")).expect("formatted float is valid JSON")
}

fn parse_float(raw: &RawValue, what: &str, path: &Path) -> Result<f64> {
    raw.get()
        .parse()
        .map_err(|_| Error::corrupt(path, format!("{what} is not a number: {}", raw.get())))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn jsonl<T: Serialize>(rows: impl Iterator<Item = T>) -> Vec<u8> {
    let mut out = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut out, &row).expect("in-memory serialization");
        out.push(b'\n');
    }
    out
}

impl Index {
    /// Serialized directory contents as `(file name, bytes)`, manifest last.
    pub fn to_files(&self) -> Vec<(&'static str, Vec<u8>)> {
        let entities = jsonl(self.records.iter().enumerate().map(|(i, r)| EntityLine {
            doc_id: i as u32,
            entity: r.entity.clone(),
            aliases: r.aliases.clone(),
            frequency: r.frequency,
        }));
        let subgraphs = jsonl(self.subgraphs.iter().enumerate().map(|(i, sg)| SubGraphLine {
            doc_id: i as u32,
            center: sg.center.clone(),
            triples: sg
                .triples
                .iter()
                .map(|t| (t.subject.clone(), t.predicate.clone(), t.object.clone()))
                .collect(),
        }));
        let postings = jsonl(self.terms().into_iter().map(|term| PostingLine {
            term: term.to_string(),
            postings: self.postings[term]
                .postings
                .iter()
                .map(|p| (p.doc_id, p.tf))
                .collect(),
        }));

        let mut files = vec![(ENTITIES, entities), (SUBGRAPHS, subgraphs), (POSTINGS, postings)];
        let p = &self.params;
        let manifest = Manifest {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            documents: self.docs.len(),
            terms: self.postings.len(),
            triples: self.subgraphs.iter().map(|sg| sg.triples.len()).sum(),
            avgdl: float(self.avgdl),
            params: ManifestParams {
                k1: float(p.k1),
                b: float(p.b),
                boosts: ManifestBoosts {
                    name: float(p.boosts.name),
                    alias: float(p.boosts.alias),
                    predicate: float(p.boosts.predicate),
                    object: float(p.boosts.object),
                },
                top_k: p.top_k,
            },
            files: files
                .iter()
                .map(|(name, bytes)| FileEntry {
                    name: name.to_string(),
                    bytes: bytes.len() as u64,
                    sha256: sha256_hex(bytes),
                })
                .collect(),
        };
        let mut manifest_bytes =
            serde_json::to_vec_pretty(&manifest).expect("in-memory serialization");
        manifest_bytes.push(b'\n');
        files.push((MANIFEST, manifest_bytes));
        files
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, bytes) in self.to_files() {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest_path = dir.join(MANIFEST);
        let raw = fs::read(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: Manifest = serde_json::from_slice(&raw)
            .map_err(|e| Error::corrupt(&manifest_path, e.to_string()))?;
        if manifest.format != FORMAT_NAME {
            return Err(Error::corrupt(
                &manifest_path,
                format!("unknown format {:?}", manifest.format),
            ));
        }
        if manifest.version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: manifest.version,
                expected: FORMAT_VERSION,
            });
        }

        let mp = &manifest.params;
        let params = IndexParams {
            k1: parse_float(&mp.k1, "k1", &manifest_path)?,
            b: parse_float(&mp.b, "b", &manifest_path)?,
            boosts: FieldBoosts {
                name: parse_float(&mp.boosts.name, "name boost", &manifest_path)?,
                alias: parse_float(&mp.boosts.alias, "alias boost", &manifest_path)?,
                predicate: parse_float(&mp.boosts.predicate, "predicate boost", &manifest_path)?,
                object: parse_float(&mp.boosts.object, "object boost", &manifest_path)?,
            },
            top_k: mp.top_k,
        };
        let avgdl = parse_float(&manifest.avgdl, "avgdl", &manifest_path)?;

        let read_checked = |name: &str| -> Result<String> {
            let path = dir.join(name);
            let entry = manifest
                .files
                .iter()
                .find(|f| f.name == name)
                .ok_or_else(|| Error::corrupt(&manifest_path, format!("no entry for {name}")))?;
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if bytes.len() as u64 != entry.bytes || sha256_hex(&bytes) != entry.sha256 {
                return Err(Error::corrupt(&path, "checksum mismatch"));
            }
            String::from_utf8(bytes).map_err(|_| Error::corrupt(&path, "not UTF-8"))
        };

        let entities_path = dir.join(ENTITIES);
        let mut records = Vec::with_capacity(manifest.documents);
        for (i, line) in read_checked(ENTITIES)?.lines().enumerate() {
            let row: EntityLine = serde_json::from_str(line)
                .map_err(|e| Error::corrupt(&entities_path, format!("line {}: {e}", i + 1)))?;
            if row.doc_id as usize != i {
                return Err(Error::corrupt(&entities_path, format!("line {}: doc_id gap", i + 1)));
            }
            records.push(EntityRecord {
                entity: row.entity,
                aliases: row.aliases,
                frequency: row.frequency,
            });
        }

        let subgraphs_path = dir.join(SUBGRAPHS);
        let mut subgraphs = Vec::with_capacity(manifest.documents);
        for (i, line) in read_checked(SUBGRAPHS)?.lines().enumerate() {
            let row: SubGraphLine = serde_json::from_str(line)
                .map_err(|e| Error::corrupt(&subgraphs_path, format!("line {}: {e}", i + 1)))?;
            if row.doc_id as usize != i || records.get(i).map(|r| &r.entity) != Some(&row.center)
            {
                return Err(Error::corrupt(
                    &subgraphs_path,
                    format!("line {}: does not match entities.jsonl", i + 1),
                ));
            }
            subgraphs.push(SubGraph {
                center: row.center,
                triples: row
                    .triples
                    .into_iter()
                    .map(|(subject, predicate, object)| Triple {
                        subject,
                        predicate,
                        object,
                    })
                    .collect(),
            });
        }
        if records.len() != manifest.documents || subgraphs.len() != manifest.documents {
            return Err(Error::corrupt(&manifest_path, "document count mismatch"));
        }

        let index = Index::from_parts(params, records, subgraphs)?;

        // The postings file must agree with what the documents imply.
        let postings_path = dir.join(POSTINGS);
        let mut terms = 0;
        let mut previous: Option<String> = None;
        for (i, line) in read_checked(POSTINGS)?.lines().enumerate() {
            let corrupt = |m: String| Error::corrupt(&postings_path, format!("line {}: {m}", i + 1));
            let row: PostingLine = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
            if previous.as_ref().is_some_and(|p| *p >= row.term) {
                return Err(corrupt("terms out of order".into()));
            }
            let stored: Vec<Posting> = row
                .postings
                .iter()
                .map(|&(doc_id, tf)| Posting { doc_id, tf })
                .collect();
            match index.postings.get(&row.term) {
                Some(list) if list.postings == stored => {}
                _ => return Err(corrupt(format!("postings for {:?} disagree", row.term))),
            }
            terms += 1;
            previous = Some(row.term);
        }
        if terms != index.postings.len() || terms != manifest.terms {
            return Err(Error::corrupt(&postings_path, "term count mismatch"));
        }
        if index.avgdl.to_bits() != avgdl.to_bits() {
            return Err(Error::corrupt(&manifest_path, "avgdl disagrees with documents"));
        }
        Ok(index)
    }
}
