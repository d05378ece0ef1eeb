//! Knowledge-graph question answering over precomputed entity sub-graphs.
//!
//! The offline path loads a triple file ([`kg`]), mines frequently asked
//! entities from question logs ([`miner`]), extracts a 1-hop sub-graph per
//! entity and indexes those sub-graphs with field-boosted BM25 ([`index`]).
//! The online path ([`engine`]) recognizes the entity in a question, recalls
//! its sub-graph, fills a question template and renders an answer using only
//! the recalled sub-graph.

pub mod engine;
pub mod error;
pub mod index;
pub mod kg;
pub mod miner;
pub mod pattern;
pub mod synth;
pub mod text;

pub use engine::{PredicateAliasTable, QaEngine, QaResult, QaStatus};
pub use error::{Error, Result};
pub use index::{Index, IndexParams, SubGraph};
pub use kg::{Triple, TripleStore};
pub use miner::{EntityRecord, MiningConfig};
pub use pattern::{PatternKind, PatternMatch, QuestionPattern};
pub use text::{normalize_label, tokenize, Dictionary, EntityMatch, Token};
