//! Question templates with `{e}` (entity), `{p}` (predicate) and `{o}`
//! (object) slots, and the token-level matcher behind them.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{char_slice, is_cjk, token_texts, EntityMatch, Token};

/// Patterns shipped with the crate: three factoid and three judgment forms.
pub const DEFAULT_PATTERNS: &str = include_str!("../data/patterns.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternKind {
    Factoid,
    Judgment,
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternKind::Factoid => "FACTOID",
            PatternKind::Judgment => "JUDGMENT",
        })
    }
}

impl FromStr for PatternKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FACTOID" => Ok(PatternKind::Factoid),
            "JUDGMENT" => Ok(PatternKind::Judgment),
            other => Err(format!("unknown pattern kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    Entity,
    Predicate,
    Object,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Part {
    Literal(String),
    Slot(Slot),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionPattern {
    pub kind: PatternKind,
    pub template: String,
    /// Position in the pattern file; lower is tried first.
    pub priority: usize,
    parts: Vec<Part>,
}

impl QuestionPattern {
    pub fn parse(kind: PatternKind, template: &str, priority: usize) -> Result<Self> {
        let err = |message: String| Error::Template {
            template: template.to_string(),
            message,
        };
        let mut parts = Vec::new();
        let mut counts = [0usize; 3];
        let mut rest = template;
        let mut after_slot = false;
        loop {
            let next = ["{e}", "{p}", "{o}"]
                .iter()
                .filter_map(|s| rest.find(s).map(|i| (i, *s)))
                .min();
            let Some((at, marker)) = next else {
                push_literal(&mut parts, rest);
                break;
            };
            let before = &rest[..at];
            push_literal(&mut parts, before);
            let after = &rest[at + marker.len()..];
            if at == 0 && after_slot {
                return Err(err(format!("slot {marker} directly follows another slot")));
            }
            if before.chars().last().is_some_and(glues) || after.chars().next().is_some_and(glues)
            {
                return Err(err(format!("slot {marker} is not token aligned")));
            }
            let slot = match marker {
                "{e}" => Slot::Entity,
                "{p}" => Slot::Predicate,
                _ => Slot::Object,
            };
            counts[slot as usize] += 1;
            parts.push(Part::Slot(slot));
            after_slot = true;
            rest = after;
        }
        for (name, count) in ["{e}", "{p}"].iter().zip(&counts[..2]) {
            if *count != 1 {
                return Err(err(format!("expected exactly one {name} slot, found {count}")));
            }
        }
        match (kind, counts[2]) {
            (PatternKind::Factoid, 0) | (PatternKind::Judgment, 1) => {}
            (PatternKind::Factoid, n) => {
                return Err(err(format!("factoid patterns take no {{o}} slot, found {n}")))
            }
            (PatternKind::Judgment, n) => {
                return Err(err(format!("judgment patterns need one {{o}} slot, found {n}")))
            }
        }
        Ok(QuestionPattern {
            kind,
            template: template.to_string(),
            priority,
            parts,
        })
    }

    /// Fills the pattern against a question whose entity mention is
    /// already known (it matches `{e}` exactly).
    fn match_with_entity(&self, items: &[Item<'_>]) -> Option<Captures> {
        let mut caps = Captures::default();
        let mut found = None;
        self.walk(0, 0, items, true, &mut caps, &mut |c| {
            found = Some(c.clone());
            true
        });
        found
    }

    /// Capture mode: every slot, `{e}` included, captures a token run.
    /// Candidate `{e}` texts are offered to `accept` in matcher order until
    /// it returns `Some`.
    pub fn capture_entity<T>(
        &self,
        text: &str,
        tokens: &[Token],
        mut accept: impl FnMut(&str) -> Option<T>,
    ) -> Option<T> {
        let items: Vec<Item<'_>> = tokens.iter().map(Item::Token).collect();
        let mut out = None;
        let mut caps = Captures::default();
        self.walk(0, 0, &items, false, &mut caps, &mut |c| {
            let (from, to) = c.entity.expect("entity slot captured");
            let surface = char_slice(text, tokens[from].start, tokens[to - 1].end);
            out = accept(surface);
            out.is_some()
        });
        out
    }

    /// Depth-first alignment; slots take the shortest run that lets the rest
    /// of the template align. Returns true once `done` asks to stop.
    fn walk(
        &self,
        part: usize,
        pos: usize,
        items: &[Item<'_>],
        fixed_entity: bool,
        caps: &mut Captures,
        done: &mut dyn FnMut(&Captures) -> bool,
    ) -> bool {
        let Some(p) = self.parts.get(part) else {
            return pos == items.len() && done(caps);
        };
        match p {
            Part::Literal(lit) => match items.get(pos) {
                Some(Item::Token(t)) if t.text == *lit => {
                    self.walk(part + 1, pos + 1, items, fixed_entity, caps, done)
                }
                _ => false,
            },
            Part::Slot(Slot::Entity) if fixed_entity => match items.get(pos) {
                Some(Item::Entity) => {
                    caps.entity = Some((pos, pos + 1));
                    self.walk(part + 1, pos + 1, items, fixed_entity, caps, done)
                }
                _ => false,
            },
            Part::Slot(slot) => {
                for end in pos + 1..=items.len() {
                    if matches!(items[end - 1], Item::Entity) {
                        break;
                    }
                    caps.set(*slot, (pos, end));
                    if self.walk(part + 1, end, items, fixed_entity, caps, done) {
                        return true;
                    }
                }
                false
            }
        }
    }
}

fn glues(c: char) -> bool {
    c.is_alphanumeric() && !is_cjk(c)
}

fn push_literal(parts: &mut Vec<Part>, text: &str) {
    parts.extend(token_texts(text).into_iter().map(Part::Literal));
}

#[derive(Debug, Clone, Copy)]
enum Item<'a> {
    Token(&'a Token),
    Entity,
}

#[derive(Debug, Clone, Default)]
struct Captures {
    entity: Option<(usize, usize)>,
    predicate: Option<(usize, usize)>,
    object: Option<(usize, usize)>,
}

impl Captures {
    fn set(&mut self, slot: Slot, span: (usize, usize)) {
        match slot {
            Slot::Entity => self.entity = Some(span),
            Slot::Predicate => self.predicate = Some(span),
            Slot::Object => self.object = Some(span),
        }
    }
}

/// A question aligned to a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMatch {
    pub pattern: QuestionPattern,
    pub predicate_phrase: Vec<String>,
    /// Empty for factoid patterns.
    pub object_phrase: Vec<String>,
}

/// Replaces the entity span with a placeholder and returns the first
/// pattern (in priority order) that aligns with the question.
pub fn match_pattern(
    question_tokens: &[Token],
    entity: &EntityMatch,
    patterns: &[QuestionPattern],
) -> Option<PatternMatch> {
    let first = question_tokens.iter().position(|t| t.start == entity.start)?;
    let last = question_tokens.iter().position(|t| t.end == entity.end)?;
    if last < first {
        return None;
    }
    let items: Vec<Item<'_>> = question_tokens[..first]
        .iter()
        .map(Item::Token)
        .chain(std::iter::once(Item::Entity))
        .chain(question_tokens[last + 1..].iter().map(Item::Token))
        .collect();

    let phrase = |span: Option<(usize, usize)>| -> Vec<String> {
        span.map(|(a, b)| {
            items[a..b]
                .iter()
                .filter_map(|i| match i {
                    Item::Token(t) => Some(t.text.clone()),
                    Item::Entity => None,
                })
                .collect()
        })
        .unwrap_or_default()
    };

    patterns.iter().find_map(|pattern| {
        let caps = pattern.match_with_entity(&items)?;
        Some(PatternMatch {
            pattern: pattern.clone(),
            predicate_phrase: phrase(caps.predicate),
            object_phrase: phrase(caps.object),
        })
    })
}

/// Parses `KIND<TAB>template` lines. Blank lines and `#` comments are skipped.
pub fn parse_patterns(content: &str, origin: &Path) -> Result<Vec<QuestionPattern>> {
    let mut patterns = Vec::new();
    for (n, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Pattern {
            path: origin.to_path_buf(),
            line: n + 1,
            message,
        };
        let (kind, template) = line
            .split_once('\t')
            .ok_or_else(|| err("expected KIND<TAB>template".to_string()))?;
        let kind: PatternKind = kind.parse().map_err(err)?;
        let pattern = QuestionPattern::parse(kind, template.trim(), patterns.len())
            .map_err(|e| err(e.to_string()))?;
        patterns.push(pattern);
    }
    Ok(patterns)
}

pub fn load_patterns(path: impl AsRef<Path>) -> Result<Vec<QuestionPattern>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_patterns(&content, path)
}

pub fn default_patterns() -> Vec<QuestionPattern> {
    parse_patterns(DEFAULT_PATTERNS, Path::new("<default patterns>"))
        .expect("bundled patterns are valid")
}
