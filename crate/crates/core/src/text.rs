//! Normalization, tokenization and dictionary entity recognition.
//!
//! The same routines run offline (log mining) and online (question answering)
//! so that surface forms compare equal on both sides.

use std::collections::HashMap;

/// Case-folds, trims, and collapses internal whitespace runs to one space.
pub fn normalize_label(raw: &str) -> String {
    let folded = caseless::default_case_fold_str(raw);
    let mut out = String::with_capacity(folded.len());
    for word in folded.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// A token of normalized text. Offsets count characters, not bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Han ideographs and Japanese kana are tokenized one character at a time.
pub(crate) fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF     // hiragana, katakana
        | 0x3400..=0x4DBF   // ext A
        | 0x4E00..=0x9FFF   // unified ideographs
        | 0xF900..=0xFAFF   // compatibility ideographs
        | 0x20000..=0x2FA1F // ext B and beyond
    )
}

/// Splits normalized text into alphanumeric runs and single CJK characters.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut run_start = 0;
    for (pos, c) in text.chars().enumerate() {
        if is_cjk(c) {
            flush(&mut tokens, &mut current, run_start, pos);
            tokens.push(Token {
                text: c.to_string(),
                start: pos,
                end: pos + 1,
            });
        } else if c.is_alphanumeric() {
            if current.is_empty() {
                run_start = pos;
            }
            current.push(c);
        } else {
            flush(&mut tokens, &mut current, run_start, pos);
        }
    }
    let total = text.chars().count();
    flush(&mut tokens, &mut current, run_start, total);
    tokens
}

fn flush(tokens: &mut Vec<Token>, current: &mut String, start: usize, end: usize) {
    if !current.is_empty() {
        tokens.push(Token {
            text: std::mem::take(current),
            start,
            end,
        });
    }
}

/// Token texts of `text` after normalization.
pub fn token_texts(text: &str) -> Vec<String> {
    tokenize(&normalize_label(text))
        .into_iter()
        .map(|t| t.text)
        .collect()
}

/// A recognized entity mention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMatch {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub entity: String,
}

/// Surface forms shorter than this many characters are not indexed.
pub const MIN_SURFACE_CHARS: usize = 2;

/// Immutable surface form → canonical entity matcher.
///
/// Matches are token aligned, so lookups walk token spans of the input and
/// probe a hash map with the covered slice. The longest span probed is the
/// largest token count of any surface form.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    surfaces: HashMap<String, String>,
    max_tokens: usize,
    warnings: usize,
}

impl Dictionary {
    pub fn build<I, S, C>(surface_forms: I) -> Self
    where
        I: IntoIterator<Item = (S, C)>,
        S: Into<String>,
        C: Into<String>,
    {
        let mut dict = Dictionary::default();
        for (surface, canonical) in surface_forms {
            let surface = surface.into();
            if surface.chars().count() < MIN_SURFACE_CHARS {
                dict.warnings += 1;
                continue;
            }
            let n = tokenize(&surface).len();
            dict.max_tokens = dict.max_tokens.max(n);
            dict.surfaces.insert(surface, canonical.into());
        }
        dict
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    /// Surfaces rejected at build time.
    pub fn warnings(&self) -> usize {
        self.warnings
    }

    pub fn get(&self, surface: &str) -> Option<&str> {
        self.surfaces.get(surface).map(String::as_str)
    }

    /// Longest-match, leftmost-tie-break, non-overlapping recognition.
    pub fn recognize(&self, text: &str) -> Vec<EntityMatch> {
        if self.surfaces.is_empty() {
            return Vec::new();
        }
        let tokens = tokenize(text);
        self.recognize_tokens(text, &tokens)
    }

    pub(crate) fn recognize_tokens(&self, text: &str, tokens: &[Token]) -> Vec<EntityMatch> {
        if self.surfaces.is_empty() || tokens.is_empty() {
            return Vec::new();
        }
        let byte_at = char_byte_offsets(text);

        // (token_from, token_to_inclusive, match)
        let mut found: Vec<(usize, usize, EntityMatch)> = Vec::new();
        for i in 0..tokens.len() {
            let last = tokens.len().min(i + self.max_tokens);
            for j in i..last {
                let (start, end) = (tokens[i].start, tokens[j].end);
                let slice = &text[byte_at[start]..byte_at[end]];
                if let Some(entity) = self.surfaces.get(slice) {
                    found.push((
                        i,
                        j,
                        EntityMatch {
                            start,
                            end,
                            surface: slice.to_string(),
                            entity: entity.clone(),
                        },
                    ));
                }
            }
        }

        found.sort_by(|a, b| {
            let la = a.2.end - a.2.start;
            let lb = b.2.end - b.2.start;
            lb.cmp(&la).then(a.2.start.cmp(&b.2.start))
        });
        let mut taken = vec![false; tokens.len()];
        let mut selected = Vec::new();
        for (i, j, m) in found {
            if taken[i..=j].iter().any(|&t| t) {
                continue;
            }
            taken[i..=j].iter_mut().for_each(|t| *t = true);
            selected.push(m);
        }
        selected.sort_by_key(|m| m.start);
        selected
    }
}

/// Byte offset of every char index, plus the total length at the end.
pub(crate) fn char_byte_offsets(text: &str) -> Vec<usize> {
    let mut offsets: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
    offsets.push(text.len());
    offsets
}

/// Slice of `text` between two char offsets.
pub(crate) fn char_slice(text: &str, start: usize, end: usize) -> &str {
    let offsets = char_byte_offsets(text);
    &text[offsets[start]..offsets[end]]
}
