//! Deterministic synthetic corpora for tests, benchmarks and demos.
//!
//! Entity names are pairs of invented CVCVCV words, so they never collide
//! with predicate vocabulary or question template words. Every entity gets a
//! fixed number of triples with distinct predicates, which keeps factoid
//! answers single-valued.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kg::{Triple, TripleStore};

pub const PREDICATES: &[&str] = &[
    "height", "population", "capital", "founder", "birth place", "date of birth", "area",
    "currency", "official language", "head of state", "mayor", "length", "elevation",
    "founding year", "genre", "author", "director", "spouse", "parent company", "headquarters",
    "continent", "time zone", "anthem", "motto", "national animal", "main export", "religion",
    "climate", "highest point", "lowest point", "neighbor", "twin city", "patron saint", "coach",
    "stadium", "record label", "publisher", "inventor", "discoverer", "chemical formula",
];

const UNITS: &[&str] = &["m", "km", "people", "units", "points", "tons", "votes"];

pub const CHIT_CHAT: &[&str] = &[
    "thanks, bye",
    "hello there",
    "how are you today",
    "good morning",
    "tell me a joke",
    "i am bored",
    "you are funny",
    "what can you do",
    "are you a robot",
    "thank you so much",
    "see you later",
    "nice to meet you",
    "i do not understand",
    "that is interesting",
    "can you help me",
    "what time is it",
    "lol",
    "ok",
    "goodnight",
    "who made you",
];

/// Factoid question templates; each yields "{p}" and "{e}" aligned to the
/// bundled patterns.
const FACTOID_FORMS: &[&str] = &["what is the {p} of {e}", "who is the {p} of {e}", "what is {e}'s {p}"];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub entities: usize,
    pub triples_per_entity: usize,
    /// Fraction of triples whose object is another entity.
    pub entity_object_ratio: f64,
    /// Fraction of entities that get a one-word alias.
    pub alias_ratio: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            entities: 10_000,
            triples_per_entity: 10,
            entity_object_ratio: 0.5,
            alias_ratio: 0.2,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub entities: Vec<String>,
    /// `(entity, alias)`
    pub aliases: Vec<(String, String)>,
    pub triples: Vec<Triple>,
    seed: u64,
}

fn reserved_words() -> HashSet<String> {
    PREDICATES
        .iter()
        .chain(CHIT_CHAT)
        .chain(UNITS)
        .chain(FACTOID_FORMS)
        .flat_map(|s| crate::text::token_texts(s))
        .collect()
}

fn invent_word(rng: &mut impl Rng) -> String {
    const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
    const VOWELS: &[u8] = b"aeiou";
    let mut w = String::with_capacity(6);
    for _ in 0..3 {
        w.push(*CONSONANTS.choose(rng).unwrap() as char);
        w.push(*VOWELS.choose(rng).unwrap() as char);
    }
    w
}

impl SynthCorpus {
    pub fn generate(config: &SynthConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let reserved = reserved_words();
        let mut used_words: HashSet<String> = HashSet::new();
        let mut fresh_word = |rng: &mut ChaCha8Rng| loop {
            let w = invent_word(rng);
            if !reserved.contains(&w) && used_words.insert(w.clone()) {
                return w;
            }
        };

        let mut entities = Vec::with_capacity(config.entities);
        let mut names = HashSet::new();
        while entities.len() < config.entities {
            let name = format!("{} {}", fresh_word(&mut rng), invent_word(&mut rng));
            if names.insert(name.clone()) {
                entities.push(name);
            }
        }

        let mut aliases = Vec::new();
        for e in &entities {
            if rng.random_bool(config.alias_ratio) {
                aliases.push((e.clone(), fresh_word(&mut rng)));
            }
        }

        let per_entity = config.triples_per_entity.min(PREDICATES.len());
        let mut triples = Vec::with_capacity(config.entities * per_entity);
        let mut preds: Vec<&str> = PREDICATES.to_vec();
        for (i, subject) in entities.iter().enumerate() {
            preds.shuffle(&mut rng);
            for p in &preds[..per_entity] {
                let object = if entities.len() > 1 && rng.random_bool(config.entity_object_ratio) {
                    let mut j = rng.random_range(0..entities.len() - 1);
                    if j >= i {
                        j += 1;
                    }
                    entities[j].clone()
                } else {
                    format!(
                        "{} {}",
                        rng.random_range(1..100_000),
                        UNITS.choose(&mut rng).unwrap()
                    )
                };
                triples.push(Triple::new(subject, p, &object).expect("non-empty labels"));
            }
        }
        SynthCorpus {
            entities,
            aliases,
            triples,
            seed: config.seed,
        }
    }

    pub fn store(&self) -> TripleStore {
        let mut store = TripleStore::from_triples(self.triples.iter().cloned());
        for (entity, alias) in &self.aliases {
            store.add_alias(entity, alias);
        }
        store
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// One factoid question per triple, rotating over the question forms.
    pub fn factoid_questions(&self) -> Vec<(String, &Triple)> {
        self.triples
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let form = FACTOID_FORMS[i % FACTOID_FORMS.len()];
                (form.replace("{p}", &t.predicate).replace("{e}", &t.subject), t)
            })
            .collect()
    }

    /// `(question, expected_yes, true_object)` for triples with literal
    /// objects; every other one has its number perturbed.
    pub fn judgment_questions(&self) -> Vec<(String, bool, &Triple)> {
        let names: HashSet<&str> = self.entities.iter().map(String::as_str).collect();
        self.triples
            .iter()
            .filter(|t| !names.contains(t.object.as_str()))
            .enumerate()
            .map(|(i, t)| {
                let truth = i % 2 == 0;
                let object = if truth {
                    t.object.clone()
                } else {
                    let (num, unit) = t.object.split_once(' ').expect("literal is `n unit`");
                    let n: u64 = num.parse().expect("numeric literal");
                    format!("{} {unit}", n + 1)
                };
                (
                    format!("is the {} of {} {}", t.predicate, t.subject, object),
                    truth,
                    t,
                )
            })
            .collect()
    }

    pub fn chit_chat(&self, n: usize) -> Vec<String> {
        let mut rng = self.rng(1);
        (0..n)
            .map(|_| CHIT_CHAT.choose(&mut rng).unwrap().to_string())
            .collect()
    }

    /// `count` answerable factoid questions sampled without replacement.
    pub fn sample_factoids(&self, count: usize) -> Vec<String> {
        let mut rng = self.rng(2);
        let mut all: Vec<String> = self.factoid_questions().into_iter().map(|(q, _)| q).collect();
        all.shuffle(&mut rng);
        all.truncate(count);
        all
    }

    /// A raw question log with a skewed entity popularity: entity `i` in a
    /// shuffled order gets about `head / (1 + i / 20)` distinct questions,
    /// each repeated a few times, mixed with chit-chat.
    pub fn question_log(&self, head: usize) -> Vec<String> {
        let mut rng = self.rng(3);
        let mut order: Vec<usize> = (0..self.entities.len()).collect();
        order.shuffle(&mut rng);
        let mut by_subject: std::collections::HashMap<&str, Vec<&Triple>> = Default::default();
        for t in &self.triples {
            by_subject.entry(t.subject.as_str()).or_default().push(t);
        }
        let mut log = Vec::new();
        for (rank, &e) in order.iter().enumerate() {
            let name = &self.entities[e];
            let wanted = head / (1 + rank / 20);
            if wanted == 0 {
                break;
            }
            let mut questions = Vec::new();
            for t in by_subject.get(name.as_str()).into_iter().flatten() {
                for form in FACTOID_FORMS {
                    questions.push(form.replace("{p}", &t.predicate).replace("{e}", name));
                }
            }
            questions.push(format!("tell me about {name}"));
            questions.push(format!("{name} photos"));
            questions.truncate(wanted);
            for q in questions {
                let repeats = rng.random_range(1..=3);
                for r in 0..repeats {
                    // vary case and spacing; normalization merges these
                    log.push(if r == 1 { q.to_uppercase() } else { format!(" {q} ") });
                }
            }
            if rank % 4 == 0 {
                log.push(CHIT_CHAT.choose(&mut rng).unwrap().to_string());
            }
        }
        log
    }

    /// Writes `kg.tsv`, `aliases.tsv`, `predicate_aliases.tsv`, `logs.txt`
    /// and `questions.txt` (answerable factoids mixed 60/40 with chit-chat).
    pub fn write_dir(&self, dir: impl AsRef<Path>, questions: usize) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, content: String| {
            let path = dir.join(name);
            fs::write(&path, content).map_err(|e| Error::io(&path, e))
        };
        write("kg.tsv", self.store().to_tsv())?;
        write(
            "aliases.tsv",
            self.aliases.iter().map(|(e, a)| format!("{e}\t{a}\n")).collect(),
        )?;
        write(
            "predicate_aliases.tsv",
            "birthplace\tbirth place\nborn\tdate of birth\nhow tall\theight\nlanguage\tofficial language\n"
                .to_string(),
        )?;
        write("logs.txt", lines(self.question_log(40)))?;
        let answerable = questions * 6 / 10;
        let mut mixed = self.sample_factoids(answerable);
        mixed.extend(self.chit_chat(questions - answerable));
        mixed.shuffle(&mut self.rng(4));
        write("questions.txt", lines(mixed))
    }
}

fn lines(rows: Vec<String>) -> String {
    let mut out = rows.join("\n");
    out.push('\n');
    out
}
