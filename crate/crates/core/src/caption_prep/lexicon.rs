//! Object vocabulary, abstract-word stoplist and the word-list tagger.
//!
//! Lemmatization is rule-based: lower-casing, plural stripping for
//! nouns and suffix stripping plus a small irregular table for verbs.
//! Candidate lemma forms are checked against the word lists, so only
//! forms the lexicon actually knows are produced.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use crate::caption_prep::{Pos, Tagger};
use crate::error::{Error, Result};

const DEFAULT_VOCAB: &str = include_str!("../../data/object_vocab.txt");
const DEFAULT_NOUNS: &str = include_str!("../../data/nouns.txt");
const DEFAULT_VERBS: &str = include_str!("../../data/verbs.txt");
const DEFAULT_PRONOUNS: &str = include_str!("../../data/pronouns.txt");
const DEFAULT_STOPLIST: &str = include_str!("../../data/stoplist.txt");

const IRREGULAR_VERBS: &[(&str, &str)] = &[
    ("is", "be"),
    ("are", "be"),
    ("was", "be"),
    ("were", "be"),
    ("am", "be"),
    ("been", "be"),
    ("being", "be"),
    ("has", "have"),
    ("had", "have"),
    ("does", "do"),
    ("did", "do"),
    ("done", "do"),
    ("goes", "go"),
    ("went", "go"),
    ("gone", "go"),
    ("ran", "run"),
    ("held", "hold"),
    ("spoke", "speak"),
    ("spoken", "speak"),
    ("sang", "sing"),
    ("sung", "sing"),
    ("rode", "ride"),
    ("ridden", "ride"),
    ("drove", "drive"),
    ("driven", "drive"),
    ("threw", "throw"),
    ("thrown", "throw"),
    ("caught", "catch"),
    ("saw", "see"),
    ("seen", "see"),
    ("took", "take"),
    ("taken", "take"),
    ("gave", "give"),
    ("given", "give"),
    ("got", "get"),
    ("gotten", "get"),
    ("wore", "wear"),
    ("worn", "wear"),
    ("led", "lead"),
    ("stood", "stand"),
    ("sat", "sit"),
    ("lay", "lie"),
    ("began", "begin"),
    ("begun", "begin"),
    ("ate", "eat"),
    ("eaten", "eat"),
    ("drank", "drink"),
    ("drunk", "drink"),
    ("made", "make"),
    ("swam", "swim"),
    ("swum", "swim"),
    ("fell", "fall"),
    ("fallen", "fall"),
    ("flew", "fly"),
    ("flown", "fly"),
    ("came", "come"),
    ("won", "win"),
    ("lost", "lose"),
    ("hit", "hit"),
    ("put", "put"),
];

fn parse_word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

/// Candidate noun lemmas for a lower-cased surface form, most specific
/// first.
pub fn noun_candidates(word: &str) -> Vec<String> {
    let mut out = vec![word.to_string()];
    if let Some(stem) = word.strip_suffix("ies") {
        if !stem.is_empty() {
            out.push(format!("{stem}y"));
        }
    }
    for suf in ["ses", "xes", "zes", "ches", "shes"] {
        if let Some(stem) = word.strip_suffix(suf) {
            out.push(format!("{}{}", stem, &suf[..suf.len() - 2]));
        }
    }
    if let Some(stem) = word.strip_suffix('s') {
        if !stem.is_empty() && !stem.ends_with('s') {
            out.push(stem.to_string());
        }
    }
    out.dedup();
    out
}

fn dedouble(stem: &str) -> Option<String> {
    let mut chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n >= 2 && chars[n - 1] == chars[n - 2] && chars[n - 1].is_ascii_alphabetic() {
        chars.pop();
        Some(chars.into_iter().collect())
    } else {
        None
    }
}

/// Candidate verb lemmas for a lower-cased surface form.
pub fn verb_candidates(word: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(&(_, lemma)) = IRREGULAR_VERBS.iter().find(|&&(w, _)| w == word) {
        out.push(lemma.to_string());
    }
    out.push(word.to_string());
    if let Some(stem) = word.strip_suffix("ies") {
        if !stem.is_empty() {
            out.push(format!("{stem}y"));
        }
    }
    if let Some(stem) = word.strip_suffix("es") {
        if !stem.is_empty() {
            out.push(stem.to_string());
        }
    }
    if let Some(stem) = word.strip_suffix('s') {
        if !stem.is_empty() && !stem.ends_with('s') {
            out.push(stem.to_string());
        }
    }
    if let Some(stem) = word.strip_suffix("ing") {
        if stem.len() >= 2 {
            out.push(stem.to_string());
            out.push(format!("{stem}e"));
            if let Some(d) = dedouble(stem) {
                out.push(d);
            }
        }
    }
    if let Some(stem) = word.strip_suffix("ied") {
        if !stem.is_empty() {
            out.push(format!("{stem}y"));
        }
    }
    if let Some(stem) = word.strip_suffix("ed") {
        if stem.len() >= 2 {
            out.push(stem.to_string());
            out.push(format!("{stem}e"));
            if let Some(d) = dedouble(stem) {
                out.push(d);
            }
        }
    }
    out.dedup();
    out
}

/// The official object vocabulary: lemma -> category id.
#[derive(Clone, Debug)]
pub struct ObjectVocabulary {
    by_lemma: HashMap<String, u32>,
}

impl ObjectVocabulary {
    /// Parses "lemma id" lines; '#' starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut by_lemma = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap().to_lowercase();
            let id = parts
                .next()
                .and_then(|s| s.parse::<u32>().ok())
                .ok_or_else(|| {
                    Error::format(
                        format!("line {}", lineno + 1),
                        "expected `lemma category_id`",
                    )
                })?;
            if by_lemma.insert(word.clone(), id).is_some() {
                return Err(Error::format(
                    format!("line {}", lineno + 1),
                    format!("duplicate vocabulary lemma {word:?}"),
                ));
            }
        }
        Ok(ObjectVocabulary { by_lemma })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// The built-in vocabulary shipped with the crate.
    pub fn default_vocab() -> &'static ObjectVocabulary {
        static VOCAB: OnceLock<ObjectVocabulary> = OnceLock::new();
        VOCAB.get_or_init(|| ObjectVocabulary::parse(DEFAULT_VOCAB).expect("built-in vocabulary"))
    }

    pub fn get(&self, lemma: &str) -> Option<u32> {
        self.by_lemma.get(lemma).copied()
    }

    /// Looks a word up trying singularized candidate forms; returns the
    /// matching vocabulary lemma and its category id.
    pub fn match_lemma(&self, word: &str) -> Option<(String, u32)> {
        for cand in noun_candidates(&word.to_lowercase()) {
            if let Some(&id) = self.by_lemma.get(&cand) {
                return Some((cand, id));
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.by_lemma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_lemma.is_empty()
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.by_lemma.keys().map(String::as_str)
    }
}

/// Abstract-word stoplist (one lemma per line).
#[derive(Clone, Debug, Default)]
pub struct Stoplist {
    set: HashSet<String>,
}

impl Stoplist {
    pub fn parse(text: &str) -> Self {
        Stoplist {
            set: parse_word_list(text),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::parse(&text))
    }

    pub fn empty() -> Self {
        Stoplist::default()
    }

    /// The built-in stoplist ({"camera"}).
    pub fn default_stoplist() -> &'static Stoplist {
        static STOPLIST: OnceLock<Stoplist> = OnceLock::new();
        STOPLIST.get_or_init(|| Stoplist::parse(DEFAULT_STOPLIST))
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.set.contains(lemma)
    }
}

/// Deterministic tagger backed by three word lists. Lookup order is
/// pronouns, nouns, verbs; anything else is `Other`.
#[derive(Clone, Debug)]
pub struct LexiconTagger {
    nouns: HashSet<String>,
    verbs: HashSet<String>,
    pronouns: HashSet<String>,
}

impl LexiconTagger {
    pub fn new(
        nouns: HashSet<String>,
        verbs: HashSet<String>,
        pronouns: HashSet<String>,
    ) -> Self {
        LexiconTagger {
            nouns,
            verbs,
            pronouns,
        }
    }

    pub fn from_files(nouns: &Path, verbs: &Path, pronouns: &Path) -> Result<Self> {
        let read = |path: &Path| -> Result<HashSet<String>> {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            Ok(parse_word_list(&text))
        };
        Ok(Self::new(read(nouns)?, read(verbs)?, read(pronouns)?))
    }

    /// The shipped lexicon: the object vocabulary plus extra common
    /// nouns, a verb list derived from training captions, and the
    /// closed pronoun class.
    pub fn default_tagger() -> &'static LexiconTagger {
        static TAGGER: OnceLock<LexiconTagger> = OnceLock::new();
        TAGGER.get_or_init(|| {
            let mut nouns = parse_word_list(DEFAULT_NOUNS);
            nouns.extend(
                ObjectVocabulary::default_vocab()
                    .lemmas()
                    .map(str::to_string),
            );
            LexiconTagger::new(
                nouns,
                parse_word_list(DEFAULT_VERBS),
                parse_word_list(DEFAULT_PRONOUNS),
            )
        })
    }
}

impl Tagger for LexiconTagger {
    fn tag(&self, surface: &str) -> (Pos, String) {
        let lower = surface.to_lowercase();
        if !lower.chars().any(char::is_alphanumeric) {
            return (Pos::Other, lower);
        }
        if self.pronouns.contains(&lower) {
            return (Pos::Pronoun, lower);
        }
        for cand in noun_candidates(&lower) {
            if self.nouns.contains(&cand) {
                return (Pos::Noun, cand);
            }
        }
        for cand in verb_candidates(&lower) {
            if self.verbs.contains(&cand) {
                return (Pos::Verb, cand);
            }
        }
        (Pos::Other, lower)
    }
}
