//! Caption-side text processing: tokenization, part-of-speech tagging,
//! object-query extraction, concept-label extraction, MMLM masking and
//! top-M concept selection.
//!
//! Tagging goes through the [`Tagger`] contract. The shipped
//! [`LexiconTagger`] is a deterministic word-list tagger; output of an
//! external statistical tagger can be ingested through the same trait.

mod concepts;
mod lexicon;
mod masking;

pub use concepts::{top_m_concepts, ConceptSet, DEFAULT_TOP_M};
pub use lexicon::{LexiconTagger, ObjectVocabulary, Stoplist};
pub use masking::{apply_mmlm_masking, MaskAction, MaskingOutcome, MaskingParams};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Part-of-speech classes relevant to query extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pos {
    Noun,
    Pronoun,
    Verb,
    Other,
}

/// A token with its position in the source sentence.
///
/// `char_span` holds byte offsets into the sentence, so
/// `&sentence[span.0..span.1]` is exactly `surface`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    pub char_span: (usize, usize),
    pub token_idx: usize,
}

/// Identifies the sentence a query came from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub struct SentenceId {
    pub video_id: String,
    pub segment_id: String,
}

impl SentenceId {
    pub fn new(video_id: impl Into<String>, segment_id: impl Into<String>) -> Self {
        SentenceId {
            video_id: video_id.into(),
            segment_id: segment_id.into(),
        }
    }
}

impl std::fmt::Display for SentenceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.video_id, self.segment_id)
    }
}

/// One object word occurrence to be localized.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectQuery {
    /// Lemma of the object word; a member of the object vocabulary.
    pub word: String,
    pub category_id: u32,
    /// Inclusive token-index span within the tagged sentence.
    pub token_span: (usize, usize),
    pub sentence_id: SentenceId,
    pub frame_idx: u32,
    pub coref_group: Option<u32>,
}

/// Part-of-speech tagging contract; must be safe for concurrent
/// read-only use.
pub trait Tagger: Sync {
    /// Tags one token surface form, returning its class and lemma.
    fn tag(&self, surface: &str) -> (Pos, String);
}

/// Whitespace-and-punctuation tokenizer.
///
/// Alphanumeric runs form tokens; punctuation characters are single
/// tokens, except that an apostrophe swallows a following letter run so
/// clitics split off as their own token ("woman's" -> "woman", "'s").
/// All tokens come back tagged `Other`; spans reconstruct the sentence.
pub fn tokenize(sentence: &str) -> Vec<TaggedToken> {
    let mut tokens = Vec::new();
    let mut it = sentence.char_indices().peekable();
    while let Some((start, c)) = it.next() {
        if c.is_whitespace() {
            continue;
        }
        let mut end = start + c.len_utf8();
        if c.is_alphanumeric() {
            while let Some(&(j, d)) = it.peek() {
                if d.is_alphanumeric() {
                    end = j + d.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
        } else if c == '\'' {
            while let Some(&(j, d)) = it.peek() {
                if d.is_alphanumeric() {
                    end = j + d.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
        }
        let surface = &sentence[start..end];
        tokens.push(TaggedToken {
            surface: surface.to_string(),
            lemma: surface.to_lowercase(),
            pos: Pos::Other,
            char_span: (start, end),
            token_idx: tokens.len(),
        });
    }
    tokens
}

/// Runs the tagger over tokenized input, filling `pos` and `lemma`.
pub fn pos_tag(tokens: Vec<TaggedToken>, tagger: &dyn Tagger) -> Vec<TaggedToken> {
    tokens
        .into_iter()
        .map(|mut t| {
            let (pos, lemma) = tagger.tag(&t.surface);
            t.pos = pos;
            t.lemma = lemma;
            t
        })
        .collect()
}

/// Extracts object queries: every NOUN or PRONOUN token whose lemma is
/// in the vocabulary and not on the abstract-word stoplist, in token
/// order. `sentence_id` and `frame_idx` are left at defaults for the
/// caller to fill in.
pub fn extract_object_queries(
    sentence: &str,
    vocab: &ObjectVocabulary,
    stoplist: &Stoplist,
    tagger: &dyn Tagger,
) -> Vec<ObjectQuery> {
    pos_tag(tokenize(sentence), tagger)
        .iter()
        .filter(|t| matches!(t.pos, Pos::Noun | Pos::Pronoun))
        .filter_map(|t| {
            let (lemma, category_id) = vocab.match_lemma(&t.lemma)?;
            if stoplist.contains(&lemma) {
                return None;
            }
            Some(ObjectQuery {
                word: lemma,
                category_id,
                token_span: (t.token_idx, t.token_idx),
                sentence_id: SentenceId::default(),
                frame_idx: 0,
                coref_group: None,
            })
        })
        .collect()
}

/// Extracts every vocabulary-matching token regardless of part of
/// speech and without stoplist filtering (the no-POS-filter ablation).
pub fn extract_vocab_matches(sentence: &str, vocab: &ObjectVocabulary) -> Vec<ObjectQuery> {
    tokenize(sentence)
        .iter()
        .filter_map(|t| {
            let (lemma, category_id) = vocab.match_lemma(&t.lemma)?;
            Some(ObjectQuery {
                word: lemma,
                category_id,
                token_span: (t.token_idx, t.token_idx),
                sentence_id: SentenceId::default(),
                frame_idx: 0,
                coref_group: None,
            })
        })
        .collect()
}

/// Concept labels of a caption: the lemmas of all NOUN and VERB tokens.
/// Pronouns are excluded.
pub fn extract_concept_labels(caption: &str, tagger: &dyn Tagger) -> BTreeSet<String> {
    pos_tag(tokenize(caption), tagger)
        .into_iter()
        .filter(|t| matches!(t.pos, Pos::Noun | Pos::Verb))
        .map(|t| t.lemma)
        .collect()
}
