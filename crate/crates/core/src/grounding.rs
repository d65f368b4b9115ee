//! Query grounding: per-model candidate selection via soft-token span
//! scores, cross-model IoU voting, and the sub-task I / II pipelines.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::caption_prep::{
    extract_object_queries, extract_vocab_matches, ObjectQuery, ObjectVocabulary, SentenceId,
    Stoplist, Tagger,
};
use crate::error::{Error, Result};
use crate::fusion::{iou_voting_select, unify_coreference};
use crate::geometry::BBox;
use crate::harness::{CandidateSet, CaptionFile, GroundTruthAnnotation, MAX_TEXT_TOKENS};

/// A detector candidate's matching distribution over text token
/// positions. Entries are non-negative; mass may sum to less than one
/// (the remainder is the detector's "no object" bucket).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SoftTokenDist {
    probs: Vec<f64>,
}

impl SoftTokenDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() > MAX_TEXT_TOKENS {
            return Err(Error::Parameter(format!(
                "soft-token distribution over {} positions exceeds the {MAX_TEXT_TOKENS} cap",
                probs.len()
            )));
        }
        let mut sum = 0.0;
        for &p in &probs {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::Parameter(format!(
                    "soft-token probability {p} must be a non-negative finite number"
                )));
            }
            sum += p;
        }
        if sum > 1.0 + 1e-6 {
            return Err(Error::Parameter(format!(
                "soft-token probabilities sum to {sum}, more than 1"
            )));
        }
        Ok(SoftTokenDist { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl TryFrom<Vec<f64>> for SoftTokenDist {
    type Error = String;
    fn try_from(probs: Vec<f64>) -> std::result::Result<Self, String> {
        SoftTokenDist::new(probs).map_err(|e| e.to_string())
    }
}

impl From<SoftTokenDist> for Vec<f64> {
    fn from(d: SoftTokenDist) -> Vec<f64> {
        d.probs
    }
}

/// One detector output box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub bbox: BBox,
    pub confidence: f64,
    pub soft_tokens: SoftTokenDist,
    pub model_id: String,
}

/// A grounded query: the fused box plus the surviving per-model boxes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundingResult {
    pub query: ObjectQuery,
    pub bbox: BBox,
    pub per_model_boxes: BTreeMap<String, BBox>,
}

/// Ablation switches for the grounding pipelines.
#[derive(Clone, Copy, Debug)]
pub struct PipelineOptions {
    /// Unify co-reference groups to a single box after fusion.
    pub unify_coref: bool,
    /// Keep only NOUN/PRONOUN queries with stoplist filtering; when
    /// off, every vocabulary-matching token becomes a query.
    pub use_pos_filter: bool,
    /// Vote over all raw candidate boxes pooled across models instead
    /// of one selected box per model.
    pub pooled_voting: bool,
    /// Minimum span score for a model's selection to count; 0 disables.
    pub min_span_score: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            unify_coref: false,
            use_pos_filter: true,
            pooled_voting: false,
            min_span_score: 0.0,
        }
    }
}

/// Pipeline output: grounded queries plus the queries no model could
/// ground (recorded misses, scored as incorrect downstream).
#[derive(Clone, Debug, Default)]
pub struct PipelineOutput {
    pub results: Vec<GroundingResult>,
    pub misses: Vec<ObjectQuery>,
}

/// Mean soft-token mass over the inclusive token span.
pub fn span_score(candidate: &Candidate, token_span: (usize, usize)) -> Result<f64> {
    let (first, last) = token_span;
    let len = candidate.soft_tokens.len();
    if first > last || last >= len {
        return Err(Error::SpanOutOfRange { first, last, len });
    }
    let probs = &candidate.soft_tokens.probs()[first..=last];
    Ok(probs.iter().sum::<f64>() / probs.len() as f64)
}

/// Picks the one box a single model contributes for a query: the
/// candidate with the highest span score, ties broken by higher
/// confidence then coordinate-lexicographic order. Returns `None` when
/// no candidate is on the query's frame or the best score falls below
/// `min_span_score`.
pub fn select_model_box(
    query: &ObjectQuery,
    candidates: &[Candidate],
    min_span_score: f64,
) -> Result<Option<BBox>> {
    let mut best: Option<(f64, &Candidate)> = None;
    for cand in candidates {
        if cand.bbox.frame_idx != query.frame_idx {
            continue;
        }
        let score = span_score(cand, query.token_span)?;
        let better = match best {
            None => true,
            Some((bs, bc)) => {
                score > bs
                    || (score == bs
                        && (cand.confidence > bc.confidence
                            || (cand.confidence == bc.confidence
                                && cand.bbox.cmp_lex(&bc.bbox).is_lt())))
            }
        };
        if better {
            best = Some((score, cand));
        }
    }
    Ok(match best {
        Some((score, cand)) if score >= min_span_score => Some(cand.bbox),
        _ => None,
    })
}

fn ground_from_pairs<'a>(
    query: &ObjectQuery,
    pairs: impl Iterator<Item = (&'a str, &'a [Candidate])>,
    options: &PipelineOptions,
) -> Result<GroundingResult> {
    let mut per_model_boxes = BTreeMap::new();
    let mut pooled: Vec<BBox> = Vec::new();
    for (model_id, candidates) in pairs {
        if let Some(bbox) = select_model_box(query, candidates, options.min_span_score)? {
            per_model_boxes.insert(model_id.to_string(), bbox);
        }
        if options.pooled_voting {
            pooled.extend(
                candidates
                    .iter()
                    .filter(|c| c.bbox.frame_idx == query.frame_idx)
                    .map(|c| c.bbox),
            );
        }
    }
    let voting_boxes: Vec<BBox> = if options.pooled_voting {
        pooled
    } else {
        per_model_boxes.values().copied().collect()
    };
    if voting_boxes.is_empty() {
        return Err(Error::Ungroundable {
            word: query.word.clone(),
            sentence: query.sentence_id.to_string(),
        });
    }
    let vote = iou_voting_select(&voting_boxes)?;
    Ok(GroundingResult {
        query: query.clone(),
        bbox: voting_boxes[vote.winner_index],
        per_model_boxes,
    })
}

/// Grounds one query against every model's candidates and fuses the
/// surviving boxes by IoU voting.
pub fn ground_query(
    query: &ObjectQuery,
    per_model_candidates: &BTreeMap<String, Vec<Candidate>>,
    options: &PipelineOptions,
) -> Result<GroundingResult> {
    ground_from_pairs(
        query,
        per_model_candidates
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice())),
        options,
    )
}

fn ground_all(
    queries: Vec<ObjectQuery>,
    candidates: &CandidateSet,
    options: &PipelineOptions,
) -> Result<PipelineOutput> {
    let mut out = PipelineOutput::default();
    for query in queries {
        let pairs = candidates
            .iter_models()
            .map(|(model_id, segs)| {
                let cands = segs
                    .get(&query.sentence_id)
                    .map(Vec::as_slice)
                    .unwrap_or(&[]);
                (model_id, cands)
            })
            .collect::<Vec<_>>();
        match ground_from_pairs(&query, pairs.into_iter(), options) {
            Ok(result) => out.results.push(result),
            Err(Error::Ungroundable { .. }) => out.misses.push(query),
            Err(e) => return Err(e),
        }
    }
    if options.unify_coref {
        unify_groups(&mut out.results)?;
    }
    Ok(out)
}

/// Re-votes each co-reference group over its members' fused boxes and
/// assigns the winner to every member.
fn unify_groups(results: &mut [GroundingResult]) -> Result<()> {
    let mut groups: BTreeMap<(SentenceId, u32), Vec<usize>> = BTreeMap::new();
    for (i, r) in results.iter().enumerate() {
        if let Some(g) = r.query.coref_group {
            groups
                .entry((r.query.sentence_id.clone(), g))
                .or_default()
                .push(i);
        }
    }
    for indices in groups.values() {
        let boxes: Vec<BBox> = indices.iter().map(|&i| results[i].bbox).collect();
        let unified = unify_coreference(&boxes)?;
        for &i in indices {
            results[i].bbox = unified;
        }
    }
    Ok(())
}

/// Sub-task I: ground every annotated object word of every GT sentence.
pub fn run_subtask1(
    annotations: &GroundTruthAnnotation,
    candidates: &CandidateSet,
    options: &PipelineOptions,
) -> Result<PipelineOutput> {
    let mut queries = Vec::new();
    for video in &annotations.videos {
        for segment in &video.segments {
            let sid = SentenceId::new(&video.video_id, &segment.segment_id);
            for object in &segment.objects {
                queries.push(object.query(sid.clone()));
            }
        }
    }
    ground_all(queries, candidates, options)
}

/// Sub-task II: extract object queries from generated sentences, then
/// ground them like sub-task I. With `use_pos_filter` off, every
/// vocabulary-matching token is kept regardless of part of speech.
pub fn run_subtask2(
    captions: &CaptionFile,
    candidates: &CandidateSet,
    vocab: &ObjectVocabulary,
    stoplist: &Stoplist,
    tagger: &dyn Tagger,
    options: &PipelineOptions,
) -> Result<PipelineOutput> {
    let mut queries = Vec::new();
    for segment in &captions.segments {
        let sid = SentenceId::new(&segment.video_id, &segment.segment_id);
        let extracted = if options.use_pos_filter {
            extract_object_queries(&segment.sentence, vocab, stoplist, tagger)
        } else {
            extract_vocab_matches(&segment.sentence, vocab)
        };
        for mut q in extracted {
            q.sentence_id = sid.clone();
            q.frame_idx = segment.frame_idx;
            queries.push(q);
        }
    }
    ground_all(queries, candidates, options)
}
