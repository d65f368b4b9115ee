//! Evaluation metrics: per-category localization accuracy (sub-task I)
//! and caption grounding precision/recall/F1 (sub-task II).
//!
//! A word is correctly localized only when the IoU against its
//! annotation is strictly greater than the threshold; boundary IoU
//! counts as incorrect.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{iou, BBox};
use crate::grounding::PipelineOutput;
use crate::harness::{GroundTruthAnnotation, PredictionFile};

pub const DEFAULT_IOU_THRESH: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub num_correct: u64,
    pub num_total: u64,
    pub accuracy: f64,
}

/// Sub-task I report: per-category accuracy, macro-averaged over the
/// unique categories present in the ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub per_category: BTreeMap<u32, CategoryStats>,
    pub macro_accuracy: f64,
}

impl LocalizationReport {
    /// Copy with values rounded to 6 decimal places, for output.
    pub fn rounded(&self) -> LocalizationReport {
        LocalizationReport {
            per_category: self
                .per_category
                .iter()
                .map(|(&k, s)| {
                    (
                        k,
                        CategoryStats {
                            accuracy: round6(s.accuracy),
                            ..*s
                        },
                    )
                })
                .collect(),
            macro_accuracy: round6(self.macro_accuracy),
        }
    }
}

/// Sub-task II report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptionGroundingReport {
    pub p_all: f64,
    pub r_all: f64,
    pub f1_all: f64,
    pub p_all_per_sent: f64,
    pub r_all_per_sent: f64,
    pub f1_all_per_sent: f64,
}

impl CaptionGroundingReport {
    pub fn rounded(&self) -> CaptionGroundingReport {
        CaptionGroundingReport {
            p_all: round6(self.p_all),
            r_all: round6(self.r_all),
            f1_all: round6(self.f1_all),
            p_all_per_sent: round6(self.p_all_per_sent),
            r_all_per_sent: round6(self.r_all_per_sent),
            f1_all_per_sent: round6(self.f1_all_per_sent),
        }
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Scores sub-task I output. Every GT object word must appear exactly
/// once across results and misses; a miss counts as incorrect.
pub fn localization_accuracy(
    output: &PipelineOutput,
    gt: &GroundTruthAnnotation,
    iou_thresh: f64,
) -> Result<LocalizationReport> {
    // (sentence, token span) identifies an annotated word occurrence.
    type Key = (crate::caption_prep::SentenceId, (usize, usize));
    struct GtEntry {
        category_id: u32,
        bbox: BBox,
        consumed: bool,
    }
    let mut gt_words: HashMap<Key, GtEntry> = HashMap::new();
    for video in &gt.videos {
        for segment in &video.segments {
            let sid =
                crate::caption_prep::SentenceId::new(&video.video_id, &segment.segment_id);
            for object in &segment.objects {
                gt_words.insert(
                    (sid.clone(), object.token_span),
                    GtEntry {
                        category_id: object.category_id,
                        bbox: object.bbox(),
                        consumed: false,
                    },
                );
            }
        }
    }

    let mut per_category: BTreeMap<u32, CategoryStats> = BTreeMap::new();
    let mut tally = |category_id: u32, correct: bool| {
        let stats = per_category.entry(category_id).or_insert(CategoryStats {
            num_correct: 0,
            num_total: 0,
            accuracy: 0.0,
        });
        stats.num_total += 1;
        stats.num_correct += correct as u64;
    };

    let scored = output
        .results
        .iter()
        .map(|r| (&r.query, Some(r.bbox)))
        .chain(output.misses.iter().map(|q| (q, None)));
    for (query, pred) in scored {
        let key = (query.sentence_id.clone(), query.token_span);
        let entry = gt_words.get_mut(&key).ok_or_else(|| {
            Error::Consistency(format!(
                "result for unknown GT word {:?} at {} span {:?}",
                query.word, query.sentence_id, query.token_span
            ))
        })?;
        if entry.consumed {
            return Err(Error::Consistency(format!(
                "GT word at {} span {:?} scored twice",
                query.sentence_id, query.token_span
            )));
        }
        entry.consumed = true;
        let correct = pred.is_some_and(|b| iou(&b, &entry.bbox) > iou_thresh);
        tally(entry.category_id, correct);
    }

    if let Some((key, _)) = gt_words.iter().find(|(_, e)| !e.consumed) {
        return Err(Error::Consistency(format!(
            "GT word at {} span {:?} has no result or recorded miss",
            key.0, key.1
        )));
    }

    for stats in per_category.values_mut() {
        stats.accuracy = ratio(stats.num_correct, stats.num_total);
    }
    let macro_accuracy = if per_category.is_empty() {
        0.0
    } else {
        per_category.values().map(|s| s.accuracy).sum::<f64>() / per_category.len() as f64
    };
    Ok(LocalizationReport {
        per_category,
        macro_accuracy,
    })
}

/// Scores sub-task II predictions against the ground truth.
///
/// Within a sentence, predictions are matched greedily in prediction
/// order: a prediction is a hit when an unconsumed GT word of the same
/// category has box IoU above the threshold; each GT word is consumed
/// at most once. Corpus metrics pool hits over all sentences;
/// per-sentence metrics average sentence-level P/R/F1 (0/0 = 0)
/// uniformly over GT sentences.
pub fn caption_grounding_metrics(
    pred: &PredictionFile,
    gt: &GroundTruthAnnotation,
    iou_thresh: f64,
) -> Result<CaptionGroundingReport> {
    use crate::caption_prep::SentenceId;

    let mut gt_keys = std::collections::HashSet::new();
    for video in &gt.videos {
        for segment in &video.segments {
            gt_keys.insert(SentenceId::new(&video.video_id, &segment.segment_id));
        }
    }
    let mut by_segment: HashMap<SentenceId, &crate::harness::PredictionSegment> = HashMap::new();
    for seg in &pred.segments {
        let sid = SentenceId::new(&seg.video_id, &seg.segment_id);
        if !gt_keys.contains(&sid) {
            return Err(Error::Consistency(format!(
                "prediction for unknown segment {sid}"
            )));
        }
        if by_segment.insert(sid.clone(), seg).is_some() {
            return Err(Error::Consistency(format!(
                "duplicate prediction segment {sid}"
            )));
        }
    }

    let mut total_hits = 0u64;
    let mut total_pred = 0u64;
    let mut total_gt = 0u64;
    let mut sum_p = 0.0;
    let mut sum_r = 0.0;
    let mut sum_f1 = 0.0;
    let mut num_sentences = 0u64;

    for video in &gt.videos {
        for segment in &video.segments {
            let sid = SentenceId::new(&video.video_id, &segment.segment_id);
            let preds: &[crate::harness::PredictedObject] = by_segment
                .get(&sid)
                .map(|s| s.objects.as_slice())
                .unwrap_or(&[]);

            let mut consumed = vec![false; segment.objects.len()];
            let mut hits = 0u64;
            for p in preds {
                let pbox = p.bbox();
                let matched = segment.objects.iter().enumerate().find(|(gi, g)| {
                    !consumed[*gi]
                        && g.category_id == p.category_id
                        && iou(&pbox, &g.bbox()) > iou_thresh
                });
                if let Some((gi, _)) = matched {
                    consumed[gi] = true;
                    hits += 1;
                }
            }

            let p = ratio(hits, preds.len() as u64);
            let r = ratio(hits, segment.objects.len() as u64);
            sum_p += p;
            sum_r += r;
            sum_f1 += f1(p, r);
            num_sentences += 1;
            total_hits += hits;
            total_pred += preds.len() as u64;
            total_gt += segment.objects.len() as u64;
        }
    }

    let p_all = ratio(total_hits, total_pred);
    let r_all = ratio(total_hits, total_gt);
    let n = num_sentences.max(1) as f64;
    Ok(CaptionGroundingReport {
        p_all,
        r_all,
        f1_all: f1(p_all, r_all),
        p_all_per_sent: sum_p / n,
        r_all_per_sent: sum_r / n,
        f1_all_per_sent: sum_f1 / n,
    })
}
