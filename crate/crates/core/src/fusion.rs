//! IoU voting over box candidates and co-reference unification.
//!
//! Each candidate is scored by the sum of its IoUs with every other
//! candidate; the highest-scoring box wins. Ties are broken by
//! coordinate-lexicographic order on (frame_idx, x1, y1, x2, y2), so the
//! winner is independent of how the candidate list was enumerated.
//! Detector confidences are deliberately ignored.

use crate::error::{Error, Result};
use crate::geometry::{iou, BBox};

/// Outcome of one IoU-voting round.
#[derive(Clone, Debug)]
pub struct VotingResult {
    /// Index of the winning candidate in the input list.
    pub winner_index: usize,
    /// Per-candidate voting scores, `scores[i] = sum_{j != i} iou(i, j)`.
    pub scores: Vec<f64>,
}

/// Picks the candidate with the highest summed IoU against all others.
///
/// Scores are accumulated in coordinate-lexicographic order of the
/// partner boxes, which keeps every score (and therefore the winning
/// box) exactly invariant under permutations of the input list.
pub fn iou_voting_select(candidates: &[BBox]) -> Result<VotingResult> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[a].cmp_lex(&candidates[b]).then(a.cmp(&b)));

    let mut scores = vec![0.0f64; candidates.len()];
    for i in 0..candidates.len() {
        let mut sum = 0.0;
        for &j in &order {
            if j != i {
                sum += iou(&candidates[i], &candidates[j]);
            }
        }
        scores[i] = sum;
    }

    let mut winner = 0usize;
    for i in 1..candidates.len() {
        if scores[i] > scores[winner]
            || (scores[i] == scores[winner]
                && candidates[i].cmp_lex(&candidates[winner]).is_lt())
        {
            winner = i;
        }
    }
    Ok(VotingResult {
        winner_index: winner,
        scores,
    })
}

/// Unifies the fused predictions of one co-reference group to a single
/// box by running IoU voting over them.
pub fn unify_coreference(group_boxes: &[BBox]) -> Result<BBox> {
    let vote = iou_voting_select(group_boxes)?;
    Ok(group_boxes[vote.winner_index])
}
