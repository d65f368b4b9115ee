//! Top-M concept selection from per-frame concept probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Paper configuration: top M = 15 predicted concepts.
pub const DEFAULT_TOP_M: usize = 15;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptSet {
    /// Selected concept ids, highest mean probability first.
    pub concepts: Vec<usize>,
    /// The requested M.
    pub m: usize,
}

/// Averages the `T x C` per-frame probabilities column-wise and returns
/// the `min(m, C)` concepts with the highest means, descending; ties go
/// to the smaller concept id.
pub fn top_m_concepts(frame_probs: &[Vec<f64>], m: usize) -> Result<ConceptSet> {
    if m < 1 {
        return Err(Error::Parameter("M must be at least 1".into()));
    }
    if frame_probs.is_empty() || frame_probs[0].is_empty() {
        return Err(Error::Parameter(
            "probability matrix must be at least 1 x 1".into(),
        ));
    }
    let num_concepts = frame_probs[0].len();
    for (t, row) in frame_probs.iter().enumerate() {
        if row.len() != num_concepts {
            return Err(Error::Parameter(format!(
                "ragged probability matrix: row {t} has {} entries, expected {num_concepts}",
                row.len()
            )));
        }
        for (c, &p) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::Parameter(format!(
                    "probability [{t}][{c}] = {p} outside [0, 1]"
                )));
            }
        }
    }

    let frames = frame_probs.len() as f64;
    let mut means: Vec<(usize, f64)> = (0..num_concepts)
        .map(|c| {
            let sum: f64 = frame_probs.iter().map(|row| row[c]).sum();
            (c, sum / frames)
        })
        .collect();
    means.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    means.truncate(m.min(num_concepts));
    Ok(ConceptSet {
        concepts: means.into_iter().map(|(c, _)| c).collect(),
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_frame() {
        let set = top_m_concepts(&[vec![0.9, 0.1, 0.5]], 2).unwrap();
        assert_eq!(set.concepts, vec![0, 2]);
    }

    #[test]
    fn tie_breaks_to_smaller_id() {
        let set = top_m_concepts(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1).unwrap();
        assert_eq!(set.concepts, vec![0]);
    }

    #[test]
    fn m_larger_than_c_returns_all() {
        let set = top_m_concepts(&[vec![0.2, 0.8]], 10).unwrap();
        assert_eq!(set.concepts.len(), 2);
    }

    #[test]
    fn invalid_inputs() {
        assert!(top_m_concepts(&[vec![0.5]], 0).is_err());
        assert!(top_m_concepts(&[], 1).is_err());
        assert!(top_m_concepts(&[vec![1.5]], 1).is_err());
        assert!(top_m_concepts(&[vec![0.5, 0.5], vec![0.5]], 1).is_err());
    }

    proptest! {
        #[test]
        fn frame_permutation_invariance(
            rows in proptest::collection::vec(
                proptest::collection::vec(0.0f64..1.0, 5),
                1..6,
            ),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let a = top_m_concepts(&rows, 3).unwrap();
            let mut shuffled = rows.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let b = top_m_concepts(&shuffled, 3).unwrap();
            prop_assert_eq!(a.concepts, b.concepts);
        }
    }
}
