//! Masked-language-model data preparation.
//!
//! Each position is independently selected with probability
//! `mask_rate`; a selected token is replaced with the mask token 80% of
//! the time, a random vocabulary word 10% of the time, and kept
//! unchanged 10% of the time. Fully deterministic given the seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MASK_RATE: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MaskAction {
    Mask,
    Random,
    Keep,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskingOutcome {
    /// Token sequence after masking; differs from the input only at
    /// `masked_positions`.
    pub tokens: Vec<u32>,
    pub masked_positions: Vec<usize>,
    /// Original tokens at the masked positions (the prediction labels).
    pub labels: Vec<u32>,
    pub actions: Vec<MaskAction>,
}

#[derive(Clone, Copy, Debug)]
pub struct MaskingParams {
    pub mask_rate: f64,
    pub mask_token_id: u32,
    /// Size of the vocabulary random replacements are drawn from.
    pub vocab_size: u32,
}

impl MaskingParams {
    pub fn new(mask_token_id: u32, vocab_size: u32) -> Self {
        MaskingParams {
            mask_rate: DEFAULT_MASK_RATE,
            mask_token_id,
            vocab_size,
        }
    }
}

pub fn apply_mmlm_masking(
    tokens: &[u32],
    params: &MaskingParams,
    rng_seed: u64,
) -> Result<MaskingOutcome> {
    if !(0.0..=1.0).contains(&params.mask_rate) || !params.mask_rate.is_finite() {
        return Err(Error::Parameter(format!(
            "mask_rate must be in [0, 1], got {}",
            params.mask_rate
        )));
    }
    if params.vocab_size == 0 && params.mask_rate > 0.0 && !tokens.is_empty() {
        return Err(Error::Parameter(
            "vocab_size must be positive for random replacement".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = MaskingOutcome {
        tokens: tokens.to_vec(),
        masked_positions: Vec::new(),
        labels: Vec::new(),
        actions: Vec::new(),
    };
    for (i, &tok) in tokens.iter().enumerate() {
        if rng.gen::<f64>() >= params.mask_rate {
            continue;
        }
        let r: f64 = rng.gen();
        let (action, replacement) = if r < 0.8 {
            (MaskAction::Mask, params.mask_token_id)
        } else if r < 0.9 {
            (MaskAction::Random, rng.gen_range(0..params.vocab_size))
        } else {
            (MaskAction::Keep, tok)
        };
        out.tokens[i] = replacement;
        out.masked_positions.push(i);
        out.labels.push(tok);
        out.actions.push(action);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input() {
        let out = apply_mmlm_masking(&[], &MaskingParams::new(99, 100), 7).unwrap();
        assert!(out.tokens.is_empty() && out.masked_positions.is_empty());
    }

    #[test]
    fn zero_rate_masks_nothing() {
        let mut p = MaskingParams::new(99, 100);
        p.mask_rate = 0.0;
        let out = apply_mmlm_masking(&[1, 2, 3], &p, 7).unwrap();
        assert_eq!(out.tokens, vec![1, 2, 3]);
        assert!(out.masked_positions.is_empty());
    }

    #[test]
    fn invalid_rate_rejected() {
        let mut p = MaskingParams::new(99, 100);
        p.mask_rate = 1.5;
        assert!(apply_mmlm_masking(&[1], &p, 7).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let toks: Vec<u32> = (0..500).collect();
        let p = MaskingParams::new(9999, 500);
        let a = apply_mmlm_masking(&toks, &p, 42).unwrap();
        let b = apply_mmlm_masking(&toks, &p, 42).unwrap();
        assert_eq!(a, b);
        let c = apply_mmlm_masking(&toks, &p, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn labels_reconstruct_input() {
        let toks: Vec<u32> = (0..2000).map(|i| i % 300).collect();
        let p = MaskingParams::new(9999, 300);
        let out = apply_mmlm_masking(&toks, &p, 5).unwrap();
        let mut restored = out.tokens.clone();
        for (k, &pos) in out.masked_positions.iter().enumerate() {
            restored[pos] = out.labels[k];
        }
        assert_eq!(restored, toks);
        // untouched positions are identical
        let masked: std::collections::HashSet<usize> =
            out.masked_positions.iter().copied().collect();
        for i in 0..toks.len() {
            if !masked.contains(&i) {
                assert_eq!(out.tokens[i], toks[i]);
            }
        }
    }
}
