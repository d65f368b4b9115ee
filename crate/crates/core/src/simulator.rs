//! Seedable synthetic detector.
//!
//! Generates per-model candidate files from ground truth under
//! configurable noise, standing in for an ensemble of detectors trained
//! with different random seeds. The RNG is ChaCha8 with per-model
//! sub-seeds `seed + model_index`, so output is reproducible across
//! platforms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::caption_prep::tokenize;
use crate::error::{Error, Result};
use crate::harness::{
    AnnotatedObject, CandidateFile, CandidateRecord, CandidateSegment, GroundTruthAnnotation,
    SegmentAnnotation, VideoAnnotation, MAX_TEXT_TOKENS,
};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Gaussian noise on box center and log-size, as a fraction of the
    /// box dimensions.
    pub jitter_sigma: f64,
    /// Probability a model emits a uniform random box instead of a
    /// jittered GT box.
    pub miss_rate: f64,
    /// Probability mass leaked uniformly off the correct token span.
    pub span_noise: f64,
    pub num_models: u32,
    pub seed: u64,
    /// Extra uniform-random candidates per segment, with flat
    /// soft-token distributions.
    pub distractors: u32,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            jitter_sigma: 0.0,
            miss_rate: 0.0,
            span_noise: 0.0,
            num_models: 7,
            seed: 0,
            distractors: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.jitter_sigma >= 0.0) || !self.jitter_sigma.is_finite() {
            return Err(Error::Parameter("jitter_sigma must be >= 0".into()));
        }
        for (name, v) in [("miss_rate", self.miss_rate), ("span_noise", self.span_noise)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be in [0, 1]")));
            }
        }
        if self.num_models == 0 {
            return Err(Error::Parameter("num_models must be positive".into()));
        }
        Ok(())
    }
}

fn uniform_box(rng: &mut ChaCha8Rng, width: f64, height: f64) -> [f64; 4] {
    let xa = rng.gen_range(0.0..width);
    let xb = rng.gen_range(0.0..width);
    let ya = rng.gen_range(0.0..height);
    let yb = rng.gen_range(0.0..height);
    [xa.min(xb), ya.min(yb), xa.max(xb), ya.max(yb)]
}

fn jittered_box(
    rng: &mut ChaCha8Rng,
    object: &AnnotatedObject,
    sigma: f64,
    width: f64,
    height: f64,
) -> [f64; 4] {
    let [x1, y1, x2, y2] = object.box_coords;
    if sigma == 0.0 {
        return [x1, y1, x2, y2];
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let (w, h) = (x2 - x1, y2 - y1);
    let cx = (x1 + x2) / 2.0 + normal.sample(rng) * sigma * w;
    let cy = (y1 + y2) / 2.0 + normal.sample(rng) * sigma * h;
    let nw = w * (normal.sample(rng) * sigma).exp();
    let nh = h * (normal.sample(rng) * sigma).exp();
    let nx1 = (cx - nw / 2.0).clamp(0.0, width);
    let nx2 = (cx + nw / 2.0).clamp(0.0, width);
    let ny1 = (cy - nh / 2.0).clamp(0.0, height);
    let ny2 = (cy + nh / 2.0).clamp(0.0, height);
    [nx1, ny1, nx2, ny2]
}

fn span_distribution(token_count: usize, span: (usize, usize), span_noise: f64) -> Vec<f64> {
    let (first, last) = span;
    let span_len = last - first + 1;
    let off_count = token_count - span_len;
    let on_mass = if off_count == 0 { 1.0 } else { 1.0 - span_noise };
    let mut probs = vec![0.0; token_count];
    for p in probs.iter_mut().take(last + 1).skip(first) {
        *p = on_mass / span_len as f64;
    }
    if off_count > 0 && span_noise > 0.0 {
        let off = span_noise / off_count as f64;
        for (i, p) in probs.iter_mut().enumerate() {
            if i < first || i > last {
                *p = off;
            }
        }
    }
    probs
}

/// Generates one candidate file per model. For each GT object word a
/// model emits, with probability `miss_rate`, a uniform random box,
/// otherwise the GT box perturbed by Gaussian noise on center and
/// log-size and clipped to the frame. The soft-token distribution puts
/// `1 - span_noise` uniformly on the object's span and `span_noise`
/// uniformly elsewhere. Deterministic given `cfg.seed`.
pub fn simulate_candidates(
    gt: &GroundTruthAnnotation,
    cfg: &NoiseConfig,
) -> Result<Vec<CandidateFile>> {
    cfg.validate()?;
    let mut files = Vec::with_capacity(cfg.num_models as usize);
    for model_index in 0..cfg.num_models {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(model_index as u64));
        let mut segments = Vec::new();
        for video in &gt.videos {
            let (width, height) = (video.frame_width, video.frame_height);
            for segment in &video.segments {
                let token_count = tokenize(&segment.sentence).len().min(MAX_TEXT_TOKENS);
                let mut candidates = Vec::new();
                for object in &segment.objects {
                    if object.token_span.1 >= token_count {
                        return Err(Error::Consistency(format!(
                            "object span {:?} outside the {token_count}-token sentence of \
                             segment {}/{}",
                            object.token_span, video.video_id, segment.segment_id
                        )));
                    }
                    let miss = cfg.miss_rate > 0.0 && rng.gen::<f64>() < cfg.miss_rate;
                    let box_coords = if miss {
                        uniform_box(&mut rng, width, height)
                    } else {
                        jittered_box(&mut rng, object, cfg.jitter_sigma, width, height)
                    };
                    candidates.push(CandidateRecord {
                        frame_idx: object.frame_idx,
                        box_coords,
                        confidence: 1.0,
                        soft_tokens: span_distribution(
                            token_count,
                            object.token_span,
                            cfg.span_noise,
                        ),
                    });
                }
                for _ in 0..cfg.distractors {
                    candidates.push(CandidateRecord {
                        frame_idx: segment.objects.first().map(|o| o.frame_idx).unwrap_or(0),
                        box_coords: uniform_box(&mut rng, width, height),
                        confidence: 0.5,
                        soft_tokens: vec![1.0 / token_count.max(1) as f64; token_count],
                    });
                }
                segments.push(CandidateSegment {
                    video_id: video.video_id.clone(),
                    segment_id: segment.segment_id.clone(),
                    candidates,
                });
            }
        }
        files.push(CandidateFile {
            model_id: format!("model_{model_index:02}"),
            segments,
        });
    }
    Ok(files)
}

/// Builds a random but valid ground-truth fixture for simulations:
/// one 640x480 video whose sentences are strings of vocabulary nouns,
/// one object per token. With `with_coref`, the first three objects of
/// each segment form a co-reference group sharing a single GT box.
pub fn synthetic_annotation(
    num_segments: usize,
    objects_per_segment: usize,
    with_coref: bool,
    seed: u64,
) -> GroundTruthAnnotation {
    const WORDS: &[(&str, u32)] = &[
        ("man", 0),
        ("woman", 1),
        ("dog", 8),
        ("car", 13),
        ("ball", 27),
        ("table", 31),
        ("chair", 32),
        ("guitar", 23),
        ("hat", 81),
        ("bottle", 63),
    ];
    let (width, height) = (640.0, 480.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut segments = Vec::new();
    for si in 0..num_segments {
        let mut words = Vec::new();
        let mut objects = Vec::new();
        let mut shared_box: Option<[f64; 4]> = None;
        for oi in 0..objects_per_segment {
            let (word, category_id) = WORDS[rng.gen_range(0..WORDS.len())];
            words.push(word);
            let coref = with_coref && oi < 3 && objects_per_segment >= 2;
            let box_coords = if coref && shared_box.is_some() {
                shared_box.unwrap()
            } else {
                let w = rng.gen_range(60.0..200.0);
                let h = rng.gen_range(60.0..200.0);
                let x1 = rng.gen_range(0.0..width - w);
                let y1 = rng.gen_range(0.0..height - h);
                let b = [x1, y1, x1 + w, y1 + h];
                if coref {
                    shared_box = Some(b);
                }
                b
            };
            objects.push(AnnotatedObject {
                word: word.into(),
                category_id,
                token_span: (oi, oi),
                frame_idx: 0,
                box_coords,
                coref_group: if coref { Some(0) } else { None },
            });
        }
        segments.push(SegmentAnnotation {
            segment_id: format!("s{si:04}"),
            sentence: words.join(" "),
            objects,
        });
    }
    GroundTruthAnnotation {
        videos: vec![VideoAnnotation {
            video_id: "synthetic".into(),
            frame_width: width,
            frame_height: height,
            segments,
        }],
    }
}
