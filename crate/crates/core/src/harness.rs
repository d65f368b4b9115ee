//! Data formats and file ingestion.
//!
//! All files are JSON. The annotation schema is a converter-friendly
//! native format for ActivityNet-Entities-style data rather than the
//! upstream dump format; token spans index the crate's own
//! tokenization of the sentence, and box coordinates use the half-open
//! pixel convention (`[x1, y1, x2, y2]`, area = width * height). A
//! converter from the upstream schema must map its coordinates onto
//! this convention and re-index spans accordingly.
//!
//! Output JSON is written with sorted keys so runs are diff-stable.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::caption_prep::{tokenize, ObjectQuery, SentenceId};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::grounding::{Candidate, GroundingResult, SoftTokenDist};

/// Maximum text-token positions a soft-token distribution may cover.
pub const MAX_TEXT_TOKENS: usize = 256;

// ---------------------------------------------------------------------
// Ground-truth annotations
// ---------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthAnnotation {
    pub videos: Vec<VideoAnnotation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VideoAnnotation {
    pub video_id: String,
    pub frame_width: f64,
    pub frame_height: f64,
    pub segments: Vec<SegmentAnnotation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentAnnotation {
    pub segment_id: String,
    pub sentence: String,
    pub objects: Vec<AnnotatedObject>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedObject {
    pub word: String,
    pub category_id: u32,
    /// Inclusive token-index span into the tokenized sentence.
    pub token_span: (usize, usize),
    pub frame_idx: u32,
    #[serde(rename = "box")]
    pub box_coords: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coref_group: Option<u32>,
}

impl AnnotatedObject {
    pub fn bbox(&self) -> BBox {
        let [x1, y1, x2, y2] = self.box_coords;
        BBox::new(self.frame_idx, x1, y1, x2, y2)
    }

    pub fn query(&self, sentence_id: SentenceId) -> ObjectQuery {
        ObjectQuery {
            word: self.word.clone(),
            category_id: self.category_id,
            token_span: self.token_span,
            sentence_id,
            frame_idx: self.frame_idx,
            coref_group: self.coref_group,
        }
    }
}

impl GroundTruthAnnotation {
    pub fn validate(&self) -> Result<()> {
        let mut video_ids = std::collections::HashSet::new();
        for (vi, video) in self.videos.iter().enumerate() {
            let vpath = format!("videos[{vi}]");
            if !video_ids.insert(&video.video_id) {
                return Err(Error::format(
                    format!("{vpath}.video_id"),
                    format!("duplicate video id {:?}", video.video_id),
                ));
            }
            if !(video.frame_width > 0.0 && video.frame_width.is_finite()) {
                return Err(Error::format(
                    format!("{vpath}.frame_width"),
                    "frame width must be positive and finite",
                ));
            }
            if !(video.frame_height > 0.0 && video.frame_height.is_finite()) {
                return Err(Error::format(
                    format!("{vpath}.frame_height"),
                    "frame height must be positive and finite",
                ));
            }
            let mut segment_ids = std::collections::HashSet::new();
            for (si, segment) in video.segments.iter().enumerate() {
                let spath = format!("{vpath}.segments[{si}]");
                if !segment_ids.insert(&segment.segment_id) {
                    return Err(Error::format(
                        format!("{spath}.segment_id"),
                        format!("duplicate segment id {:?}", segment.segment_id),
                    ));
                }
                let token_count = tokenize(&segment.sentence).len();
                let mut spans = std::collections::HashSet::new();
                for (oi, object) in segment.objects.iter().enumerate() {
                    let opath = format!("{spath}.objects[{oi}]");
                    let (first, last) = object.token_span;
                    if first > last || last >= token_count || last >= MAX_TEXT_TOKENS {
                        return Err(Error::format(
                            format!("{opath}.token_span"),
                            format!(
                                "span ({first}, {last}) invalid for {token_count} sentence tokens \
                                 (cap {MAX_TEXT_TOKENS})"
                            ),
                        ));
                    }
                    if !spans.insert(object.token_span) {
                        return Err(Error::format(
                            format!("{opath}.token_span"),
                            "duplicate token span within one sentence",
                        ));
                    }
                    let [x1, y1, x2, y2] = object.box_coords;
                    if !(x1.is_finite() && y1.is_finite() && x2.is_finite() && y2.is_finite()) {
                        return Err(Error::format(
                            format!("{opath}.box"),
                            "coordinates must be finite",
                        ));
                    }
                    if x2 <= x1 || y2 <= y1 {
                        return Err(Error::format(
                            format!("{opath}.box"),
                            "annotated box must have positive width and height",
                        ));
                    }
                    if x1 < 0.0 || y1 < 0.0 || x2 > video.frame_width || y2 > video.frame_height {
                        return Err(Error::format(
                            format!("{opath}.box"),
                            format!(
                                "box [{x1}, {y1}, {x2}, {y2}] exceeds frame bounds \
                                 {} x {}",
                                video.frame_width, video.frame_height
                            ),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Total number of annotated object words.
    pub fn num_objects(&self) -> usize {
        self.videos
            .iter()
            .flat_map(|v| &v.segments)
            .map(|s| s.objects.len())
            .sum()
    }
}

pub fn load_annotations(path: &Path) -> Result<GroundTruthAnnotation> {
    let ann: GroundTruthAnnotation = read_json(path)?;
    ann.validate()?;
    Ok(ann)
}

// ---------------------------------------------------------------------
// Detector candidates
// ---------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateFile {
    pub model_id: String,
    pub segments: Vec<CandidateSegment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSegment {
    pub video_id: String,
    pub segment_id: String,
    pub candidates: Vec<CandidateRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub frame_idx: u32,
    #[serde(rename = "box")]
    pub box_coords: [f64; 4],
    pub confidence: f64,
    pub soft_tokens: Vec<f64>,
}

impl CandidateFile {
    pub fn validate(&self) -> Result<()> {
        for (si, segment) in self.segments.iter().enumerate() {
            for (ci, cand) in segment.candidates.iter().enumerate() {
                let cpath = format!("segments[{si}].candidates[{ci}]");
                if cand.box_coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::format(
                        format!("{cpath}.box"),
                        "coordinates must be finite",
                    ));
                }
                if !(0.0..=1.0).contains(&cand.confidence) || !cand.confidence.is_finite() {
                    return Err(Error::format(
                        format!("{cpath}.confidence"),
                        format!("confidence {} outside [0, 1]", cand.confidence),
                    ));
                }
                if cand.soft_tokens.len() > MAX_TEXT_TOKENS {
                    return Err(Error::format(
                        format!("{cpath}.soft_tokens"),
                        format!(
                            "{} token positions exceed the {MAX_TEXT_TOKENS} cap",
                            cand.soft_tokens.len()
                        ),
                    ));
                }
                SoftTokenDist::new(cand.soft_tokens.clone()).map_err(|e| {
                    Error::format(format!("{cpath}.soft_tokens"), e.to_string())
                })?;
            }
        }
        Ok(())
    }
}

/// All candidate files of one run, indexed by model and segment.
#[derive(Clone, Debug, Default)]
pub struct CandidateSet {
    models: BTreeMap<String, BTreeMap<SentenceId, Vec<Candidate>>>,
}

impl CandidateSet {
    pub fn from_files(files: Vec<CandidateFile>) -> Result<Self> {
        let mut models = BTreeMap::new();
        for file in files {
            file.validate()?;
            let model_id = file.model_id.clone();
            if models.contains_key(&model_id) {
                return Err(Error::Consistency(format!(
                    "duplicate model id {model_id:?} across candidate files"
                )));
            }
            let mut segments: BTreeMap<SentenceId, Vec<Candidate>> = BTreeMap::new();
            for seg in file.segments {
                let sid = SentenceId::new(seg.video_id, seg.segment_id);
                let entry = segments.entry(sid).or_default();
                for rec in seg.candidates {
                    let [x1, y1, x2, y2] = rec.box_coords;
                    entry.push(Candidate {
                        bbox: BBox::new(rec.frame_idx, x1, y1, x2, y2),
                        confidence: rec.confidence,
                        soft_tokens: SoftTokenDist::new(rec.soft_tokens)?,
                        model_id: model_id.clone(),
                    });
                }
            }
            models.insert(model_id, segments);
        }
        Ok(CandidateSet { models })
    }

    pub fn model_ids(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(String::as_str)
    }

    pub fn num_models(&self) -> usize {
        self.models.len()
    }

    /// Candidates of one model for one segment (empty when absent).
    pub fn for_segment(&self, model_id: &str, sentence_id: &SentenceId) -> &[Candidate] {
        self.models
            .get(model_id)
            .and_then(|m| m.get(sentence_id))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn iter_models(
        &self,
    ) -> impl Iterator<Item = (&str, &BTreeMap<SentenceId, Vec<Candidate>>)> {
        self.models.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Loads candidate files from a single JSON file or from every `.json`
/// in a directory.
pub fn load_candidates(path: &Path) -> Result<CandidateSet> {
    let mut files = Vec::new();
    if path.is_dir() {
        let mut entries: Vec<_> = std::fs::read_dir(path)
            .map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        entries.sort();
        for entry in entries {
            files.push(read_json::<CandidateFile>(&entry)?);
        }
    } else {
        files.push(read_json::<CandidateFile>(path)?);
    }
    CandidateSet::from_files(files)
}

// ---------------------------------------------------------------------
// Generated captions (sub-task II input)
// ---------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptionFile {
    pub segments: Vec<CaptionSegment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptionSegment {
    pub video_id: String,
    pub segment_id: String,
    pub sentence: String,
    /// Frame the segment's queries are grounded on.
    pub frame_idx: u32,
}

pub fn load_captions(path: &Path) -> Result<CaptionFile> {
    read_json(path)
}

// ---------------------------------------------------------------------
// Predictions (sub-task II output / eval-cap input)
// ---------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionFile {
    pub segments: Vec<PredictionSegment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionSegment {
    pub video_id: String,
    pub segment_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence: Option<String>,
    pub objects: Vec<PredictedObject>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedObject {
    pub word: String,
    pub category_id: u32,
    pub frame_idx: u32,
    #[serde(rename = "box")]
    pub box_coords: [f64; 4],
}

impl PredictedObject {
    pub fn bbox(&self) -> BBox {
        let [x1, y1, x2, y2] = self.box_coords;
        BBox::new(self.frame_idx, x1, y1, x2, y2)
    }
}

impl PredictionFile {
    pub fn validate(&self) -> Result<()> {
        for (si, seg) in self.segments.iter().enumerate() {
            for (oi, obj) in seg.objects.iter().enumerate() {
                if obj.box_coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::format(
                        format!("segments[{si}].objects[{oi}].box"),
                        "coordinates must be finite",
                    ));
                }
            }
        }
        Ok(())
    }
}

pub fn load_predictions(path: &Path) -> Result<PredictionFile> {
    let preds: PredictionFile = read_json(path)?;
    preds.validate()?;
    Ok(preds)
}

// ---------------------------------------------------------------------
// Grounding results (ground1 output / eval-loc input)
// ---------------------------------------------------------------------

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ResultsFile {
    pub results: Vec<GroundingResult>,
    pub misses: Vec<ObjectQuery>,
}

pub fn load_results(path: &Path) -> Result<ResultsFile> {
    read_json(path)
}

// ---------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Serializes with sorted object keys and a trailing newline.
pub fn to_sorted_json_string<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("in-memory serialization");
    let mut s = serde_json::to_string_pretty(&v).expect("in-memory serialization");
    s.push('\n');
    s
}

pub fn write_json_sorted<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_sorted_json_string(value)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
