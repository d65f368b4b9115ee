//! Deterministic core of a two-stage entities object localization
//! system: caption-side object-query extraction and training-data
//! preparation, detector-candidate scoring, IoU-voting ensemble fusion
//! with co-reference unification, and the grounding evaluation metrics
//! for both sub-tasks, verified end-to-end against a seedable synthetic
//! detector.
//!
//! Neural components (caption generation, the detector itself) are out
//! of scope; their outputs enter through the candidate and caption file
//! formats in [`harness`].

pub mod caption_prep;
pub mod error;
pub mod fusion;
pub mod geometry;
pub mod grounding;
pub mod harness;
pub mod metrics;
pub mod simulator;

pub use error::{Error, Result};
pub use geometry::{area, iou, BBox};
