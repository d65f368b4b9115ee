//! Axis-aligned bounding boxes and Intersection-over-Union.
//!
//! Boxes use the half-open pixel convention: a box covers
//! `[x1, x2) x [y1, y2)`, so its area is `(x2 - x1) * (y2 - y1)` with no
//! `+1` correction. Boxes live on a specific video frame; IoU across
//! different frames is defined as 0.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle on a specific video frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub frame_idx: u32,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BBox {
    /// Builds a box, swapping coordinates if needed so that
    /// `x1 <= x2` and `y1 <= y2` always hold.
    pub fn new(frame_idx: u32, x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        let (x1, x2) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        let (y1, y2) = if y1 <= y2 { (y1, y2) } else { (y2, y1) };
        BBox {
            frame_idx,
            x1,
            y1,
            x2,
            y2,
        }
    }

    pub fn area(&self) -> f64 {
        (self.x2 - self.x1) * (self.y2 - self.y1)
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.y1.is_finite() && self.x2.is_finite() && self.y2.is_finite()
    }

    /// Total order on (frame_idx, x1, y1, x2, y2), used as the fusion
    /// tie-break so results do not depend on input order.
    pub fn cmp_lex(&self, other: &BBox) -> Ordering {
        self.frame_idx
            .cmp(&other.frame_idx)
            .then_with(|| self.x1.total_cmp(&other.x1))
            .then_with(|| self.y1.total_cmp(&other.y1))
            .then_with(|| self.x2.total_cmp(&other.x2))
            .then_with(|| self.y2.total_cmp(&other.y2))
    }
}

pub fn area(b: &BBox) -> f64 {
    b.area()
}

/// Intersection-over-Union of two boxes.
///
/// Boxes on different frames have IoU 0. Two degenerate boxes (union
/// area 0) also return 0, never NaN.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    if a.frame_idx != b.frame_idx {
        return 0.0;
    }
    let ix = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let iy = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}
