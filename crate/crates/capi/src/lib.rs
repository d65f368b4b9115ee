//! C ABI over the localization core.
//!
//! All functions return [`EolStatus`]; outputs go through out-pointers.
//! Loaded files are held behind opaque handles that must be released
//! with the matching `_free` function. On failure a thread-local
//! message is set, readable via [`eol_last_error_message`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::path::Path;

use libc::c_char;

use eol_core::error::Error;
use eol_core::geometry::BBox;
use eol_core::grounding::{run_subtask1, PipelineOptions};
use eol_core::harness::{load_annotations, load_candidates, CandidateSet, GroundTruthAnnotation};
use eol_core::metrics::localization_accuracy;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EolStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Malformed input data or invalid parameter.
    Invalid = 2,
    /// The underlying file could not be read.
    Io = 3,
    /// An operation needing candidates received none.
    NoCandidates = 4,
}

/// Axis-aligned box on a video frame; `x2`/`y2` are exclusive.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct EolBox {
    pub frame_idx: u32,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl EolBox {
    fn to_bbox(self) -> BBox {
        BBox::new(self.frame_idx, self.x1, self.y1, self.x2, self.y2)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: EolStatus, err: &Error) -> EolStatus {
    set_error(err.to_string());
    status
}

fn status_for(err: &Error) -> EolStatus {
    match err {
        Error::Io { .. } => EolStatus::Io,
        Error::NoCandidates => EolStatus::NoCandidates,
        _ => EolStatus::Invalid,
    }
}

/// Message describing the most recent failure on this thread. The
/// pointer stays valid until the next failing call on the same thread;
/// do not free it.
#[no_mangle]
pub extern "C" fn eol_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

unsafe fn path_arg(ptr: *const c_char) -> Result<std::path::PathBuf, EolStatus> {
    if ptr.is_null() {
        set_error("null path");
        return Err(EolStatus::NullArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s).to_path_buf()),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(EolStatus::Invalid)
        }
    }
}

/// Intersection-over-union of two boxes. Returns 0 for boxes on
/// different frames or with no positive-area union.
///
/// # Safety
/// `a`, `b` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn eol_iou(a: *const EolBox, b: *const EolBox, out: *mut f64) -> EolStatus {
    if a.is_null() || b.is_null() || out.is_null() {
        set_error("null argument to eol_iou");
        return EolStatus::NullArgument;
    }
    *out = eol_core::geometry::iou(&(*a).to_bbox(), &(*b).to_bbox());
    EolStatus::Ok
}

/// IoU-voting selection over `len` boxes. Writes the winning index to
/// `winner_out`; when `scores_out` is non-null it must have room for
/// `len` doubles and receives each box's vote score.
///
/// # Safety
/// `boxes` must point to `len` boxes; `winner_out` must be valid;
/// `scores_out` is optional but must hold `len` doubles when given.
#[no_mangle]
pub unsafe extern "C" fn eol_iou_vote(
    boxes: *const EolBox,
    len: usize,
    winner_out: *mut usize,
    scores_out: *mut f64,
) -> EolStatus {
    if boxes.is_null() || winner_out.is_null() {
        set_error("null argument to eol_iou_vote");
        return EolStatus::NullArgument;
    }
    let slice = std::slice::from_raw_parts(boxes, len);
    let bboxes: Vec<BBox> = slice.iter().map(|b| b.to_bbox()).collect();
    match eol_core::fusion::iou_voting_select(&bboxes) {
        Ok(vote) => {
            *winner_out = vote.winner_index;
            if !scores_out.is_null() {
                std::ptr::copy_nonoverlapping(vote.scores.as_ptr(), scores_out, len);
            }
            EolStatus::Ok
        }
        Err(e) => fail(status_for(&e), &e),
    }
}

/// Opaque handle to a loaded ground-truth annotation file.
pub struct EolAnnotation(GroundTruthAnnotation);

/// Opaque handle to loaded detector candidates (file or directory).
pub struct EolCandidates(CandidateSet);

/// Loads and validates an annotation JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eol_annotation_load(
    path: *const c_char,
    out: *mut *mut EolAnnotation,
) -> EolStatus {
    if out.is_null() {
        set_error("null out pointer");
        return EolStatus::NullArgument;
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match load_annotations(&path) {
        Ok(ann) => {
            *out = Box::into_raw(Box::new(EolAnnotation(ann)));
            EolStatus::Ok
        }
        Err(e) => fail(status_for(&e), &e),
    }
}

/// Number of annotated object words across all sentences.
///
/// # Safety
/// `ann` must be a live handle from `eol_annotation_load`.
#[no_mangle]
pub unsafe extern "C" fn eol_annotation_num_objects(ann: *const EolAnnotation) -> usize {
    if ann.is_null() {
        return 0;
    }
    (*ann).0.num_objects()
}

/// Releases an annotation handle. Null is ignored.
///
/// # Safety
/// `ann` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn eol_annotation_free(ann: *mut EolAnnotation) {
    if !ann.is_null() {
        drop(Box::from_raw(ann));
    }
}

/// Loads candidates from a JSON file or a directory of per-model files.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eol_candidates_load(
    path: *const c_char,
    out: *mut *mut EolCandidates,
) -> EolStatus {
    if out.is_null() {
        set_error("null out pointer");
        return EolStatus::NullArgument;
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match load_candidates(&path) {
        Ok(set) => {
            *out = Box::into_raw(Box::new(EolCandidates(set)));
            EolStatus::Ok
        }
        Err(e) => fail(status_for(&e), &e),
    }
}

/// Number of distinct detector models in the candidate set.
///
/// # Safety
/// `cands` must be a live handle from `eol_candidates_load`.
#[no_mangle]
pub unsafe extern "C" fn eol_candidates_num_models(cands: *const EolCandidates) -> usize {
    if cands.is_null() {
        return 0;
    }
    (*cands).0.num_models()
}

/// Releases a candidates handle. Null is ignored.
///
/// # Safety
/// `cands` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn eol_candidates_free(cands: *mut EolCandidates) {
    if !cands.is_null() {
        drop(Box::from_raw(cands));
    }
}

/// Runs grounding over the annotated object words, scores the result at
/// `iou_thresh`, and writes the localization report as a JSON string to
/// `report_out`. Free the string with `eol_string_free`.
///
/// # Safety
/// `ann` and `cands` must be live handles; `report_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eol_ground_and_score(
    ann: *const EolAnnotation,
    cands: *const EolCandidates,
    unify_coref: bool,
    iou_thresh: f64,
    report_out: *mut *mut c_char,
) -> EolStatus {
    if ann.is_null() || cands.is_null() || report_out.is_null() {
        set_error("null argument to eol_ground_and_score");
        return EolStatus::NullArgument;
    }
    let options = PipelineOptions {
        unify_coref,
        ..PipelineOptions::default()
    };
    let result = run_subtask1(&(*ann).0, &(*cands).0, &options)
        .and_then(|output| localization_accuracy(&output, &(*ann).0, iou_thresh));
    match result {
        Ok(report) => {
            let json = eol_core::harness::to_sorted_json_string(&report.rounded());
            match CString::new(json) {
                Ok(c) => {
                    *report_out = c.into_raw();
                    EolStatus::Ok
                }
                Err(_) => {
                    set_error("report contained interior NUL");
                    EolStatus::Invalid
                }
            }
        }
        Err(e) => fail(status_for(&e), &e),
    }
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn eol_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
