#ifndef EOL_H
#define EOL_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum EolStatus {
  EOL_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  EOL_STATUS_NULL_ARGUMENT = 1,
  /**
   * Malformed input data or invalid parameter.
   */
  EOL_STATUS_INVALID = 2,
  /**
   * The underlying file could not be read.
   */
  EOL_STATUS_IO = 3,
  /**
   * An operation needing candidates received none.
   */
  EOL_STATUS_NO_CANDIDATES = 4,
} EolStatus;

/**
 * Opaque handle to a loaded ground-truth annotation file.
 */
typedef struct EolAnnotation EolAnnotation;

/**
 * Opaque handle to loaded detector candidates (file or directory).
 */
typedef struct EolCandidates EolCandidates;

/**
 * Axis-aligned box on a video frame; `x2`/`y2` are exclusive.
 */
typedef struct EolBox {
  uint32_t frame_idx;
  double x1;
  double y1;
  double x2;
  double y2;
} EolBox;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The
 * pointer stays valid until the next failing call on the same thread;
 * do not free it.
 */
const char *eol_last_error_message(void);

/**
 * Intersection-over-union of two boxes. Returns 0 for boxes on
 * different frames or with no positive-area union.
 *
 * # Safety
 * `a`, `b` and `out` must be valid pointers.
 */
enum EolStatus eol_iou(const struct EolBox *a, const struct EolBox *b, double *out);

/**
 * IoU-voting selection over `len` boxes. Writes the winning index to
 * `winner_out`; when `scores_out` is non-null it must have room for
 * `len` doubles and receives each box's vote score.
 *
 * # Safety
 * `boxes` must point to `len` boxes; `winner_out` must be valid;
 * `scores_out` is optional but must hold `len` doubles when given.
 */
enum EolStatus eol_iou_vote(const struct EolBox *boxes,
                            size_t len,
                            size_t *winner_out,
                            double *scores_out);

/**
 * Loads and validates an annotation JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EolStatus eol_annotation_load(const char *path, struct EolAnnotation **out);

/**
 * Number of annotated object words across all sentences.
 *
 * # Safety
 * `ann` must be a live handle from `eol_annotation_load`.
 */
size_t eol_annotation_num_objects(const struct EolAnnotation *ann);

/**
 * Releases an annotation handle. Null is ignored.
 *
 * # Safety
 * `ann` must be null or a handle not freed before.
 */
void eol_annotation_free(struct EolAnnotation *ann);

/**
 * Loads candidates from a JSON file or a directory of per-model files.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EolStatus eol_candidates_load(const char *path, struct EolCandidates **out);

/**
 * Number of distinct detector models in the candidate set.
 *
 * # Safety
 * `cands` must be a live handle from `eol_candidates_load`.
 */
size_t eol_candidates_num_models(const struct EolCandidates *cands);

/**
 * Releases a candidates handle. Null is ignored.
 *
 * # Safety
 * `cands` must be null or a handle not freed before.
 */
void eol_candidates_free(struct EolCandidates *cands);

/**
 * Runs grounding over the annotated object words, scores the result at
 * `iou_thresh`, and writes the localization report as a JSON string to
 * `report_out`. Free the string with `eol_string_free`.
 *
 * # Safety
 * `ann` and `cands` must be live handles; `report_out` must be valid.
 */
enum EolStatus eol_ground_and_score(const struct EolAnnotation *ann,
                                    const struct EolCandidates *cands,
                                    bool unify_coref,
                                    double iou_thresh,
                                    char **report_out);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void eol_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* EOL_H */
