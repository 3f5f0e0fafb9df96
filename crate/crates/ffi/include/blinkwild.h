#ifndef BLINKWILD_H
#define BLINKWILD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Bins of an appearance histogram.
 */
#define BW_LBP_BINS 59

/**
 * Components of one per-step feature row.
 */
#define BW_STEP_DIM 118

typedef enum BwStatus {
  BW_STATUS_OK = 0,
  BW_STATUS_NULL_POINTER = 1,
  BW_STATUS_INVALID_ARGUMENT = 2,
  BW_STATUS_IO = 3,
  BW_STATUS_INVALID_MODEL = 4,
  BW_STATUS_TRACK_LOST = 5,
  BW_STATUS_NUMERIC = 6,
  BW_STATUS_INTERNAL = 7,
} BwStatus;

typedef enum BwEye {
  BW_EYE_LEFT = 0,
  BW_EYE_RIGHT = 1,
} BwEye;

/**
 * Trained or freshly initialized verification model.
 */
typedef struct BwModel BwModel;

/**
 * Correlation-filter tracker of one eye.
 */
typedef struct BwTracker BwTracker;

/**
 * A blink over the inclusive frame interval `[start, end]`.
 */
typedef struct BwEvent {
  size_t start;
  size_t end;
  double confidence;
  enum BwEye eye;
} BwEvent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next failing call
 * on the same thread.
 */
const char *bw_last_error_message(void);

/**
 * Loads a model file into a new handle stored in `*out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum BwStatus bw_model_load(const char *path, struct BwModel **out);

/**
 * Creates an untrained model with the default shape.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum BwStatus bw_model_new_default(uint64_t seed, struct BwModel **out);

/**
 * # Safety
 * `model` must be a live handle and `path` a NUL-terminated string.
 */
enum BwStatus bw_model_save(const struct BwModel *model, const char *path);

/**
 * Classifies `n_steps` feature rows of `BW_STEP_DIM` values each. Writes 1 to `*is_blink` for a
 * blink verdict and the blink confidence to `*confidence`.
 *
 * # Safety
 * `model` must be a live handle, `rows` must hold `n_steps * BW_STEP_DIM` values and the output
 * pointers must be writable.
 */
enum BwStatus bw_model_predict(const struct BwModel *model,
                               const double *rows,
                               size_t n_steps,
                               int32_t *is_blink,
                               double *confidence);

/**
 * Classifies the step features of `n_frames` appearance histograms of `BW_LBP_BINS` values each.
 *
 * # Safety
 * As [`bw_model_predict`], with `histograms` holding `n_frames * BW_LBP_BINS` values.
 */
enum BwStatus bw_model_predict_histograms(const struct BwModel *model,
                                          const double *histograms,
                                          size_t n_frames,
                                          int32_t *is_blink,
                                          double *confidence);

/**
 * Releases a model handle. NULL is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void bw_model_free(struct BwModel *model);

/**
 * Uniform LBP histogram of a `width * height` patch, written to `BW_LBP_BINS` values at `bins`.
 *
 * # Safety
 * `patch` must hold `width * height` values and `bins` must have room for `BW_LBP_BINS`.
 */
enum BwStatus bw_lbp_histogram(const float *patch, size_t width, size_t height, double *bins);

/**
 * Side of the square local eye image for the given eye centers and face box. Pass
 * `(-1, -1)` for an eye that is not visible.
 *
 * # Safety
 * `side` must be writable.
 */
enum BwStatus bw_eye_region(int32_t left_x,
                            int32_t left_y,
                            int32_t right_x,
                            int32_t right_y,
                            int32_t face_x,
                            int32_t face_y,
                            int32_t face_w,
                            int32_t face_h,
                            size_t *side);

/**
 * Greedy temporal non-maximum suppression within each eye. Survivors are written to `kept`,
 * which must have room for `n` events; their number goes to `*n_kept`.
 *
 * # Safety
 * `events` must hold `n` events, `kept` must have room for `n`, `n_kept` must be writable.
 */
enum BwStatus bw_temporal_nms(const struct BwEvent *events,
                              size_t n,
                              double iou_thresh,
                              struct BwEvent *kept,
                              size_t *n_kept);

/**
 * Starts tracking a `box_w * box_h` target centered at `(cx, cy)` with default parameters.
 *
 * # Safety
 * `frame` must hold `width * height` values and `out` must be writable.
 */
enum BwStatus bw_tracker_new(const float *frame,
                             size_t width,
                             size_t height,
                             int32_t cx,
                             int32_t cy,
                             size_t box_w,
                             size_t box_h,
                             struct BwTracker **out);

/**
 * Advances the tracker by one frame and reports the new center and the detection score.
 *
 * # Safety
 * `tracker` must be a live handle, `frame` must hold `width * height` values and the output
 * pointers must be writable.
 */
enum BwStatus bw_tracker_update(struct BwTracker *tracker,
                                const float *frame,
                                size_t width,
                                size_t height,
                                int32_t *cx,
                                int32_t *cy,
                                double *score);

/**
 * Releases a tracker handle. NULL is ignored.
 *
 * # Safety
 * `tracker` must come from this library and not be used afterwards.
 */
void bw_tracker_free(struct BwTracker *tracker);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLINKWILD_H */
