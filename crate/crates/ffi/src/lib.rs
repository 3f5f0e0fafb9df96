//! C ABI over the blinkwild toolkit.
//!
//! Every function returns a [`BwStatus`]. On failure a message is kept per thread and can be
//! read with [`bw_last_error_message`]. Models and trackers are opaque handles owned by the
//! caller and released with their `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use blinkwild::dataset::{eye_region, Eye, EyeCenter, FaceBox, GrayFrame};
use blinkwild::features::{uniform_lbp, FeatureSequence, LBP_BINS, STEP_DIM};
use blinkwild::mslstm::{load_model, save_model, MsLstmModel};
use blinkwild::pipeline::{temporal_nms, BlinkEvent};
use blinkwild::tracker::{kcf_init, kcf_update, KcfParams, KcfState, TrackRegion};
use blinkwild::Error;

/// Bins of an appearance histogram.
pub const BW_LBP_BINS: usize = 59;
/// Components of one per-step feature row.
pub const BW_STEP_DIM: usize = 118;

const _: () = assert!(BW_LBP_BINS == LBP_BINS && BW_STEP_DIM == STEP_DIM);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    InvalidModel = 4,
    TrackLost = 5,
    Numeric = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BwEye {
    Left = 0,
    Right = 1,
}

/// A blink over the inclusive frame interval `[start, end]`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BwEvent {
    pub start: usize,
    pub end: usize,
    pub confidence: f64,
    pub eye: BwEye,
}

/// Trained or freshly initialized verification model.
pub struct BwModel {
    inner: MsLstmModel,
}

/// Correlation-filter tracker of one eye.
pub struct BwTracker {
    state: KcfState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BwStatus {
    match err {
        Error::Io { .. } | Error::MissingAsset(_) | Error::Json { .. } => BwStatus::Io,
        Error::InvalidModel(_) => BwStatus::InvalidModel,
        Error::TrackLost(_) => BwStatus::TrackLost,
        Error::Numeric(_) | Error::UndefinedCorrelation => BwStatus::Numeric,
        _ => BwStatus::InvalidArgument,
    }
}

fn fail(status: BwStatus, msg: impl Into<String>) -> BwStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, recording its error and containing panics.
fn guard(f: impl FnOnce() -> Result<(), BwStatus>) -> BwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BwStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(BwStatus::Internal, "internal panic"),
    }
}

fn check<T>(r: blinkwild::Result<T>) -> Result<T, BwStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), BwStatus> {
    if p.is_null() {
        Err(fail(BwStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, BwStatus> {
    non_null(p, "path")?;
    // SAFETY: non-null and documented as a NUL-terminated string.
    let s = unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(BwStatus::InvalidArgument, "path is not UTF-8"))?;
    Ok(Path::new(s))
}

/// Copies a caller-owned `width * height` row-major image.
fn frame_arg(pixels: *const f32, width: usize, height: usize) -> Result<GrayFrame, BwStatus> {
    non_null(pixels, "pixels")?;
    let n = width
        .checked_mul(height)
        .ok_or_else(|| fail(BwStatus::InvalidArgument, "image size overflows"))?;
    // SAFETY: the caller guarantees `width * height` readable floats.
    let data = unsafe { std::slice::from_raw_parts(pixels, n) }.to_vec();
    check(GrayFrame::new(width, height, data))
}

/// Message of the last failed call on this thread, or NULL. Valid until the next failing call
/// on the same thread.
#[no_mangle]
pub extern "C" fn bw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a model file into a new handle stored in `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bw_model_load(path: *const c_char, out: *mut *mut BwModel) -> BwStatus {
    guard(|| {
        non_null(out, "out")?;
        let model = check(load_model(path_arg(path)?))?;
        *out = Box::into_raw(Box::new(BwModel { inner: model }));
        Ok(())
    })
}

/// Creates an untrained model with the default shape.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bw_model_new_default(seed: u64, out: *mut *mut BwModel) -> BwStatus {
    guard(|| {
        non_null(out, "out")?;
        let model = check(MsLstmModel::with_defaults(seed))?;
        *out = Box::into_raw(Box::new(BwModel { inner: model }));
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bw_model_save(model: *const BwModel, path: *const c_char) -> BwStatus {
    guard(|| {
        non_null(model, "model")?;
        check(save_model(&(*model).inner, path_arg(path)?))
    })
}

/// Classifies `n_steps` feature rows of `BW_STEP_DIM` values each. Writes 1 to `*is_blink` for a
/// blink verdict and the blink confidence to `*confidence`.
///
/// # Safety
/// `model` must be a live handle, `rows` must hold `n_steps * BW_STEP_DIM` values and the output
/// pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn bw_model_predict(
    model: *const BwModel,
    rows: *const f64,
    n_steps: usize,
    is_blink: *mut i32,
    confidence: *mut f64,
) -> BwStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(rows, "rows")?;
        non_null(is_blink, "is_blink")?;
        non_null(confidence, "confidence")?;
        let n = n_steps
            .checked_mul(STEP_DIM)
            .ok_or_else(|| fail(BwStatus::InvalidArgument, "row count overflows"))?;
        let flat = std::slice::from_raw_parts(rows, n);
        let rows: Vec<Vec<f64>> = flat.chunks(STEP_DIM).map(<[f64]>::to_vec).collect();
        let (label, conf) = check((*model).inner.predict_rows(&rows))?;
        *is_blink = i32::from(label == blinkwild::dataset::Label::Blink);
        *confidence = conf;
        Ok(())
    })
}

/// Classifies the step features of `n_frames` appearance histograms of `BW_LBP_BINS` values each.
///
/// # Safety
/// As [`bw_model_predict`], with `histograms` holding `n_frames * BW_LBP_BINS` values.
#[no_mangle]
pub unsafe extern "C" fn bw_model_predict_histograms(
    model: *const BwModel,
    histograms: *const f64,
    n_frames: usize,
    is_blink: *mut i32,
    confidence: *mut f64,
) -> BwStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(histograms, "histograms")?;
        non_null(is_blink, "is_blink")?;
        non_null(confidence, "confidence")?;
        let n = n_frames
            .checked_mul(LBP_BINS)
            .ok_or_else(|| fail(BwStatus::InvalidArgument, "histogram count overflows"))?;
        let flat = std::slice::from_raw_parts(histograms, n);
        let hists = flat
            .chunks(LBP_BINS)
            .map(|c| {
                let mut bins = [0.0; LBP_BINS];
                bins.copy_from_slice(c);
                check(blinkwild::features::LbpHistogram::from_bins(bins))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let seq = FeatureSequence::from_histograms(&hists);
        let (label, conf) = check((*model).inner.predict(&seq))?;
        *is_blink = i32::from(label == blinkwild::dataset::Label::Blink);
        *confidence = conf;
        Ok(())
    })
}

/// Releases a model handle. NULL is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bw_model_free(model: *mut BwModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Uniform LBP histogram of a `width * height` patch, written to `BW_LBP_BINS` values at `bins`.
///
/// # Safety
/// `patch` must hold `width * height` values and `bins` must have room for `BW_LBP_BINS`.
#[no_mangle]
pub unsafe extern "C" fn bw_lbp_histogram(patch: *const f32, width: usize, height: usize, bins: *mut f64) -> BwStatus {
    guard(|| {
        non_null(bins, "bins")?;
        let frame = frame_arg(patch, width, height)?;
        let h = check(uniform_lbp(&frame))?;
        std::slice::from_raw_parts_mut(bins, LBP_BINS).copy_from_slice(h.bins());
        Ok(())
    })
}

/// Side of the square local eye image for the given eye centers and face box. Pass
/// `(-1, -1)` for an eye that is not visible.
///
/// # Safety
/// `side` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bw_eye_region(
    left_x: i32,
    left_y: i32,
    right_x: i32,
    right_y: i32,
    face_x: i32,
    face_y: i32,
    face_w: i32,
    face_h: i32,
    side: *mut usize,
) -> BwStatus {
    guard(|| {
        non_null(side, "side")?;
        let r = check(eye_region(
            EyeCenter::from_coords(left_x, left_y),
            EyeCenter::from_coords(right_x, right_y),
            FaceBox {
                x: face_x,
                y: face_y,
                w: face_w,
                h: face_h,
            },
        ))?;
        *side = r.width;
        Ok(())
    })
}

/// Greedy temporal non-maximum suppression within each eye. Survivors are written to `kept`,
/// which must have room for `n` events; their number goes to `*n_kept`.
///
/// # Safety
/// `events` must hold `n` events, `kept` must have room for `n`, `n_kept` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bw_temporal_nms(
    events: *const BwEvent,
    n: usize,
    iou_thresh: f64,
    kept: *mut BwEvent,
    n_kept: *mut usize,
) -> BwStatus {
    guard(|| {
        non_null(n_kept, "n_kept")?;
        if n == 0 {
            *n_kept = 0;
            return Ok(());
        }
        non_null(events, "events")?;
        non_null(kept, "kept")?;
        let input = std::slice::from_raw_parts(events, n);
        let proposals = input
            .iter()
            .map(|e| {
                if e.end < e.start || !e.confidence.is_finite() {
                    return Err(fail(BwStatus::InvalidArgument, "malformed event"));
                }
                Ok(BlinkEvent {
                    start: e.start,
                    end: e.end,
                    confidence: e.confidence,
                    eye: match e.eye {
                        BwEye::Left => Eye::Left,
                        BwEye::Right => Eye::Right,
                    },
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let out = temporal_nms(&proposals, iou_thresh);
        let dst = std::slice::from_raw_parts_mut(kept, n);
        for (d, e) in dst.iter_mut().zip(&out) {
            *d = BwEvent {
                start: e.start,
                end: e.end,
                confidence: e.confidence,
                eye: match e.eye {
                    Eye::Left => BwEye::Left,
                    Eye::Right => BwEye::Right,
                },
            };
        }
        *n_kept = out.len();
        Ok(())
    })
}

/// Starts tracking a `box_w * box_h` target centered at `(cx, cy)` with default parameters.
///
/// # Safety
/// `frame` must hold `width * height` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bw_tracker_new(
    frame: *const f32,
    width: usize,
    height: usize,
    cx: i32,
    cy: i32,
    box_w: usize,
    box_h: usize,
    out: *mut *mut BwTracker,
) -> BwStatus {
    guard(|| {
        non_null(out, "out")?;
        let f = frame_arg(frame, width, height)?;
        let region = TrackRegion {
            cx,
            cy,
            h: box_h,
            w: box_w,
        };
        let state = check(kcf_init(&f, region, KcfParams::default()))?;
        *out = Box::into_raw(Box::new(BwTracker { state }));
        Ok(())
    })
}

/// Advances the tracker by one frame and reports the new center and the detection score.
///
/// # Safety
/// `tracker` must be a live handle, `frame` must hold `width * height` values and the output
/// pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn bw_tracker_update(
    tracker: *mut BwTracker,
    frame: *const f32,
    width: usize,
    height: usize,
    cx: *mut i32,
    cy: *mut i32,
    score: *mut f64,
) -> BwStatus {
    guard(|| {
        non_null(tracker, "tracker")?;
        non_null(cx, "cx")?;
        non_null(cy, "cy")?;
        non_null(score, "score")?;
        let f = frame_arg(frame, width, height)?;
        let t = &mut *tracker;
        let (next, r) = check(kcf_update(&t.state, &f))?;
        t.state = next;
        *cx = r.region.cx;
        *cy = r.region.cy;
        *score = r.score;
        Ok(())
    })
}

/// Releases a tracker handle. NULL is ignored.
///
/// # Safety
/// `tracker` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bw_tracker_free(tracker: *mut BwTracker) {
    if !tracker.is_null() {
        drop(Box::from_raw(tracker));
    }
}
