//! End-to-end detection: eye localization, tracking with re-localization, clip verification and
//! untrimmed-stream detection.

mod batch;
mod detect;
mod nms;

use crate::dataset::{eye_region, AnnotationRecord, Clip, Eye, EyeCenter, EyeRegion, FaceBox, GrayFrame, Label};
use crate::features::{featurize_frames, EyeBox, FeatureSequence, DEFAULT_PATCH};
use crate::mslstm::MsLstmModel;
use crate::tracker::{kcf_init, kcf_update, KcfParams, KcfState, TrackRegion};
use crate::{Error, Result};

pub use batch::{
    confusion, localization_ok, localization_tally, metrics_by_eye, split_sequences, verify_split,
    PredictionRow, PREDICTION_HEADER,
};
pub use detect::{detect_stream, eye_histograms, window_positions, DetectParams, Detection};
pub use nms::{temporal_iou, temporal_nms, BlinkEvent};

/// Default tracker score below which the locator is re-invoked.
pub const DEFAULT_TRACK_THRESH: f64 = 0.25;

/// Eye positions reported by a locator for one frame. An invisible center means that eye was
/// not found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Located {
    pub left: EyeCenter,
    pub right: EyeCenter,
    pub face_box: FaceBox,
}

impl Located {
    pub fn eye(&self, side: Eye) -> EyeCenter {
        match side {
            Eye::Left => self.left,
            Eye::Right => self.right,
        }
    }
}

/// Source of initial eye positions. Returning `None` is a normal outcome.
pub trait EyeLocator: Sync {
    fn locate(&self, frame: &GrayFrame, frame_index: usize) -> Option<Located>;
}

/// Locator backed by per-frame annotations.
#[derive(Debug, Clone)]
pub struct AnnotationLocator {
    records: Vec<AnnotationRecord>,
}

impl AnnotationLocator {
    pub fn new(records: Vec<AnnotationRecord>) -> Self {
        Self { records }
    }
}

impl EyeLocator for AnnotationLocator {
    fn locate(&self, _frame: &GrayFrame, frame_index: usize) -> Option<Located> {
        let r = self.records.get(frame_index)?;
        if !r.left_eye.visible && !r.right_eye.visible {
            return None;
        }
        Some(Located {
            left: r.left_eye,
            right: r.right_eye,
            face_box: r.face_box,
        })
    }
}

pub fn annotation_locator(clip: &Clip) -> AnnotationLocator {
    AnnotationLocator::new(clip.annotations().to_vec())
}

/// Locator that never finds anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullLocator;

impl EyeLocator for NullLocator {
    fn locate(&self, _frame: &GrayFrame, _frame_index: usize) -> Option<Located> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackParams {
    pub kcf: KcfParams,
    pub track_thresh: f64,
}

impl Default for TrackParams {
    fn default() -> Self {
        Self {
            kcf: KcfParams::default(),
            track_thresh: DEFAULT_TRACK_THRESH,
        }
    }
}

/// Per-frame boxes and scores of one eye track.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedStream {
    pub eye: Eye,
    /// One box per frame unless the stream is lost.
    pub boxes: Vec<EyeBox>,
    /// Tracker score per frame; frames where the tracker was (re)initialized score 1.
    pub scores: Vec<f64>,
    /// Frames where the score fell below the threshold and the locator was consulted.
    pub relocalizations: Vec<usize>,
    /// Subset of `relocalizations` where the locator failed and the previous box was kept.
    pub stale_frames: Vec<usize>,
    /// First frame without a box, if any.
    pub lost_from: Option<usize>,
}

impl TrackedStream {
    fn lost(eye: Eye) -> Self {
        Self {
            eye,
            boxes: Vec::new(),
            scores: Vec::new(),
            relocalizations: Vec::new(),
            stale_frames: Vec::new(),
            lost_from: Some(0),
        }
    }

    pub fn is_lost(&self) -> bool {
        self.lost_from.is_some()
    }
}

/// Region and tracker seeded from a locator result, if that eye is usable.
pub(crate) fn seed_track(
    frame: &GrayFrame,
    found: Option<Located>,
    side: Eye,
    params: &TrackParams,
) -> Option<(EyeBox, KcfState)> {
    let loc = found?;
    let center = loc.eye(side);
    if !center.visible {
        return None;
    }
    let size = eye_region(loc.left, loc.right, loc.face_box).ok()?;
    let region = TrackRegion {
        cx: center.x,
        cy: center.y,
        h: size.height,
        w: size.width,
    };
    let state = kcf_init(frame, region, params.kcf).ok()?;
    Some((EyeBox { center, size }, state))
}

pub(crate) fn box_of(region: TrackRegion) -> EyeBox {
    EyeBox {
        center: EyeCenter::visible(region.cx, region.cy),
        size: EyeRegion {
            height: region.h,
            width: region.w,
        },
    }
}

/// Tracks one eye through `frames`, re-invoking the locator whenever the score drops below
/// `params.track_thresh`.
pub fn track_eye(
    frames: &[GrayFrame],
    locator: &dyn EyeLocator,
    side: Eye,
    params: &TrackParams,
) -> Result<TrackedStream> {
    if frames.is_empty() {
        return Err(Error::invalid("tracking needs at least one frame"));
    }
    let Some((first, mut state)) = seed_track(&frames[0], locator.locate(&frames[0], 0), side, params)
    else {
        return Ok(TrackedStream::lost(side));
    };
    let mut out = TrackedStream {
        eye: side,
        boxes: vec![first],
        scores: vec![1.0],
        relocalizations: Vec::new(),
        stale_frames: Vec::new(),
        lost_from: None,
    };
    for (t, frame) in frames.iter().enumerate().skip(1) {
        let (next, score) = match kcf_update(&state, frame) {
            Ok((s, r)) => (Some(s), r.score),
            Err(Error::TrackLost(_)) => (None, f64::NEG_INFINITY),
            Err(e) => return Err(e),
        };
        if score >= params.track_thresh {
            let next = next.expect("scored update has a state");
            out.boxes.push(box_of(next.region()));
            out.scores.push(score);
            state = next;
            continue;
        }
        out.relocalizations.push(t);
        match seed_track(frame, locator.locate(frame, t), side, params) {
            Some((b, s)) => {
                out.boxes.push(b);
                out.scores.push(1.0);
                state = s;
            }
            None => {
                out.stale_frames.push(t);
                let prev = *out.boxes.last().expect("non-empty");
                out.boxes.push(prev);
                out.scores.push(score.max(0.0));
            }
        }
    }
    Ok(out)
}

/// Tracks both eyes independently and concurrently.
pub fn track_eyes(
    frames: &[GrayFrame],
    locator: &dyn EyeLocator,
    params: &TrackParams,
) -> Result<(TrackedStream, TrackedStream)> {
    let (l, r) = rayon::join(
        || track_eye(frames, locator, Eye::Left, params),
        || track_eye(frames, locator, Eye::Right, params),
    );
    Ok((l?, r?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyeVerdict {
    pub eye: Eye,
    pub label: Label,
    /// Blink probability.
    pub confidence: f64,
    pub lost: bool,
}

/// Classifies a fixed-length clip once per eye. A lost eye is reported as non-blink with zero
/// confidence.
pub fn verify_clip(
    clip: &Clip,
    locator: &dyn EyeLocator,
    model: &MsLstmModel,
    params: &TrackParams,
) -> Result<[EyeVerdict; 2]> {
    let (left, right) = track_eyes(clip.frames(), locator, params)?;
    Ok([
        verdict_for(clip.frames(), &left, model)?,
        verdict_for(clip.frames(), &right, model)?,
    ])
}

/// Verification of a clip together with the tracked streams, for callers that also score
/// localization.
pub fn verify_clip_tracked(
    clip: &Clip,
    locator: &dyn EyeLocator,
    model: &MsLstmModel,
    params: &TrackParams,
) -> Result<([EyeVerdict; 2], [TrackedStream; 2])> {
    let (left, right) = track_eyes(clip.frames(), locator, params)?;
    let verdicts = [
        verdict_for(clip.frames(), &left, model)?,
        verdict_for(clip.frames(), &right, model)?,
    ];
    Ok((verdicts, [left, right]))
}

/// Feature sequence of every eye the tracker keeps, in left-right order. These are the inputs
/// the verifier classifies, so training on them matches inference.
pub fn clip_sequences(
    clip: &Clip,
    locator: &dyn EyeLocator,
    params: &TrackParams,
) -> Result<Vec<(Eye, FeatureSequence)>> {
    let (left, right) = track_eyes(clip.frames(), locator, params)?;
    [left, right]
        .into_iter()
        .filter(|s| !s.is_lost())
        .map(|s| Ok((s.eye, featurize_frames(clip.frames(), &s.boxes, DEFAULT_PATCH)?)))
        .collect()
}

fn verdict_for(frames: &[GrayFrame], stream: &TrackedStream, model: &MsLstmModel) -> Result<EyeVerdict> {
    if stream.is_lost() {
        return Ok(EyeVerdict {
            eye: stream.eye,
            label: Label::NonBlink,
            confidence: 0.0,
            lost: true,
        });
    }
    let seq = featurize_frames(frames, &stream.boxes, DEFAULT_PATCH)?;
    let (label, confidence) = model.predict(&seq)?;
    Ok(EyeVerdict {
        eye: stream.eye,
        label,
        confidence,
        lost: false,
    })
}
