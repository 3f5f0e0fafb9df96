use super::nms::{priority, temporal_nms, BlinkEvent};
use super::{track_eyes, EyeLocator, TrackParams, TrackedStream};
use crate::dataset::GrayFrame;
use crate::features::{eye_histogram, FeatureSequence, LbpHistogram, DEFAULT_PATCH};
use crate::mslstm::MsLstmModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectParams {
    pub window: usize,
    pub stride: usize,
    pub conf_thresh: f64,
    pub iou_thresh: f64,
    pub track: TrackParams,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            window: 10,
            stride: 1,
            conf_thresh: 0.5,
            iou_thresh: 0.33,
            track: TrackParams::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Detection {
    /// Surviving events, sorted by start then eye.
    pub events: Vec<BlinkEvent>,
    /// Windows at or above the confidence threshold, before suppression.
    pub proposals: Vec<BlinkEvent>,
    /// Window positions evaluated per tracked eye.
    pub positions: usize,
    pub streams: [TrackedStream; 2],
}

/// Number of window placements over `n` frames.
pub fn window_positions(n: usize, window: usize, stride: usize) -> usize {
    if window == 0 || stride == 0 || n < window {
        0
    } else {
        (n - window) / stride + 1
    }
}

/// Appearance histogram of every frame of a tracked eye.
pub fn eye_histograms(frames: &[GrayFrame], stream: &TrackedStream) -> Result<Vec<LbpHistogram>> {
    if stream.boxes.len() != frames.len() {
        return Err(Error::TrackLost(format!(
            "{} eye has {} boxes for {} frames",
            stream.eye.as_str(),
            stream.boxes.len(),
            frames.len()
        )));
    }
    frames
        .iter()
        .zip(&stream.boxes)
        .map(|(f, &b)| eye_histogram(f, b, DEFAULT_PATCH))
        .collect()
}

fn propose(
    frames: &[GrayFrame],
    stream: &TrackedStream,
    model: &MsLstmModel,
    params: &DetectParams,
) -> Result<Vec<BlinkEvent>> {
    if stream.is_lost() {
        return Ok(Vec::new());
    }
    let hists = eye_histograms(frames, stream)?;
    let mut out = Vec::new();
    for p in 0..window_positions(frames.len(), params.window, params.stride) {
        let start = p * params.stride;
        let seq = FeatureSequence::from_histograms(&hists[start..start + params.window]);
        let (_, confidence) = model.predict(&seq)?;
        if confidence >= params.conf_thresh {
            out.push(BlinkEvent {
                start,
                end: start + params.window - 1,
                confidence,
                eye: stream.eye,
            });
        }
    }
    Ok(out)
}

/// Sliding-window blink detection over an untrimmed stream, tracked once per eye.
pub fn detect_stream(
    frames: &[GrayFrame],
    locator: &dyn EyeLocator,
    model: &MsLstmModel,
    params: &DetectParams,
) -> Result<Detection> {
    if params.window < 2 || params.stride == 0 {
        return Err(Error::invalid("window must be at least 2 and stride positive"));
    }
    if params.window < model.hyper.scales + 1 {
        return Err(Error::invalid(format!(
            "window of {} frames is too short for {} scales",
            params.window, model.hyper.scales
        )));
    }
    if frames.len() < params.window {
        return Err(Error::invalid(format!(
            "stream of {} frames is shorter than the {}-frame window",
            frames.len(),
            params.window
        )));
    }
    let (left, right) = track_eyes(frames, locator, &params.track)?;
    let (pl, pr) = rayon::join(
        || propose(frames, &left, model, params),
        || propose(frames, &right, model, params),
    );
    let mut proposals = pl?;
    proposals.extend(pr?);
    proposals.sort_by(priority);
    let mut events = temporal_nms(&proposals, params.iou_thresh);
    events.sort_by(|a, b| a.start.cmp(&b.start).then(priority(a, b)));
    Ok(Detection {
        events,
        proposals,
        positions: window_positions(frames.len(), params.window, params.stride),
        streams: [left, right],
    })
}
