use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::Eye;

/// A detected blink over the inclusive frame interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlinkEvent {
    pub start: usize,
    pub end: usize,
    pub confidence: f64,
    pub eye: Eye,
}

/// Intersection over union of two inclusive frame intervals.
pub fn temporal_iou(a: (usize, usize), b: (usize, usize)) -> f64 {
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    let inter = if hi >= lo { hi - lo + 1 } else { 0 };
    let union = (a.1 - a.0 + 1) + (b.1 - b.0 + 1) - inter;
    inter as f64 / union as f64
}

fn eye_rank(e: Eye) -> u8 {
    match e {
        Eye::Left => 0,
        Eye::Right => 1,
    }
}

/// Selection priority: higher confidence first, then earlier start, then left before right, then
/// earlier end. Full ties keep input order.
pub(crate) fn priority(a: &BlinkEvent, b: &BlinkEvent) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then(a.start.cmp(&b.start))
        .then(eye_rank(a.eye).cmp(&eye_rank(b.eye)))
        .then(a.end.cmp(&b.end))
}

/// Greedy temporal non-maximum suppression. A kept event suppresses every remaining event of
/// the same eye whose IoU with it is strictly above `iou_thresh`. Survivors are returned in
/// selection order.
pub fn temporal_nms(proposals: &[BlinkEvent], iou_thresh: f64) -> Vec<BlinkEvent> {
    let mut order: Vec<BlinkEvent> = proposals.to_vec();
    order.sort_by(priority);
    let mut kept: Vec<BlinkEvent> = Vec::new();
    for p in order {
        let suppressed = kept.iter().any(|k| {
            k.eye == p.eye && temporal_iou((k.start, k.end), (p.start, p.end)) > iou_thresh
        });
        if !suppressed {
            kept.push(p);
        }
    }
    kept
}
