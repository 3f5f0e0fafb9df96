use serde::{Deserialize, Serialize};

use crate::pipeline::temporal_iou;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredInterval {
    pub start: usize,
    pub end: usize,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApResult {
    pub ap: f64,
    pub true_positives: usize,
    /// Set when there was no ground truth, so AP is reported as 0 by convention.
    pub undefined: bool,
}

/// Average precision of one video.
pub fn average_precision(events: &[ScoredInterval], gt: &[(usize, usize)], overlap: f64) -> Result<ApResult> {
    average_precision_grouped(&[(events.to_vec(), gt.to_vec())], overlap)
}

/// Average precision pooled over independent groups (videos or eyes). Events are ranked
/// globally by confidence but only match ground truth of their own group. Each event in rank
/// order takes the unmatched ground-truth interval with the highest IoU, provided that IoU is at
/// least `overlap`. AP is the sum of precision at every true-positive rank over the number of
/// ground-truth intervals.
pub fn average_precision_grouped(
    groups: &[(Vec<ScoredInterval>, Vec<(usize, usize)>)],
    overlap: f64,
) -> Result<ApResult> {
    let mut ranked: Vec<(usize, ScoredInterval)> = Vec::new();
    for (g, (events, gts)) in groups.iter().enumerate() {
        for e in events {
            if !(e.confidence >= 0.0) || !e.confidence.is_finite() {
                return Err(Error::invalid(format!("confidence {} is not a non-negative number", e.confidence)));
            }
            if e.end < e.start {
                return Err(Error::invalid("event interval ends before it starts"));
            }
            ranked.push((g, *e));
        }
        if gts.iter().any(|&(a, b)| b < a) {
            return Err(Error::invalid("ground-truth interval ends before it starts"));
        }
    }
    ranked.sort_by(|a, b| b.1.confidence.total_cmp(&a.1.confidence));
    let total_gt: usize = groups.iter().map(|(_, g)| g.len()).sum();
    if total_gt == 0 {
        return Ok(ApResult {
            ap: 0.0,
            true_positives: 0,
            undefined: true,
        });
    }
    let mut matched: Vec<Vec<bool>> = groups.iter().map(|(_, g)| vec![false; g.len()]).collect();
    let mut tp = 0usize;
    let mut sum = 0.0;
    for (rank, (g, e)) in ranked.iter().enumerate() {
        let gts = &groups[*g].1;
        let mut best: Option<(usize, f64)> = None;
        for (j, &iv) in gts.iter().enumerate() {
            if matched[*g][j] {
                continue;
            }
            let iou = temporal_iou((e.start, e.end), iv);
            if iou >= overlap && best.is_none_or(|(_, b)| iou > b) {
                best = Some((j, iou));
            }
        }
        if let Some((j, _)) = best {
            matched[*g][j] = true;
            tp += 1;
            sum += tp as f64 / (rank + 1) as f64;
        }
    }
    Ok(ApResult {
        ap: sum / total_gt as f64,
        true_positives: tp,
        undefined: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Precision and recall of "predict positive when confidence >= threshold" for every distinct
/// confidence, preceded by an infinite threshold that predicts nothing. Zero denominators give 0.
pub fn pr_curve(scores: &[(f64, bool)]) -> Vec<PrPoint> {
    let positives = scores.iter().filter(|s| s.1).count();
    let mut thresholds: Vec<f64> = scores.iter().map(|s| s.0).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    std::iter::once(f64::INFINITY)
        .chain(thresholds)
        .map(|t| {
            let predicted = scores.iter().filter(|s| s.0 >= t).count();
            let hits = scores.iter().filter(|s| s.0 >= t && s.1).count();
            PrPoint {
                threshold: t,
                precision: ratio(hits, predicted),
                recall: ratio(hits, positives),
            }
        })
        .collect()
}
