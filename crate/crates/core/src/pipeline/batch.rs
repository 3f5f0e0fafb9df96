use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{annotation_locator, clip_sequences, verify_clip_tracked, TrackParams, TrackedStream};
use crate::dataset::{AnnotationRecord, Eye, Label, Manifest, Split};
use crate::eval::{me, me_correct, ConfusionCounts, EyeMetrics, LocalizationTally};
use crate::features::FeatureSequence;
use crate::mslstm::MsLstmModel;
use crate::Result;

/// Labelled feature sequences of every tracked eye in one split, in manifest order.
pub fn split_sequences(
    manifest: &Manifest,
    split: Split,
    params: &TrackParams,
) -> Result<Vec<(FeatureSequence, Label)>> {
    let entries: Vec<_> = manifest.split(split).collect();
    let per_clip: Vec<Result<Vec<(FeatureSequence, Label)>>> = entries
        .par_iter()
        .map(|e| {
            let clip = manifest.load_clip(e)?;
            let seqs = clip_sequences(&clip, &annotation_locator(&clip), params)?;
            Ok(seqs.into_iter().map(|(_, s)| (s, e.label)).collect())
        })
        .collect();
    let mut out = Vec::new();
    for r in per_clip {
        out.extend(r?);
    }
    Ok(out)
}

/// One verified eye of one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub clip: String,
    pub source_id: String,
    pub truth: Label,
    pub eye: Eye,
    pub predicted: Label,
    pub confidence: f64,
    /// No box on the first frame.
    pub lost: bool,
    /// Every frame with a defined inter-ocular distance has normalized error at most 0.4.
    pub localized: bool,
}

pub const PREDICTION_HEADER: &str = "clip,source_id,truth,eye,predicted,confidence,lost,localized";

impl PredictionRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.clip,
            self.source_id,
            self.truth.as_str(),
            self.eye.as_str(),
            self.predicted.as_str(),
            self.confidence,
            self.lost,
            self.localized
        )
    }
}

/// Whether a track stays within the correctness radius of the annotated eye on every frame where
/// the annotation defines one.
pub fn localization_ok(stream: &TrackedStream, truth: &[AnnotationRecord]) -> bool {
    if stream.is_lost() {
        return false;
    }
    stream.boxes.iter().zip(truth).all(|(b, a)| {
        let gt = a.eye(stream.eye);
        if !gt.visible || !a.left_eye.visible || !a.right_eye.visible {
            return true;
        }
        let p = |x: i32, y: i32| (x as f64, y as f64);
        match me(
            p(b.center.x, b.center.y),
            p(gt.x, gt.y),
            p(a.left_eye.x, a.left_eye.y),
            p(a.right_eye.x, a.right_eye.y),
        ) {
            Ok(v) => me_correct(v),
            Err(_) => true,
        }
    })
}

/// Verifies every clip of a split with the annotation-backed locator.
pub fn verify_split(
    manifest: &Manifest,
    split: Split,
    model: &MsLstmModel,
    params: &TrackParams,
) -> Result<Vec<PredictionRow>> {
    let entries: Vec<_> = manifest.split(split).collect();
    let per_clip: Vec<Result<Vec<PredictionRow>>> = entries
        .par_iter()
        .map(|e| {
            let clip = manifest.load_clip(e)?;
            let (verdicts, streams) = verify_clip_tracked(&clip, &annotation_locator(&clip), model, params)?;
            Ok(verdicts
                .iter()
                .zip(&streams)
                .map(|(v, s)| PredictionRow {
                    clip: e.clip_dir.display().to_string(),
                    source_id: e.source_id.clone(),
                    truth: e.label,
                    eye: v.eye,
                    predicted: v.label,
                    confidence: v.confidence,
                    lost: v.lost,
                    localized: localization_ok(s, clip.annotations()),
                })
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for r in per_clip {
        out.extend(r?);
    }
    Ok(out)
}

/// Confusion counts over blink-vs-non-blink predictions.
pub fn confusion(rows: &[&PredictionRow]) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for r in rows {
        match (r.truth, r.predicted) {
            (Label::Blink, Label::Blink) => c.tp += 1,
            (Label::NonBlink, Label::Blink) => c.fp += 1,
            (Label::Blink, Label::NonBlink) => c.fn_ += 1,
            (Label::NonBlink, Label::NonBlink) => {}
        }
    }
    c
}

/// Localization failures over the blink samples among `rows`.
pub fn localization_tally(rows: &[&PredictionRow]) -> LocalizationTally {
    let blinks: Vec<_> = rows.iter().filter(|r| r.truth == Label::Blink).collect();
    LocalizationTally {
        n_miss: blinks.iter().filter(|r| r.lost).count() as u64,
        n_err: blinks.iter().filter(|r| !r.lost && !r.localized).count() as u64,
        n_all: blinks.len() as u64,
    }
}

/// Per-eye metrics followed by both eyes pooled.
pub fn metrics_by_eye(rows: &[PredictionRow]) -> Result<Vec<EyeMetrics>> {
    let mut out = Vec::new();
    for (name, filter) in [("left", Some(Eye::Left)), ("right", Some(Eye::Right)), ("all", None)] {
        let sel: Vec<&PredictionRow> = rows.iter().filter(|r| filter.is_none_or(|e| r.eye == e)).collect();
        let tally = localization_tally(&sel);
        let tally = (tally.n_all > 0).then_some(tally);
        out.push(EyeMetrics::new(name, confusion(&sel), tally)?);
    }
    Ok(out)
}
