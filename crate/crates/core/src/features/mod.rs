//! Per-frame appearance (uniform LBP histogram) and motion (difference of
//! consecutive histograms) features, concatenated into one vector per step.

mod dump;
mod lbp;
mod resize;

pub use dump::{read_feature_dump, write_feature_csv, write_feature_dump};
pub use lbp::{is_uniform, lbp_code, uniform_bin, uniform_lbp, LbpHistogram, LBP_BINS};
pub use resize::resize_patch;

use crate::dataset::{crop_eye, Clip, EyeCenter, EyeRegion, GrayFrame};
use crate::error::{Error, Result};

/// Length of the concatenated appearance + motion vector.
pub const STEP_DIM: usize = 2 * LBP_BINS;

pub const DEFAULT_PATCH: EyeRegion = EyeRegion {
    height: 24,
    width: 24,
};

/// Square eye box centered on `center`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EyeBox {
    pub center: EyeCenter,
    pub size: EyeRegion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepFeature {
    pub appearance: [f64; LBP_BINS],
    pub motion: [f64; LBP_BINS],
}

impl StepFeature {
    pub fn new(curr: &LbpHistogram, prev: &LbpHistogram) -> Self {
        Self {
            appearance: *curr.bins(),
            motion: motion_feature(curr, prev),
        }
    }

    /// Appearance in indices 0..59, motion in 59..118.
    pub fn concat(&self) -> [f64; STEP_DIM] {
        let mut out = [0.0; STEP_DIM];
        out[..LBP_BINS].copy_from_slice(&self.appearance);
        out[LBP_BINS..].copy_from_slice(&self.motion);
        out
    }

    pub fn from_concat(v: &[f64]) -> Result<Self> {
        if v.len() != STEP_DIM {
            return Err(Error::invalid(format!(
                "step vector has {} components, expected {STEP_DIM}",
                v.len()
            )));
        }
        let mut appearance = [0.0; LBP_BINS];
        let mut motion = [0.0; LBP_BINS];
        appearance.copy_from_slice(&v[..LBP_BINS]);
        motion.copy_from_slice(&v[LBP_BINS..]);
        Ok(Self { appearance, motion })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureSequence {
    pub steps: Vec<StepFeature>,
}

impl FeatureSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One step per histogram except the first.
    pub fn from_histograms(hists: &[LbpHistogram]) -> Self {
        Self {
            steps: hists
                .windows(2)
                .map(|w| StepFeature::new(&w[1], &w[0]))
                .collect(),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = [f64; STEP_DIM]> + '_ {
        self.steps.iter().map(StepFeature::concat)
    }
}

pub fn motion_feature(curr: &LbpHistogram, prev: &LbpHistogram) -> [f64; LBP_BINS] {
    let mut out = [0.0; LBP_BINS];
    for (o, (c, p)) in out.iter_mut().zip(curr.bins().iter().zip(prev.bins())) {
        *o = c - p;
    }
    out
}

/// Appearance descriptor of one eye box: crop, resize to `patch`, LBP.
pub fn eye_histogram(frame: &GrayFrame, eye: EyeBox, patch: EyeRegion) -> Result<LbpHistogram> {
    let crop = crop_eye(frame, eye.center, eye.size)?;
    let resized = resize_patch(&crop, patch)?;
    uniform_lbp(&resized)
}

pub fn featurize_clip(clip: &Clip, regions: &[EyeBox], patch: EyeRegion) -> Result<FeatureSequence> {
    featurize_frames(clip.frames(), regions, patch)
}

pub fn featurize_frames(
    frames: &[GrayFrame],
    regions: &[EyeBox],
    patch: EyeRegion,
) -> Result<FeatureSequence> {
    if frames.len() < 2 {
        return Err(Error::invalid("featurization needs at least 2 frames"));
    }
    if regions.len() != frames.len() {
        return Err(Error::invalid(format!(
            "{} regions for {} frames",
            regions.len(),
            frames.len()
        )));
    }
    let hists = frames
        .iter()
        .zip(regions)
        .map(|(f, &r)| eye_histogram(f, r, patch))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureSequence::from_histograms(&hists))
}

/// Uncentered correlation coefficient `fc . fn / (|fc| |fn|)`.
pub fn feature_correlation(fc: &[f64], fnext: &[f64]) -> Result<f64> {
    if fc.len() != fnext.len() {
        return Err(Error::invalid(format!(
            "vector lengths differ: {} vs {}",
            fc.len(),
            fnext.len()
        )));
    }
    let dot: f64 = fc.iter().zip(fnext).map(|(a, b)| a * b).sum();
    let na = fc.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nb = fnext.iter().map(|b| b * b).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}
