//! Annotated eyeblink clips: frames, per-frame eye annotations, manifests,
//! fixed-length polishing and a synthetic clip generator.

mod geometry;
mod io;
mod manifest;
mod polish;
mod synth;

pub use geometry::{crop_eye, eye_region, manhattan, EyeRegion};
pub(crate) use io::write_atomic;
pub(crate) use geometry::crop_at;
pub use io::{
    read_annotations, read_clip_dir, read_pgm, write_annotations, write_clip_dir, write_pgm,
    ANNOTATION_HEADER,
};
pub use manifest::{load_manifest, write_manifest, Manifest, ManifestEntry, Split};
pub use polish::{estimate_closed_index, polish_clip, DEFAULT_POLISH_LEN};
pub use synth::{synth_clip, synth_stream, SynthStream, SYNTH_FRAME_HEIGHT, SYNTH_FRAME_WIDTH};

use crate::error::{Error, Result};

/// Single-channel image with row-major intensities in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "frame data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=255.0).contains(*v)) {
            return Err(Error::invalid(format!("intensity {v} outside [0, 255]")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> f32 {
        let cx = x.clamp(0, self.width as i64 - 1) as usize;
        let cy = y.clamp(0, self.height as i64 - 1) as usize;
        self.data[cy * self.width + cx]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }
}

/// Eye center in pixel coordinates. Invisible eyes are stored as `(-1, -1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EyeCenter {
    pub x: i32,
    pub y: i32,
    pub visible: bool,
}

impl EyeCenter {
    pub const fn visible(x: i32, y: i32) -> Self {
        Self {
            x,
            y,
            visible: true,
        }
    }

    pub const fn invisible() -> Self {
        Self {
            x: -1,
            y: -1,
            visible: false,
        }
    }

    /// Interprets the on-disk convention: `(-1, -1)` marks an invisible eye.
    pub fn from_coords(x: i32, y: i32) -> Self {
        if x == -1 && y == -1 {
            Self::invisible()
        } else {
            Self::visible(x, y)
        }
    }
}

/// Axis-aligned box `(x, y, w, h)` with `(x, y)` the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaceBox {
    pub x: i32,
    pub y: i32,
    pub w: i32,
    pub h: i32,
}

impl FaceBox {
    pub fn contains(&self, x: i32, y: i32) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub frame_index: usize,
    pub face_box: FaceBox,
    pub left_eye: EyeCenter,
    pub right_eye: EyeCenter,
}

impl AnnotationRecord {
    /// Checks the record against the frame it annotates.
    pub fn validate(&self, frame_width: usize, frame_height: usize) -> Result<()> {
        let b = self.face_box;
        if b.w <= 0 || b.h <= 0 {
            return Err(Error::invalid(format!(
                "frame {}: face box must have positive size",
                self.frame_index
            )));
        }
        if b.x < 0
            || b.y < 0
            || (b.x + b.w) as usize > frame_width
            || (b.y + b.h) as usize > frame_height
        {
            return Err(Error::invalid(format!(
                "frame {}: face box {:?} exceeds {}x{} frame",
                self.frame_index, b, frame_width, frame_height
            )));
        }
        for (name, eye) in [("left", self.left_eye), ("right", self.right_eye)] {
            if eye.visible && !b.contains(eye.x, eye.y) {
                return Err(Error::invalid(format!(
                    "frame {}: {name} eye ({}, {}) outside face box",
                    self.frame_index, eye.x, eye.y
                )));
            }
        }
        Ok(())
    }

    pub fn eye(&self, side: Eye) -> EyeCenter {
        match side {
            Eye::Left => self.left_eye,
            Eye::Right => self.right_eye,
        }
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Eye {
    Left,
    Right,
}

impl Eye {
    pub const BOTH: [Eye; 2] = [Eye::Left, Eye::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Eye::Left => "left",
            Eye::Right => "right",
        }
    }
}

impl std::str::FromStr for Eye {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Eye::Left),
            "right" => Ok(Eye::Right),
            other => Err(Error::invalid(format!("unknown eye `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Blink,
    NonBlink,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Blink => "blink",
            Label::NonBlink => "nonblink",
        }
    }

    /// Class index used by the classifier head: blink = 0, non-blink = 1.
    pub fn class_index(self) -> usize {
        match self {
            Label::Blink => 0,
            Label::NonBlink => 1,
        }
    }

    pub fn from_class_index(idx: usize) -> Self {
        if idx == 0 {
            Label::Blink
        } else {
            Label::NonBlink
        }
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blink" => Ok(Label::Blink),
            "nonblink" | "non-blink" => Ok(Label::NonBlink),
            other => Err(Error::invalid(format!("unknown label `{other}`"))),
        }
    }
}

/// A sequence of frames with one annotation per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    frames: Vec<GrayFrame>,
    annotations: Vec<AnnotationRecord>,
    pub label: Label,
    pub source_id: String,
}

impl Clip {
    pub fn new(
        frames: Vec<GrayFrame>,
        annotations: Vec<AnnotationRecord>,
        label: Label,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::invalid("clip must contain at least one frame"));
        }
        if frames.len() != annotations.len() {
            return Err(Error::invalid(format!(
                "clip has {} frames but {} annotations",
                frames.len(),
                annotations.len()
            )));
        }
        for (frame, ann) in frames.iter().zip(&annotations) {
            ann.validate(frame.width(), frame.height())?;
        }
        Ok(Self {
            frames,
            annotations,
            label,
            source_id: source_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[GrayFrame] {
        &self.frames
    }

    pub fn annotations(&self) -> &[AnnotationRecord] {
        &self.annotations
    }
}
