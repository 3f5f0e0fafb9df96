//! Synthetic eyeblink clips. A stylized face with two eyes (bright sclera
//! ellipse, dark pupil, eyelids controlled by an aperture in `[0, 1]`) is
//! rendered under seeded noise, brightness shifts and slow sub-pixel drift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{AnnotationRecord, Clip, EyeCenter, FaceBox, GrayFrame, Label};
use crate::error::{Error, Result};

pub const SYNTH_FRAME_WIDTH: usize = 128;
pub const SYNTH_FRAME_HEIGHT: usize = 96;

const EYE_HALF_SPACING: f64 = 30.0;
const EYE_RAISE: f64 = 8.0;
const SCLERA_AX: f64 = 10.0;
const SCLERA_AY: f64 = 7.0;
const PUPIL_R: f64 = 3.5;
const NOISE_SIGMA: f64 = 4.0;
const MAX_DRIFT: f64 = 0.5;

#[derive(Debug, Clone)]
struct Scene {
    background: f64,
    skin: f64,
    sclera: f64,
    pupil: f64,
    brow: f64,
    origin: (f64, f64),
    amp: (f64, f64),
    omega: f64,
    phase: (f64, f64),
}

impl Scene {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        let shift = rng.random_range(-15.0..15.0);
        let amp: (f64, f64) = (rng.random_range(1.0..5.0), rng.random_range(1.0..3.0));
        // per-axis speed bounded so the combined drift stays below MAX_DRIFT
        let omega = 0.9 * MAX_DRIFT / (amp.0 * amp.0 + amp.1 * amp.1).sqrt();
        Self {
            background: 70.0 + shift,
            skin: rng.random_range(125.0..150.0) + shift,
            sclera: rng.random_range(200.0..225.0) + shift,
            pupil: rng.random_range(25.0..45.0) + shift,
            brow: rng.random_range(50.0..70.0) + shift,
            origin: (
                SYNTH_FRAME_WIDTH as f64 / 2.0 + rng.random_range(-4.0..4.0),
                SYNTH_FRAME_HEIGHT as f64 / 2.0 + rng.random_range(-2.5..2.5),
            ),
            amp,
            omega,
            phase: (
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.0..std::f64::consts::TAU),
            ),
        }
    }

    fn face_center(&self, t: usize) -> (f64, f64) {
        let t = t as f64;
        (
            self.origin.0 + self.amp.0 * (self.omega * t + self.phase.0).sin(),
            self.origin.1 + self.amp.1 * (self.omega * t + self.phase.1).sin(),
        )
    }

    fn eye_centers(&self, t: usize) -> [(f64, f64); 2] {
        let (cx, cy) = self.face_center(t);
        [
            (cx - EYE_HALF_SPACING, cy - EYE_RAISE),
            (cx + EYE_HALF_SPACING, cy - EYE_RAISE),
        ]
    }
}

#[derive(Debug, Clone, Copy)]
struct EyeState {
    aperture: f64,
    gaze: f64,
}

fn eye_intensity(scene: &Scene, st: EyeState, dx: f64, dy: f64) -> Option<f64> {
    // eyebrow bar above the eye
    if (dy + 9.5).abs() < 1.2 && dx.abs() < 11.0 {
        return Some(scene.brow);
    }
    let e = (dx / SCLERA_AX).powi(2) + (dy / SCLERA_AY).powi(2);
    if e > 1.0 {
        return None;
    }
    let lid = st.aperture * SCLERA_AY * (1.0 - (dx / SCLERA_AX).powi(2)).max(0.0).sqrt();
    if (dy.abs() - lid).abs() < 0.8 {
        return Some(scene.brow - 10.0);
    }
    if dy.abs() > lid {
        return Some(scene.skin - 40.0);
    }
    if (dx - st.gaze).powi(2) + dy * dy < PUPIL_R * PUPIL_R {
        Some(scene.pupil)
    } else {
        Some(scene.sclera)
    }
}

fn render(scene: &Scene, t: usize, st: EyeState, rng: &mut ChaCha8Rng) -> GrayFrame {
    let noise = Normal::new(0.0, NOISE_SIGMA).expect("valid sigma");
    let flicker = rng.random_range(-0.75..0.75);
    let (fx, fy) = scene.face_center(t);
    let eyes = scene.eye_centers(t);
    let (w, h) = (SYNTH_FRAME_WIDTH, SYNTH_FRAME_HEIGHT);
    let mut data = Vec::with_capacity(w * h);
    const SS: [f64; 3] = [-1.0 / 3.0, 0.0, 1.0 / 3.0];
    for y in 0..h {
        for x in 0..w {
            let (px, py) = (x as f64, y as f64);
            let fe = ((px - fx) / 44.0).powi(2) + ((py - fy) / 42.0).powi(2);
            let mut v = if fe <= 1.0 { scene.skin } else { scene.background };
            for &(ex, ey) in &eyes {
                if (px - ex).abs() > 13.0 || (py - ey).abs() > 14.0 {
                    continue;
                }
                let mut acc = 0.0;
                for sy in SS {
                    for sx in SS {
                        acc += eye_intensity(scene, st, px + sx - ex, py + sy - ey).unwrap_or(v);
                    }
                }
                v = acc / 9.0;
            }
            v += flicker + noise.sample(rng);
            data.push(v.round().clamp(0.0, 255.0) as f32);
        }
    }
    GrayFrame::new(w, h, data).expect("rendered frame is valid")
}

fn annotate(scene: &Scene, t: usize, index: usize) -> AnnotationRecord {
    let (fx, fy) = scene.face_center(t);
    let [l, r] = scene.eye_centers(t);
    AnnotationRecord {
        frame_index: index,
        face_box: FaceBox {
            x: (fx - 44.0).round() as i32,
            y: (fy - 40.0).round() as i32,
            w: 88,
            h: 80,
        },
        left_eye: EyeCenter::visible(l.0.round() as i32, l.1.round() as i32),
        right_eye: EyeCenter::visible(r.0.round() as i32, r.1.round() as i32),
    }
}

#[derive(Debug, Clone, Copy)]
struct BlinkShape {
    center: f64,
    half_width: f64,
    depth: f64,
}

impl BlinkShape {
    fn sample(rng: &mut ChaCha8Rng, center: f64) -> Self {
        Self {
            center,
            half_width: rng.random_range(2.0..3.5),
            depth: rng.random_range(0.85..1.0),
        }
    }

    fn closure(&self, t: f64) -> f64 {
        let u = 1.0 - (t - self.center).abs() / self.half_width;
        self.depth * u.max(0.0).powf(1.2)
    }
}

fn open_jitter(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-0.03..0.03)
}

/// Renders a deterministic synthetic clip. Blink clips close fully near the
/// middle frame; non-blink clips stay open with small aperture jitter and
/// may shift gaze.
pub fn synth_clip(seed: u64, label: Label, length: usize) -> Result<Clip> {
    if length == 0 {
        return Err(Error::invalid("clip length must be at least 1"));
    }
    if label == Label::Blink && length < 3 {
        return Err(Error::invalid("blink clips need at least 3 frames"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scene = Scene::sample(&mut rng);
    let t0 = rng.random_range(0..200usize);
    let gaze0 = rng.random_range(-1.5..1.5);
    let base_open = rng.random_range(0.92..1.0);

    let mut blink = None;
    let mut saccade = None;
    match label {
        Label::Blink => {
            let center = (length / 2) as f64 - 0.5 + rng.random_range(-0.4..0.4);
            blink = Some(BlinkShape::sample(&mut rng, center));
        }
        Label::NonBlink => {
            if rng.random_bool(0.5) {
                saccade = Some((
                    rng.random_range(1..length.max(2)) as f64,
                    rng.random_range(-2.5..2.5),
                ));
            }
        }
    }

    let mut frames = Vec::with_capacity(length);
    let mut annotations = Vec::with_capacity(length);
    for i in 0..length {
        let t = i as f64;
        let closure = blink.map_or(0.0, |b| b.closure(t));
        let aperture = ((base_open + open_jitter(&mut rng)) * (1.0 - closure)).clamp(0.0, 1.0);
        let gaze = match saccade {
            Some((at, delta)) if t >= at => gaze0 + delta,
            _ => gaze0,
        };
        let st = EyeState { aperture, gaze };
        frames.push(render(&scene, t0 + i, st, &mut rng));
        annotations.push(annotate(&scene, t0 + i, i));
    }
    Clip::new(frames, annotations, label, format!("synth-{seed}"))
}

/// An untrimmed synthetic stream with known blink centers.
#[derive(Debug, Clone)]
pub struct SynthStream {
    pub clip: Clip,
    pub blink_centers: Vec<usize>,
}

impl SynthStream {
    /// Ground-truth interval of each blink for a detection window of
    /// `window` frames: the window that places the closed frame at
    /// `window / 2`, clamped to the stream.
    pub fn gt_intervals(&self, window: usize) -> Vec<(usize, usize)> {
        let n = self.clip.len();
        self.blink_centers
            .iter()
            .map(|&c| {
                let start = c.saturating_sub(window / 2).min(n.saturating_sub(window));
                (start, start + window - 1)
            })
            .collect()
    }
}

pub fn synth_stream(seed: u64, length: usize, blink_centers: &[usize]) -> Result<SynthStream> {
    if length == 0 {
        return Err(Error::invalid("stream length must be at least 1"));
    }
    if let Some(&c) = blink_centers.iter().find(|&&c| c >= length) {
        return Err(Error::invalid(format!("blink center {c} outside stream")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_57ea);
    let scene = Scene::sample(&mut rng);
    let gaze = rng.random_range(-1.5..1.5);
    let base_open = rng.random_range(0.92..1.0);
    let blinks: Vec<BlinkShape> = blink_centers
        .iter()
        .map(|&c| BlinkShape::sample(&mut rng, c as f64))
        .collect();

    let mut frames = Vec::with_capacity(length);
    let mut annotations = Vec::with_capacity(length);
    for i in 0..length {
        let closure = blinks
            .iter()
            .map(|b| b.closure(i as f64))
            .fold(0.0, f64::max);
        let aperture = ((base_open + open_jitter(&mut rng)) * (1.0 - closure)).clamp(0.0, 1.0);
        frames.push(render(&scene, i, EyeState { aperture, gaze }, &mut rng));
        annotations.push(annotate(&scene, i, i));
    }
    let label = if blink_centers.is_empty() {
        Label::NonBlink
    } else {
        Label::Blink
    };
    Ok(SynthStream {
        clip: Clip::new(frames, annotations, label, format!("stream-{seed}"))?,
        blink_centers: blink_centers.to_vec(),
    })
}
