//! Kernelized correlation filter over raw grayscale eye patches.
//!
//! The filter is a kernel ridge regression over all cyclic shifts of a
//! padded, Hann-windowed patch, solved element-wise in the DFT domain. The
//! region size is fixed for the life of a track.

mod fft;
mod kernel;

pub use kernel::gaussian_correlation;

use rustfft::num_complex::Complex64;

use crate::dataset::crop_at;
use crate::dataset::GrayFrame;
use crate::error::{Error, Result};
use fft::Fft2;
use kernel::{gaussian_kernel, Spectrum};

/// Row-major real 2-D signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height || width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "plane {width}x{height} cannot hold {} values",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KcfParams {
    /// Ridge regularizer.
    pub lambda: f64,
    /// Gaussian kernel bandwidth.
    pub sigma_k: f64,
    /// Search window side as a multiple of the target side.
    pub padding: f64,
    /// Template learning rate.
    pub interp: f64,
    /// Target response bandwidth relative to `sqrt(h * w)` of the target.
    pub output_sigma_factor: f64,
}

impl Default for KcfParams {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            sigma_k: 0.2,
            padding: 2.5,
            interp: 0.02,
            output_sigma_factor: 0.125,
        }
    }
}

/// Tracked box: integer center plus fixed height and width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackRegion {
    pub cx: i32,
    pub cy: i32,
    pub h: usize,
    pub w: usize,
}

impl TrackRegion {
    fn overlaps(&self, frame: &GrayFrame) -> bool {
        let x0 = self.cx as i64 - (self.w / 2) as i64;
        let y0 = self.cy as i64 - (self.h / 2) as i64;
        x0 < frame.width() as i64
            && y0 < frame.height() as i64
            && x0 + self.w as i64 > 0
            && y0 + self.h as i64 > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackResult {
    pub region: TrackRegion,
    /// Peak of the real response map.
    pub score: f64,
}

/// Real response map over cyclic displacements, origin at index 0.
#[derive(Debug, Clone)]
pub struct ResponseMap {
    pub map: Plane,
    /// Largest imaginary magnitude dropped when taking the real part.
    pub max_imag: f64,
}

impl ResponseMap {
    /// Peak location as a displacement in `[-N/2, N/2)` per axis, and the
    /// peak value. Ties with the origin resolve to zero motion.
    pub fn peak(&self) -> ((i32, i32), f64) {
        let m = &self.map;
        let (mut best, mut best_i) = (f64::NEG_INFINITY, 0usize);
        for (i, &v) in m.data.iter().enumerate() {
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let tol = 1e-9 * best.abs().max(1.0);
        if m.data[0] >= best - tol {
            return ((0, 0), best);
        }
        let wrap = |i: usize, n: usize| -> i32 {
            if i >= n.div_ceil(2) {
                i as i32 - n as i32
            } else {
                i as i32
            }
        };
        let (px, py) = (best_i % m.width, best_i / m.width);
        ((wrap(px, m.width), wrap(py, m.height)), best)
    }
}

/// Learned filter state. Updating returns a new state.
#[derive(Debug, Clone)]
pub struct KcfState {
    template: Vec<f64>,
    template_f: Spectrum,
    alpha_f: Vec<Complex64>,
    target_f: Vec<Complex64>,
    window: Vec<f64>,
    fft: Fft2,
    region: TrackRegion,
    params: KcfParams,
}

fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos()))
        .collect()
}

/// Gaussian-shaped regression target with its peak at the origin and
/// circular wrap-around.
fn target_response(width: usize, height: usize, sigma: f64) -> Vec<f64> {
    let wrapped = |i: usize, n: usize| -> f64 {
        if i >= n.div_ceil(2) {
            i as f64 - n as f64
        } else {
            i as f64
        }
    };
    let mut y = Vec::with_capacity(width * height);
    for r in 0..height {
        let dy = wrapped(r, height);
        for c in 0..width {
            let dx = wrapped(c, width);
            y.push((-0.5 * (dx * dx + dy * dy) / (sigma * sigma)).exp());
        }
    }
    y
}

impl KcfState {
    pub fn region(&self) -> TrackRegion {
        self.region
    }

    pub fn params(&self) -> KcfParams {
        self.params
    }

    /// Windowed, zero-mean template (search-window sized).
    pub fn template(&self) -> Plane {
        Plane {
            width: self.fft.width,
            height: self.fft.height,
            data: self.template.clone(),
        }
    }

    pub fn window_size(&self) -> (usize, usize) {
        (self.fft.width, self.fft.height)
    }

    fn features(&self, frame: &GrayFrame, cx: i32, cy: i32) -> Result<Vec<f64>> {
        extract(frame, cx, cy, &self.fft, &self.window)
    }

    fn train(&self, x: &[f64]) -> (Spectrum, Vec<Complex64>) {
        let xf = Spectrum::of(x, &self.fft);
        let k = gaussian_kernel(&xf, &xf, self.params.sigma_k, &self.fft);
        let kf = self.fft.forward_real(&k);
        let lambda = self.params.lambda;
        let alpha_f = self
            .target_f
            .iter()
            .zip(&kf)
            .map(|(y, k)| y / (k + lambda))
            .collect();
        (xf, alpha_f)
    }

    /// Response of the current filter to the search window at the current
    /// region in `frame`.
    pub fn response(&self, frame: &GrayFrame) -> Result<ResponseMap> {
        if !self.region.overlaps(frame) {
            return Err(Error::TrackLost(format!(
                "region {:?} lies outside the {}x{} frame",
                self.region,
                frame.width(),
                frame.height()
            )));
        }
        let z = self.features(frame, self.region.cx, self.region.cy)?;
        let zf = Spectrum::of(&z, &self.fft);
        let k = gaussian_kernel(&self.template_f, &zf, self.params.sigma_k, &self.fft);
        let mut r: Vec<Complex64> = self
            .fft
            .forward_real(&k)
            .iter()
            .zip(&self.alpha_f)
            .map(|(k, a)| k * a)
            .collect();
        self.fft.inverse(&mut r);
        let max_imag = r.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        Ok(ResponseMap {
            map: Plane {
                width: self.fft.width,
                height: self.fft.height,
                data: r.iter().map(|c| c.re).collect(),
            },
            max_imag,
        })
    }

    pub fn update(&self, frame: &GrayFrame) -> Result<(KcfState, TrackResult)> {
        let resp = self.response(frame)?;
        let ((dx, dy), score) = resp.peak();
        let region = TrackRegion {
            cx: self.region.cx + dx,
            cy: self.region.cy + dy,
            ..self.region
        };
        let x = self.features(frame, region.cx, region.cy)?;
        let (xf_new, alpha_new) = self.train(&x);
        let rate = self.params.interp;
        let template: Vec<f64> = self
            .template
            .iter()
            .zip(&x)
            .map(|(a, b)| (1.0 - rate) * a + rate * b)
            .collect();
        let template_f = if rate == 0.0 {
            self.template_f.clone()
        } else if rate == 1.0 {
            xf_new
        } else {
            Spectrum::of(&template, &self.fft)
        };
        let alpha_f = self
            .alpha_f
            .iter()
            .zip(&alpha_new)
            .map(|(a, b)| a * (1.0 - rate) + b * rate)
            .collect();
        let next = KcfState {
            template,
            template_f,
            alpha_f,
            region,
            ..self.clone()
        };
        Ok((next, TrackResult { region, score }))
    }
}

fn extract(
    frame: &GrayFrame,
    cx: i32,
    cy: i32,
    fft: &Fft2,
    window: &[f64],
) -> Result<Vec<f64>> {
    let patch = crop_at(frame, cx as i64, cy as i64, fft.height, fft.width)?;
    let mean = patch.mean();
    Ok(patch
        .data()
        .iter()
        .zip(window)
        .map(|(&v, &w)| (v as f64 - mean) / 255.0 * w)
        .collect())
}

pub fn kcf_init(frame: &GrayFrame, region: TrackRegion, params: KcfParams) -> Result<KcfState> {
    if region.h * region.w < 16 {
        return Err(Error::invalid(format!(
            "track region {}x{} is smaller than 16 px",
            region.h, region.w
        )));
    }
    if !(params.lambda > 0.0 && params.sigma_k > 0.0 && params.padding >= 1.0)
        || !(0.0..=1.0).contains(&params.interp)
        || !(params.output_sigma_factor > 0.0)
    {
        return Err(Error::invalid(format!("invalid tracker parameters {params:?}")));
    }
    if !region.overlaps(frame) {
        return Err(Error::invalid(format!(
            "region {region:?} lies outside the frame"
        )));
    }
    let ww = ((region.w as f64 * params.padding).round() as usize).max(1);
    let wh = ((region.h as f64 * params.padding).round() as usize).max(1);
    let fft = Fft2::new(ww, wh);
    let (hx, hy) = (hann(ww), hann(wh));
    let window: Vec<f64> = (0..wh)
        .flat_map(|r| {
            let row = hy[r];
            hx.iter().map(move |&c| c * row)
        })
        .collect();
    let sigma = params.output_sigma_factor * ((region.h * region.w) as f64).sqrt();
    let target_f = fft.forward_real(&target_response(ww, wh, sigma));
    let x = extract(frame, region.cx, region.cy, &fft, &window)?;

    let mut state = KcfState {
        template: x,
        template_f: Spectrum {
            freq: Vec::new(),
            sq_norm: 0.0,
        },
        alpha_f: Vec::new(),
        target_f,
        window,
        fft,
        region,
        params,
    };
    let (xf, alpha_f) = state.train(&state.template);
    state.template_f = xf;
    state.alpha_f = alpha_f;
    Ok(state)
}

pub fn kcf_update(state: &KcfState, frame: &GrayFrame) -> Result<(KcfState, TrackResult)> {
    state.update(frame)
}

#[cfg(test)]
mod tests;
