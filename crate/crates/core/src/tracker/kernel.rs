use rustfft::num_complex::Complex64;

use super::fft::Fft2;
use super::Plane;
use crate::error::{Error, Result};

/// Spectrum of a real plane together with its squared norm.
#[derive(Debug, Clone)]
pub(crate) struct Spectrum {
    pub freq: Vec<Complex64>,
    pub sq_norm: f64,
}

impl Spectrum {
    pub fn of(plane: &[f64], fft: &Fft2) -> Self {
        Self {
            freq: fft.forward_real(plane),
            sq_norm: plane.iter().map(|v| v * v).sum(),
        }
    }
}

/// Gaussian kernel between `x` and every cyclic shift of `z` (spatial domain).
pub(crate) fn gaussian_kernel(
    x: &Spectrum,
    z: &Spectrum,
    sigma: f64,
    fft: &Fft2,
) -> Vec<f64> {
    let n = fft.len() as f64;
    let mut prod: Vec<Complex64> = x
        .freq
        .iter()
        .zip(&z.freq)
        .map(|(a, b)| a.conj() * b)
        .collect();
    fft.inverse(&mut prod);
    prod.iter()
        .map(|c| {
            let d = ((x.sq_norm + z.sq_norm - 2.0 * c.re) / n).max(0.0);
            (-d / (sigma * sigma)).exp()
        })
        .collect()
}

/// `k(t) = exp(-max(0, |x|^2 + |z|^2 - 2 sum_p x(p) z(p + t)) / (sigma^2 N))`
/// with circular indexing, evaluated through one forward/inverse DFT pair.
pub fn gaussian_correlation(x: &Plane, z: &Plane, sigma: f64) -> Result<Plane> {
    if x.width != z.width || x.height != z.height {
        return Err(Error::invalid(format!(
            "kernel inputs differ in size: {}x{} vs {}x{}",
            x.width, x.height, z.width, z.height
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::invalid("kernel bandwidth must be positive"));
    }
    let fft = Fft2::new(x.width, x.height);
    let data = gaussian_kernel(
        &Spectrum::of(&x.data, &fft),
        &Spectrum::of(&z.data, &fft),
        sigma,
        &fft,
    );
    Ok(Plane {
        width: x.width,
        height: x.height,
        data,
    })
}
