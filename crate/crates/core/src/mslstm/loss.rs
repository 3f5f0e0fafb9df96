//! Angular-margin and plain two-class softmax losses with analytic gradients.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Partial derivatives of the angular loss with respect to its inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularGrad {
    pub d_norm: f64,
    pub d_cos_y: f64,
    pub d_cos_other: f64,
}

/// Monotone margin function `ψ(θ) = (-1)^k cos(mθ) - 2k` on `[kπ/m, (k+1)π/m]`, evaluated from
/// `cos θ`, together with `dψ/d(cos θ)`.
pub fn psi(cos_theta: f64, m: u32) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::invalid("angular margin must be at least 1"));
    }
    if !cos_theta.is_finite() {
        return Err(Error::Numeric("non-finite cosine".into()));
    }
    let c = cos_theta.clamp(-1.0, 1.0);
    let theta = c.acos();
    let k = ((theta * m as f64 / PI).floor() as u32).min(m - 1);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let (t_m, u_m1) = chebyshev(c, m);
    Ok((sign * t_m - 2.0 * k as f64, sign * m as f64 * u_m1))
}

/// `(T_m(c), U_{m-1}(c))` by the three-term recurrences.
fn chebyshev(c: f64, m: u32) -> (f64, f64) {
    let (mut t0, mut t1) = (1.0, c);
    let (mut u0, mut u1) = (1.0, 2.0 * c);
    for _ in 1..m {
        (t0, t1) = (t1, 2.0 * c * t1 - t0);
        (u0, u1) = (u1, 2.0 * c * u1 - u0);
    }
    (t1, u0)
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn logistic(z: f64) -> f64 {
    super::sigmoid(z)
}

/// `-log(e^{‖x‖ψ(θ_y)} / (e^{‖x‖ψ(θ_y)} + e^{‖x‖ cos θ_other}))`.
pub fn asoftmax_loss(
    norm: f64,
    cos_y: f64,
    cos_other: f64,
    m: u32,
) -> Result<(f64, AngularGrad)> {
    let (psi_y, dpsi) = psi(cos_y, m)?;
    if !norm.is_finite() || !cos_other.is_finite() {
        return Err(Error::Numeric("non-finite loss input".into()));
    }
    let f_y = norm * psi_y;
    let f_o = norm * cos_other;
    let z = f_o - f_y;
    let p_o = logistic(z);
    Ok((
        softplus(z),
        AngularGrad {
            d_norm: p_o * (cos_other - psi_y),
            d_cos_y: -p_o * norm * dpsi,
            d_cos_other: p_o * norm,
        },
    ))
}

/// Two-class cross-entropy on raw logits; returns the loss and `dL/dlogits`.
pub fn softmax_loss(logits: [f64; 2], label: usize) -> (f64, [f64; 2]) {
    let y = label.min(1);
    let o = 1 - y;
    let z = logits[o] - logits[y];
    let p_o = logistic(z);
    let mut grad = [0.0; 2];
    grad[y] = -p_o;
    grad[o] = p_o;
    (softplus(z), grad)
}
