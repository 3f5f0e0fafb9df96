//! Backpropagation through time for the stacked LSTM and its angular head.

use super::loss::{asoftmax_loss, softmax_loss};
use super::{axpy, dot, CellStep, HeadOutput, LossKind, LstmLayerParams, MsLstmModel, GATES};
use crate::dataset::Label;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleLoss {
    pub loss: f64,
    pub head: HeadOutput,
}

/// Loss of one labelled sequence under `kind` together with the gradient for every parameter,
/// returned in a model-shaped container.
pub fn loss_and_gradient(
    model: &MsLstmModel,
    rows: &[Vec<f64>],
    label: Label,
    kind: LossKind,
) -> Result<(SampleLoss, MsLstmModel)> {
    let mut grad = model.zeros_like();
    let loss = accumulate_gradient(model, rows, label, kind, &mut grad)?;
    Ok((loss, grad))
}

/// Loss of a sample under `kind` without gradients.
pub(crate) fn sample_loss(
    model: &MsLstmModel,
    head: HeadOutput,
    label: Label,
    kind: LossKind,
) -> Result<(f64, f64, [f64; 2])> {
    let y = label.class_index();
    let o = 1 - y;
    match kind {
        LossKind::ASoftmax => {
            let (loss, g) = asoftmax_loss(head.norm, head.cos[y], head.cos[o], model.hyper.margin)?;
            let mut d_cos = [0.0; 2];
            d_cos[y] = g.d_cos_y;
            d_cos[o] = g.d_cos_other;
            Ok((loss, g.d_norm, d_cos))
        }
        LossKind::Softmax => {
            let (loss, gl) = softmax_loss(head.logits(), y);
            let d_norm = gl[0] * head.cos[0] + gl[1] * head.cos[1];
            Ok((loss, d_norm, [gl[0] * head.norm, gl[1] * head.norm]))
        }
    }
}

pub(crate) fn accumulate_gradient(
    model: &MsLstmModel,
    rows: &[Vec<f64>],
    label: Label,
    kind: LossKind,
    grad: &mut MsLstmModel,
) -> Result<SampleLoss> {
    model.check_rows(rows)?;
    let trace = model.rollout(rows);
    let x = model.feature_of(&trace);
    let head = model.head_output(&x)?;
    let (loss, d_norm, d_cos) = sample_loss(model, head, label, kind)?;

    let n = head.norm;
    let mut dx: Vec<f64> = x.iter().map(|v| d_norm * v / n).collect();
    for c in 0..2 {
        let w = &model.head[c];
        let wn = super::norm(w);
        let cos = head.cos[c];
        for k in 0..x.len() {
            dx[k] += d_cos[c] * (w[k] / (wn * n) - cos * x[k] / (n * n));
            grad.head[c][k] += d_cos[c] * (x[k] / (wn * n) - cos * w[k] / (wn * wn));
        }
    }

    let hd = model.hyper.hidden;
    let steps = rows.len();
    let mut dh_ext = vec![vec![0.0; hd]; steps];
    for (s, chunk) in dx.chunks(hd).enumerate() {
        dh_ext[steps - model.hyper.scales + s].copy_from_slice(chunk);
    }
    for l in (0..model.layers.len()).rev() {
        let inputs: Vec<&[f64]> = if l == 0 {
            rows.iter().map(Vec::as_slice).collect()
        } else {
            trace[l - 1].iter().map(|s| s.h.as_slice()).collect()
        };
        dh_ext = layer_backward(
            &model.layers[l],
            &inputs,
            &trace[l],
            &dh_ext,
            &mut grad.layers[l],
            l > 0,
        );
    }
    Ok(SampleLoss { loss, head })
}

/// Backpropagates through one layer; returns the gradient with respect to its inputs when
/// `need_dx` is set.
fn layer_backward(
    p: &LstmLayerParams,
    inputs: &[&[f64]],
    steps: &[CellStep],
    dh_ext: &[Vec<f64>],
    grad: &mut LstmLayerParams,
    need_dx: bool,
) -> Vec<Vec<f64>> {
    let hd = p.hidden();
    let g4 = GATES * hd;
    let zeros = vec![0.0; hd];
    let mut dh_next = vec![0.0; hd];
    let mut dc_next = vec![0.0; hd];
    let mut dx_all = vec![Vec::new(); steps.len()];
    let mut da = vec![0.0; g4];
    for t in (0..steps.len()).rev() {
        let s = &steps[t];
        let (h_prev, c_prev) = if t > 0 {
            (&steps[t - 1].h, &steps[t - 1].c)
        } else {
            (&zeros, &zeros)
        };
        for j in 0..hd {
            let dh = dh_ext[t][j] + dh_next[j];
            let d_o = dh * s.tanh_c[j];
            let dc = dc_next[j] + dh * s.o[j] * (1.0 - s.tanh_c[j] * s.tanh_c[j]);
            let di = dc * s.g[j];
            let dg = dc * s.i[j];
            let df = dc * c_prev[j];
            dc_next[j] = dc * s.f[j];
            da[j] = di * s.i[j] * (1.0 - s.i[j]);
            da[hd + j] = df * s.f[j] * (1.0 - s.f[j]);
            da[2 * hd + j] = d_o * s.o[j] * (1.0 - s.o[j]);
            da[3 * hd + j] = dg * (1.0 - s.g[j] * s.g[j]);
        }
        axpy(&mut grad.b, 1.0, &da);
        let x = inputs[t];
        if need_dx {
            let mut dx = vec![0.0; x.len()];
            for (k, &xk) in x.iter().enumerate() {
                axpy(&mut grad.w[k * g4..(k + 1) * g4], xk, &da);
                dx[k] = dot(&p.w[k * g4..(k + 1) * g4], &da);
            }
            dx_all[t] = dx;
        } else {
            for (k, &xk) in x.iter().enumerate() {
                if xk != 0.0 {
                    axpy(&mut grad.w[k * g4..(k + 1) * g4], xk, &da);
                }
            }
        }
        for k in 0..hd {
            axpy(&mut grad.u[k * g4..(k + 1) * g4], h_prev[k], &da);
            dh_next[k] = dot(&p.u[k * g4..(k + 1) * g4], &da);
        }
    }
    dx_all
}
