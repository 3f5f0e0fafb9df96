//! Multi-scale stacked LSTM classifier with an angular-margin head.

mod backward;
mod io;
mod loss;
mod train;


use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Label;
use crate::features::{FeatureSequence, STEP_DIM};
use crate::{Error, Result};

pub use backward::{loss_and_gradient, SampleLoss};
pub use io::{load_model, read_model, save_model, write_model, MODEL_MAGIC};
pub use loss::{asoftmax_loss, psi, softmax_loss, AngularGrad};
pub use train::{
    sequence_rows, train, train_rows, Adam, LossKind, TrainConfig, TrainReport, DEFAULT_SCHEDULE,
};

/// Number of gate blocks per layer, stored in the order i, f, o, g.
pub const GATES: usize = 4;

/// Weights of one LSTM layer.
///
/// `w` is `input_dim x 4*hidden` and `u` is `hidden x 4*hidden`, both row-major, so row `k`
/// holds the contributions of input component `k` to every gate pre-activation. Columns are
/// grouped by gate: `[i | f | o | g]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    input_dim: usize,
    hidden: usize,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub b: Vec<f64>,
}

impl LstmLayerParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            input_dim,
            hidden,
            w: vec![0.0; input_dim * GATES * hidden],
            u: vec![0.0; hidden * GATES * hidden],
            b: vec![0.0; GATES * hidden],
        }
    }

    pub fn from_parts(
        input_dim: usize,
        hidden: usize,
        w: Vec<f64>,
        u: Vec<f64>,
        b: Vec<f64>,
    ) -> Result<Self> {
        let g = GATES * hidden;
        if input_dim == 0 || hidden == 0 {
            return Err(Error::invalid("layer dimensions must be positive"));
        }
        if w.len() != input_dim * g || u.len() != hidden * g || b.len() != g {
            return Err(Error::invalid(format!(
                "layer block sizes ({}, {}, {}) do not match input {input_dim}, hidden {hidden}",
                w.len(),
                u.len(),
                b.len()
            )));
        }
        if w.iter().chain(&u).chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite layer parameter".into()));
        }
        Ok(Self {
            input_dim,
            hidden,
            w,
            u,
            b,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    /// Gate pre-activations `W^T x + U^T h + b`, laid out `[i | f | o | g]`.
    pub(crate) fn preactivation(&self, x: &[f64], h: &[f64]) -> Vec<f64> {
        let mut a = self.b.clone();
        let g = GATES * self.hidden;
        for (k, &xk) in x.iter().enumerate() {
            if xk != 0.0 {
                axpy(&mut a, xk, &self.w[k * g..(k + 1) * g]);
            }
        }
        for (k, &hk) in h.iter().enumerate() {
            if hk != 0.0 {
                axpy(&mut a, hk, &self.u[k * g..(k + 1) * g]);
            }
        }
        a
    }
}

/// Intermediate values of one cell step, kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct CellStep {
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    pub g: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

pub(crate) fn cell_step(params: &LstmLayerParams, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> CellStep {
    let hd = params.hidden;
    let a = params.preactivation(x, h_prev);
    let i: Vec<f64> = a[..hd].iter().map(|&v| sigmoid(v)).collect();
    let f: Vec<f64> = a[hd..2 * hd].iter().map(|&v| sigmoid(v)).collect();
    let o: Vec<f64> = a[2 * hd..3 * hd].iter().map(|&v| sigmoid(v)).collect();
    let g: Vec<f64> = a[3 * hd..].iter().map(|&v| v.tanh()).collect();
    let c: Vec<f64> = (0..hd).map(|j| f[j] * c_prev[j] + i[j] * g[j]).collect();
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h = (0..hd).map(|j| o[j] * tanh_c[j]).collect();
    CellStep {
        i,
        f,
        o,
        g,
        c,
        tanh_c,
        h,
    }
}

/// One LSTM step: returns `(h_t, c_t)`.
pub fn lstm_cell(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    params: &LstmLayerParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != params.input_dim || h_prev.len() != params.hidden || c_prev.len() != params.hidden {
        return Err(Error::invalid(format!(
            "cell expects input {} and state {}, got {}, {}, {}",
            params.input_dim,
            params.hidden,
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    if x.iter().chain(h_prev).chain(c_prev).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite cell input".into()));
    }
    let step = cell_step(params, x, h_prev, c_prev);
    Ok((step.h, step.c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hyper {
    /// Stacked layer count `L`.
    pub layers: usize,
    /// Temporal scale count `T`: how many trailing top-layer outputs feed the head.
    pub scales: usize,
    pub hidden: usize,
    /// Angular margin `m`.
    pub margin: u32,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            layers: 2,
            scales: 2,
            hidden: 64,
            margin: 4,
        }
    }
}

impl Hyper {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.scales == 0 || self.hidden == 0 {
            return Err(Error::invalid("layers, scales and hidden must be positive"));
        }
        if self.margin == 0 {
            return Err(Error::invalid("angular margin must be at least 1"));
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.scales * self.hidden
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsLstmModel {
    pub hyper: Hyper,
    pub layers: Vec<LstmLayerParams>,
    /// Class weight vectors, indexed by [`Label::class_index`].
    pub head: [Vec<f64>; 2],
}

/// Head geometry of one forward pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadOutput {
    pub norm: f64,
    pub cos: [f64; 2],
}

impl HeadOutput {
    /// `‖x‖ cos θ_c` for both classes.
    pub fn logits(&self) -> [f64; 2] {
        [self.norm * self.cos[0], self.norm * self.cos[1]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    /// Concatenation of the last `T` top-layer hidden states, oldest first.
    pub feature: Vec<f64>,
    pub head: HeadOutput,
}

impl MsLstmModel {
    /// Seeded initialization: weights uniform in `±1/sqrt(fan_in)`, forget bias 1, random
    /// unit-norm head.
    pub fn new(hyper: Hyper, input_dim: usize, seed: u64) -> Result<Self> {
        hyper.validate()?;
        if input_dim == 0 {
            return Err(Error::invalid("input dimension must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hd = hyper.hidden;
        let mut layers = Vec::with_capacity(hyper.layers);
        for l in 0..hyper.layers {
            let in_dim = if l == 0 { input_dim } else { hd };
            let mut p = LstmLayerParams::zeros(in_dim, hd);
            let sw = 1.0 / (in_dim as f64).sqrt();
            let su = 1.0 / (hd as f64).sqrt();
            p.w.iter_mut().for_each(|v| *v = rng.random_range(-sw..=sw));
            p.u.iter_mut().for_each(|v| *v = rng.random_range(-su..=su));
            p.b[hd..2 * hd].iter_mut().for_each(|v| *v = 1.0);
            layers.push(p);
        }
        let mut head = [Vec::new(), Vec::new()];
        for w in head.iter_mut() {
            *w = (0..hyper.feature_dim())
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
        }
        let mut model = Self {
            hyper,
            layers,
            head,
        };
        model.normalize_head()?;
        Ok(model)
    }

    /// Model with the default hyper-parameters over 118-dim step features.
    pub fn with_defaults(seed: u64) -> Result<Self> {
        Self::new(Hyper::default(), STEP_DIM, seed)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim
    }

    /// Checks structural consistency of layers and head.
    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        if self.layers.len() != self.hyper.layers {
            return Err(Error::invalid("layer count does not match hyper.layers"));
        }
        for (l, p) in self.layers.iter().enumerate() {
            if p.hidden != self.hyper.hidden {
                return Err(Error::invalid(format!("layer {l} hidden size mismatch")));
            }
            if l > 0 && p.input_dim != self.hyper.hidden {
                return Err(Error::invalid(format!("layer {l} input must equal hidden size")));
            }
        }
        for w in &self.head {
            if w.len() != self.hyper.feature_dim() {
                return Err(Error::invalid("head weight length must be scales * hidden"));
            }
        }
        if self.param_blocks().iter().any(|b| b.iter().any(|v| !v.is_finite())) {
            return Err(Error::Numeric("non-finite model parameter".into()));
        }
        Ok(())
    }

    /// Rescales both head vectors to unit norm.
    pub fn normalize_head(&mut self) -> Result<()> {
        for w in self.head.iter_mut() {
            let n = norm(w);
            if n == 0.0 || !n.is_finite() {
                return Err(Error::Numeric("head weight has zero or non-finite norm".into()));
            }
            w.iter_mut().for_each(|v| *v /= n);
        }
        Ok(())
    }

    /// Parameter blocks in storage order: per layer `w, u, b`, then the two head vectors.
    pub fn param_blocks(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(3 * self.layers.len() + 2);
        for p in &self.layers {
            out.push(&p.w);
            out.push(&p.u);
            out.push(&p.b);
        }
        out.push(&self.head[0]);
        out.push(&self.head[1]);
        out
    }

    pub fn param_blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(3 * self.layers.len() + 2);
        for p in self.layers.iter_mut() {
            out.push(&mut p.w);
            out.push(&mut p.u);
            out.push(&mut p.b);
        }
        let [h0, h1] = &mut self.head;
        out.push(h0);
        out.push(h1);
        out
    }

    /// Same shapes, all parameters zero. Used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.param_blocks_mut().into_iter().for_each(|b| b.fill(0.0));
        z
    }

    pub(crate) fn check_rows(&self, rows: &[Vec<f64>]) -> Result<()> {
        if rows.len() < self.hyper.scales {
            return Err(Error::invalid(format!(
                "sequence of {} steps is shorter than {} scales",
                rows.len(),
                self.hyper.scales
            )));
        }
        let d = self.input_dim();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::invalid(format!("step of length {} but model expects {d}", r.len())));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite input step".into()));
        }
        Ok(())
    }

    /// Runs every layer and keeps all cell intermediates.
    pub(crate) fn rollout(&self, rows: &[Vec<f64>]) -> Vec<Vec<CellStep>> {
        let hd = self.hyper.hidden;
        let mut trace: Vec<Vec<CellStep>> = Vec::with_capacity(self.layers.len());
        for (l, p) in self.layers.iter().enumerate() {
            let mut h = vec![0.0; hd];
            let mut c = vec![0.0; hd];
            let mut steps = Vec::with_capacity(rows.len());
            for t in 0..rows.len() {
                let x: &[f64] = if l == 0 { &rows[t] } else { &trace[l - 1][t].h };
                let s = cell_step(p, x, &h, &c);
                h.clone_from(&s.h);
                c.clone_from(&s.c);
                steps.push(s);
            }
            trace.push(steps);
        }
        trace
    }

    pub(crate) fn feature_of(&self, trace: &[Vec<CellStep>]) -> Vec<f64> {
        let top = trace.last().expect("at least one layer");
        let n = top.len();
        top[n - self.hyper.scales..]
            .iter()
            .flat_map(|s| s.h.iter().copied())
            .collect()
    }

    /// Head geometry for an arbitrary feature vector.
    pub fn head_output(&self, x: &[f64]) -> Result<HeadOutput> {
        if x.len() != self.hyper.feature_dim() {
            return Err(Error::invalid("feature length must be scales * hidden"));
        }
        let n = norm(x);
        if n == 0.0 {
            return Err(Error::Numeric("zero feature vector has no angle".into()));
        }
        let mut cos = [0.0; 2];
        for (c, w) in cos.iter_mut().zip(&self.head) {
            *c = (dot(w, x) / (norm(w) * n)).clamp(-1.0, 1.0);
        }
        Ok(HeadOutput { norm: n, cos })
    }

    pub fn forward_rows(&self, rows: &[Vec<f64>]) -> Result<ForwardOutput> {
        self.check_rows(rows)?;
        let trace = self.rollout(rows);
        let feature = self.feature_of(&trace);
        let head = self.head_output(&feature)?;
        Ok(ForwardOutput { feature, head })
    }

    pub fn forward(&self, seq: &FeatureSequence) -> Result<ForwardOutput> {
        self.forward_rows(&sequence_rows(seq))
    }

    /// Label and blink probability, using the margin-free angular softmax.
    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Result<(Label, f64)> {
        let out = self.forward_rows(rows)?;
        Ok(decide(out.head))
    }

    pub fn predict(&self, seq: &FeatureSequence) -> Result<(Label, f64)> {
        self.predict_rows(&sequence_rows(seq))
    }
}

/// Free-function form of [`MsLstmModel::forward`].
pub fn forward(model: &MsLstmModel, seq: &FeatureSequence) -> Result<ForwardOutput> {
    model.forward(seq)
}

/// Free-function form of [`MsLstmModel::predict`].
pub fn predict(model: &MsLstmModel, seq: &FeatureSequence) -> Result<(Label, f64)> {
    model.predict(seq)
}

fn decide(head: HeadOutput) -> (Label, f64) {
    let [s0, s1] = head.logits();
    let p_blink = 1.0 / (1.0 + (s1 - s0).exp());
    let label = if p_blink > 0.5 {
        Label::Blink
    } else if p_blink < 0.5 {
        Label::NonBlink
    } else if head.cos[0] >= head.cos[1] {
        Label::Blink
    } else {
        Label::NonBlink
    };
    (label, p_blink)
}

pub(crate) fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for k in 0..4 {
            acc[k] += a[4 * c + k] * b[4 * c + k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
