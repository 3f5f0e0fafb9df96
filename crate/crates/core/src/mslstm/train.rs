//! Mini-batch ADAM training with a stepwise learning-rate schedule.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::backward::accumulate_gradient;
use super::MsLstmModel;
use crate::dataset::Label;
use crate::features::FeatureSequence;
use crate::{Error, Result};

/// `(first step, last step, learning rate)`, inclusive and 1-based.
pub const DEFAULT_SCHEDULE: [(u64, u64, f64); 4] = [
    (1, 100, 0.01),
    (101, 3000, 0.001),
    (3001, 30000, 0.0001),
    (30001, 50000, 0.00001),
];

/// Samples per parallel accumulation chunk. Fixed so the summation order never depends on the
/// thread count.
const CHUNK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Softmax,
    ASoftmax,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Softmax => "softmax",
            LossKind::ASoftmax => "asoftmax",
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "softmax" => Ok(LossKind::Softmax),
            "asoftmax" | "a-softmax" => Ok(LossKind::ASoftmax),
            other => Err(Error::invalid(format!("unknown loss `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub schedule: Vec<(u64, u64, f64)>,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_steps: u64,
    pub batch_size: usize,
    pub seed: u64,
    pub loss: LossKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            schedule: DEFAULT_SCHEDULE.to_vec(),
            beta1: 0.5,
            beta2: 0.9,
            epsilon: 1e-8,
            max_steps: 50_000,
            batch_size: 32,
            seed: 0,
            loss: LossKind::ASoftmax,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 || self.batch_size == 0 {
            return Err(Error::invalid("max_steps and batch_size must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::invalid("ADAM betas must lie in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("ADAM epsilon must be positive"));
        }
        let mut next = 1;
        for &(first, last, lr) in &self.schedule {
            if first != next || last < first {
                return Err(Error::invalid(format!(
                    "schedule segment {first}..={last} does not continue at step {next}"
                )));
            }
            if !(lr > 0.0) || !lr.is_finite() {
                return Err(Error::invalid("learning rates must be positive"));
            }
            next = last + 1;
        }
        if next <= self.max_steps {
            return Err(Error::invalid(format!(
                "schedule ends at step {} but max_steps is {}",
                next - 1,
                self.max_steps
            )));
        }
        Ok(())
    }

    /// Learning rate for 1-based `step`.
    pub fn learning_rate(&self, step: u64) -> f64 {
        self.schedule
            .iter()
            .find(|&&(a, b, _)| (a..=b).contains(&step))
            .or(self.schedule.last())
            .map_or(0.0, |s| s.2)
    }
}

/// First and second moment state of ADAM, one buffer per parameter block.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl Adam {
    pub fn new(model: &MsLstmModel, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let zeros: Vec<Vec<f64>> = model.param_blocks().iter().map(|b| vec![0.0; b.len()]).collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
            beta1,
            beta2,
            epsilon,
        }
    }

    pub fn step(&mut self, model: &mut MsLstmModel, grad: &MsLstmModel, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (((p, g), m), v) in model
            .param_blocks_mut()
            .into_iter()
            .zip(grad.param_blocks())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            for k in 0..p.len() {
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g[k];
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g[k] * g[k];
                p[k] -= lr * (m[k] / bc1) / ((v[k] / bc2).sqrt() + self.epsilon);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean batch loss at every step, before that step's update.
    pub loss_history: Vec<f64>,
}

pub fn sequence_rows(seq: &FeatureSequence) -> Vec<Vec<f64>> {
    seq.rows().map(|r| r.to_vec()).collect()
}

pub fn train(
    model: MsLstmModel,
    set: &[(FeatureSequence, Label)],
    config: &TrainConfig,
) -> Result<(MsLstmModel, TrainReport)> {
    let rows: Vec<(Vec<Vec<f64>>, Label)> =
        set.iter().map(|(s, l)| (sequence_rows(s), *l)).collect();
    train_rows(model, &rows, config)
}

/// Trains on pre-flattened step rows. Deterministic for a given `config.seed`.
pub fn train_rows(
    mut model: MsLstmModel,
    set: &[(Vec<Vec<f64>>, Label)],
    config: &TrainConfig,
) -> Result<(MsLstmModel, TrainReport)> {
    config.validate()?;
    model.validate()?;
    if set.is_empty() {
        return Err(Error::InvalidDataset("training set is empty".into()));
    }
    let blinks = set.iter().filter(|(_, l)| *l == Label::Blink).count();
    if blinks == 0 || blinks == set.len() {
        return Err(Error::InvalidDataset("training set must contain both classes".into()));
    }
    for (rows, _) in set {
        model.check_rows(rows)?;
    }
    model.normalize_head()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.shuffle(&mut rng);
    let mut cursor = 0;
    let batch = config.batch_size.min(set.len());
    let mut adam = Adam::new(&model, config.beta1, config.beta2, config.epsilon);
    let mut history = Vec::with_capacity(config.max_steps as usize);

    for step in 1..=config.max_steps {
        let mut picked = Vec::with_capacity(batch);
        while picked.len() < batch {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            picked.push(order[cursor]);
            cursor += 1;
        }
        let partials: Vec<Result<(f64, MsLstmModel)>> = picked
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut g = model.zeros_like();
                let mut loss = 0.0;
                for &i in chunk {
                    let (rows, label) = &set[i];
                    loss += accumulate_gradient(&model, rows, *label, config.loss, &mut g)?.loss;
                }
                Ok((loss, g))
            })
            .collect();
        let mut grad = model.zeros_like();
        let mut loss = 0.0;
        for part in partials {
            let (l, g) = part?;
            loss += l;
            for (acc, b) in grad.param_blocks_mut().into_iter().zip(g.param_blocks()) {
                super::axpy(acc, 1.0, b);
            }
        }
        let scale = 1.0 / batch as f64;
        grad.param_blocks_mut()
            .into_iter()
            .for_each(|b| b.iter_mut().for_each(|v| *v *= scale));
        loss *= scale;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("loss diverged at step {step}")));
        }
        history.push(loss);
        adam.step(&mut model, &grad, config.learning_rate(step));
        model.normalize_head()?;
    }
    Ok((
        model,
        TrainReport {
            loss_history: history,
        },
    ))
}
