use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::lstm::{backward, forward_one, ForwardCache, Gradients, PROB_FLOOR};
use super::BiLstmModel;
use crate::balance::ClassWeights;
use crate::error::{Error, Result};
use crate::eval::metrics::weighted_metrics;
use crate::seeds::{rng_for, Rng};
use crate::seqdata::{Label, RepresentedSequence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_epochs: usize,
    pub patience: usize,
    /// Probability above which a prediction counts as good.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 4,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_epochs: 100,
            patience: 5,
            threshold: 0.5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::Config(
                "batch_size and max_epochs must be positive".into(),
            ));
        }
        if self.patience >= self.max_epochs {
            return Err(Error::Config(format!(
                "patience {} must be below max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub train_loss: f64,
    pub val_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose weights were kept.
    pub best_epoch: usize,
}

/// Mean binary cross-entropy, each term optionally scaled by a class weight.
pub fn bce_loss(probs: &[f64], labels: &[Label], weights: Option<&ClassWeights>) -> f64 {
    if probs.is_empty() {
        return 0.0;
    }
    let total: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            let w = weights.map_or(1.0, |w| w.get(y));
            let l = if y == Label::Good {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            };
            w * l
        })
        .sum();
    total / probs.len() as f64
}

/// Bias-corrected Adam moments for a flat parameter buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl Adam {
    pub fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut Adam, cfg: &TrainConfig) {
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Continue,
    Stop,
}

/// Patience counter over a metric that should increase.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    stale: usize,
    epoch: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: f64::NEG_INFINITY,
            best_epoch: 0,
            stale: 0,
            epoch: 0,
        }
    }

    pub fn observe(&mut self, metric: f64) -> StopDecision {
        self.epoch += 1;
        if metric > self.best {
            self.best = metric;
            self.best_epoch = self.epoch;
            self.stale = 0;
            return StopDecision::Improved;
        }
        self.stale += 1;
        if self.stale >= self.patience {
            StopDecision::Stop
        } else {
            StopDecision::Continue
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

pub fn predict(model: &BiLstmModel, seq: &RepresentedSequence) -> Result<f64> {
    forward_one(model, seq, None).map(|c| c.prob)
}

pub fn predict_batch(model: &BiLstmModel, seqs: &[RepresentedSequence]) -> Result<Vec<f64>> {
    seqs.iter().map(|s| predict(model, s)).collect()
}

fn validation_f(model: &BiLstmModel, val: &[RepresentedSequence], threshold: f64) -> Result<f64> {
    let probs = predict_batch(model, val)?;
    let pred: Vec<Label> = probs
        .iter()
        .map(|&p| {
            if p >= threshold {
                Label::Good
            } else {
                Label::Bad
            }
        })
        .collect();
    let truth: Vec<Label> = val.iter().map(|s| s.label).collect();
    Ok(weighted_metrics(&pred, &truth).weighted.f1)
}

/// Mini-batch Adam training with early stopping on validation F-measure.
/// Returns the weights of the best epoch.
pub fn train(
    model: BiLstmModel,
    train_set: &[RepresentedSequence],
    val_set: &[RepresentedSequence],
    class_weights: &ClassWeights,
    cfg: &TrainConfig,
) -> Result<(BiLstmModel, TrainHistory)> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::InvalidArgument(
            "training and validation sets must be non-empty".into(),
        ));
    }
    let val_bad = val_set.iter().filter(|s| s.label == Label::Bad).count();
    if val_bad == 0 || val_bad == val_set.len() {
        return Err(Error::DegenerateValidation(format!(
            "{} items, {} bad",
            val_set.len(),
            val_bad
        )));
    }

    let mut model = model;
    let mut best = model.clone();
    let mut adam = Adam::new(model.num_params());
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut epochs = Vec::new();
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 0..cfg.max_epochs {
        let mut shuffle = rng_for(cfg.seed, &[epoch as u64, 0]);
        let mut dropout = rng_for(cfg.seed, &[epoch as u64, 1]);
        order.sort_unstable();
        order.shuffle(&mut shuffle);

        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let items: Vec<&RepresentedSequence> = batch.iter().map(|&i| &train_set[i]).collect();
            let caches = items
                .iter()
                .map(|s| forward_one(&model, s, Some(&mut dropout)))
                .collect::<Result<Vec<ForwardCache>>>()?;
            let probs: Vec<f64> = caches.iter().map(|c| c.prob).collect();
            let labels: Vec<Label> = items.iter().map(|s| s.label).collect();
            let targets: Vec<f64> = labels.iter().map(|l| l.target()).collect();
            let weights: Vec<f64> = labels.iter().map(|&l| class_weights.get(l)).collect();
            loss_sum += bce_loss(&probs, &labels, Some(class_weights)) * batch.len() as f64;
            let grads = backward(&model, &caches, &targets, Some(&weights));
            adam_step(&mut model.params, &grads.values, &mut adam, cfg);
        }

        let val_f = validation_f(&model, val_set, cfg.threshold)?;
        epochs.push(EpochRecord {
            train_loss: loss_sum / train_set.len() as f64,
            val_f,
        });
        match stopper.observe(val_f) {
            StopDecision::Improved => best = model.clone(),
            StopDecision::Continue => {}
            StopDecision::Stop => break,
        }
    }
    Ok((
        best,
        TrainHistory {
            epochs,
            best_epoch: stopper.best_epoch(),
        },
    ))
}

/// Loss of a batch where item `i` draws its dropout mask from stream
/// `(seed, i)`, so repeated evaluations see identical masks.
fn batch_loss_fixed_masks(
    model: &BiLstmModel,
    batch: &[RepresentedSequence],
    weights: Option<&ClassWeights>,
    dropout_seed: Option<u64>,
) -> Result<(f64, Vec<ForwardCache>)> {
    let caches = batch
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng: Option<Rng> = dropout_seed.map(|seed| rng_for(seed, &[i as u64]));
            forward_one(model, s, rng.as_mut())
        })
        .collect::<Result<Vec<_>>>()?;
    let probs: Vec<f64> = caches.iter().map(|c| c.prob).collect();
    let labels: Vec<Label> = batch.iter().map(|s| s.label).collect();
    Ok((bce_loss(&probs, &labels, weights), caches))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub analytic: Gradients,
    pub numeric: Vec<f64>,
    pub max_rel_error: f64,
    pub worst_index: usize,
}

/// Compares analytic gradients with central finite differences of step `h`
/// on every parameter. Relative error is `|a - n| / max(|a|, |n|, floor)`.
pub fn gradient_check(
    model: &BiLstmModel,
    batch: &[RepresentedSequence],
    weights: Option<&ClassWeights>,
    dropout_seed: Option<u64>,
    h: f64,
    floor: f64,
) -> Result<GradCheckReport> {
    let (_, caches) = batch_loss_fixed_masks(model, batch, weights, dropout_seed)?;
    let targets: Vec<f64> = batch.iter().map(|s| s.label.target()).collect();
    let sample_w: Vec<f64> = batch
        .iter()
        .map(|s| weights.map_or(1.0, |w| w.get(s.label)))
        .collect();
    let analytic = backward(model, &caches, &targets, Some(&sample_w));

    let mut probe = model.clone();
    let mut numeric = vec![0.0; model.num_params()];
    let mut max_rel_error = 0.0;
    let mut worst_index = 0;
    for i in 0..model.num_params() {
        let orig = probe.params[i];
        probe.params[i] = orig + h;
        let (up, _) = batch_loss_fixed_masks(&probe, batch, weights, dropout_seed)?;
        probe.params[i] = orig - h;
        let (down, _) = batch_loss_fixed_masks(&probe, batch, weights, dropout_seed)?;
        probe.params[i] = orig;
        let n = (up - down) / (2.0 * h);
        numeric[i] = n;
        let a = analytic.values[i];
        let rel = (a - n).abs() / a.abs().max(n.abs()).max(floor);
        if rel > max_rel_error {
            max_rel_error = rel;
            worst_index = i;
        }
    }
    Ok(GradCheckReport {
        analytic,
        numeric,
        max_rel_error,
        worst_index,
    })
}
