//! Bidirectional LSTM classifier written against flat `f64` parameter
//! buffers, with hand-derived backpropagation through time.
//!
//! # Parameter layout
//!
//! All learnable values live in one `Vec<f64>` in this order:
//!
//! ```text
//! for layer in 0..num_layers:
//!     for direction in [forward, backward]:
//!         w_x  [4H × In]   input weights, row-major
//!         w_h  [4H × H]    recurrent weights, row-major
//!         b    [4H]        biases
//! head_w [2H]              output weights (forward summary, then backward)
//! head_b [1]
//! ```
//!
//! Gate rows are ordered input, forget, cell, output. `In` is the input
//! dimension for layer 0 and `2H` above it. The same order is used by the
//! gradient buffer, the Adam moments, and model checkpoints.

mod lstm;
mod train;

pub use lstm::{backward, forward, forward_one, ForwardCache, Gradients, PROB_FLOOR};
pub use train::{
    adam_step, bce_loss, gradient_check, predict, predict_batch, train, Adam, EarlyStopping,
    EpochRecord, GradCheckReport, StopDecision, TrainConfig, TrainHistory,
};

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::Rng;
use crate::seqdata::MAX_LEN;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub num_layers: usize,
    pub units: usize,
    pub dropout_rate: f64,
    pub input_dim: usize,
    pub max_len: usize,
    pub rng_seed: u64,
}

impl ModelConfig {
    /// Two stacked BiLSTM layers of 100 units per direction, 30% dropout.
    pub fn new(input_dim: usize) -> Self {
        ModelConfig {
            num_layers: 2,
            units: 100,
            dropout_rate: 0.3,
            input_dim,
            max_len: MAX_LEN,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.num_layers) {
            return Err(Error::Config(format!(
                "num_layers {} not in 1..=3",
                self.num_layers
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!(
                "dropout_rate {} not in [0, 1)",
                self.dropout_rate
            )));
        }
        if self.units == 0 || self.input_dim == 0 || self.max_len == 0 {
            return Err(Error::Config(
                "units, input_dim and max_len must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Offsets of one direction's parameters inside the flat buffer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirOffsets {
    pub input: usize,
    pub w_x: usize,
    pub w_h: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayout {
    pub units: usize,
    pub dirs: Vec<[DirOffsets; 2]>,
    pub head_w: usize,
    pub head_b: usize,
    pub total: usize,
}

impl ParamLayout {
    pub fn new(cfg: &ModelConfig) -> Self {
        let h = cfg.units;
        let mut off = 0;
        let mut dirs = Vec::with_capacity(cfg.num_layers);
        for layer in 0..cfg.num_layers {
            let input = if layer == 0 { cfg.input_dim } else { 2 * h };
            let mut pair = [DirOffsets {
                input,
                w_x: 0,
                w_h: 0,
                b: 0,
            }; 2];
            for d in &mut pair {
                d.w_x = off;
                off += 4 * h * input;
                d.w_h = off;
                off += 4 * h * h;
                d.b = off;
                off += 4 * h;
            }
            dirs.push(pair);
        }
        let head_w = off;
        let head_b = off + 2 * h;
        ParamLayout {
            units: h,
            dirs,
            head_w,
            head_b,
            total: head_b + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiLstmModel {
    pub config: ModelConfig,
    pub params: Vec<f64>,
}

impl BiLstmModel {
    pub fn layout(&self) -> ParamLayout {
        ParamLayout::new(&self.config)
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// Rebuilds a model from a config and a flat parameter buffer.
    pub fn from_parts(config: ModelConfig, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let expected = ParamLayout::new(&config).total;
        if params.len() != expected {
            return Err(Error::Config(format!(
                "expected {expected} parameters, got {}",
                params.len()
            )));
        }
        Ok(BiLstmModel { config, params })
    }
}

fn glorot_fill(out: &mut [f64], fan_in: usize, fan_out: usize, rng: &mut Rng) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in out {
        *v = rng.random_range(-limit..limit);
    }
}

/// Fills a row-major `rows × cols` block (rows ≥ cols) with orthonormal
/// columns via modified Gram–Schmidt on Gaussian draws.
fn orthogonal_fill(out: &mut [f64], rows: usize, cols: usize, rng: &mut Rng) {
    debug_assert!(rows >= cols);
    let mut colv: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while colv.len() < cols {
        let mut v: Vec<f64> = (0..rows).map(|_| StandardNormal.sample(rng)).collect();
        for u in &colv {
            let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for (a, b) in v.iter_mut().zip(u) {
                *a -= p * b;
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            colv.push(v);
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            out[r * cols + c] = colv[c][r];
        }
    }
}

/// Glorot-uniform input and head weights, orthogonal recurrent weights, zero
/// biases except the forget gate which starts at 1.
pub fn init_model(config: &ModelConfig, rng: &mut Rng) -> Result<BiLstmModel> {
    config.validate()?;
    let layout = ParamLayout::new(config);
    let h = config.units;
    let mut params = vec![0.0; layout.total];
    for pair in &layout.dirs {
        for d in pair {
            glorot_fill(
                &mut params[d.w_x..d.w_x + 4 * h * d.input],
                d.input,
                4 * h,
                rng,
            );
            orthogonal_fill(&mut params[d.w_h..d.w_h + 4 * h * h], 4 * h, h, rng);
            params[d.b + h..d.b + 2 * h].fill(1.0);
        }
    }
    glorot_fill(
        &mut params[layout.head_w..layout.head_w + 2 * h],
        2 * h,
        1,
        rng,
    );
    Ok(BiLstmModel {
        config: config.clone(),
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng_for;

    #[test]
    fn init_is_deterministic_and_shaped() {
        let cfg = ModelConfig::new(3);
        let a = init_model(&cfg, &mut rng_for(1, &[])).unwrap();
        let b = init_model(&cfg, &mut rng_for(1, &[])).unwrap();
        assert_eq!(a, b);
        let layout = a.layout();
        assert_eq!(layout.dirs[0][0].input, 3);
        assert_eq!(layout.dirs[1][0].input, 200);
        let expected = 2 * (400 * 3 + 400 * 100 + 400) + 2 * (400 * 200 + 400 * 100 + 400) + 201;
        assert_eq!(a.num_params(), expected);
        for pair in &layout.dirs {
            for d in pair {
                assert!(a.params[d.b + 100..d.b + 200].iter().all(|v| *v == 1.0));
                assert!(a.params[d.b..d.b + 100].iter().all(|v| *v == 0.0));
                assert!(a.params[d.b + 200..d.b + 400].iter().all(|v| *v == 0.0));
            }
        }
    }

    #[test]
    fn recurrent_weights_have_orthonormal_columns() {
        let cfg = ModelConfig {
            units: 6,
            ..ModelConfig::new(2)
        };
        let m = init_model(&cfg, &mut rng_for(2, &[])).unwrap();
        let d = m.layout().dirs[0][1];
        let w = &m.params[d.w_h..d.w_h + 24 * 6];
        for i in 0..6 {
            for j in 0..6 {
                let p: f64 = (0..24).map(|r| w[r * 6 + i] * w[r * 6 + j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((p - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn config_bounds() {
        let mut cfg = ModelConfig::new(2);
        cfg.num_layers = 4;
        assert!(cfg.validate().is_err());
        cfg.num_layers = 1;
        cfg.dropout_rate = 1.0;
        assert!(cfg.validate().is_err());
        assert!(BiLstmModel::from_parts(ModelConfig::new(2), vec![0.0; 3]).is_err());
    }
}
