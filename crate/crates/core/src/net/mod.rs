//! Feedforward multitask network: shared ReLU hidden layers feeding one
//! two-class softmax head per task, trained with weighted minibatch SGD.

mod checkpoint;
mod network;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use network::{aggregate_gradients, Gradients, Input, Layer, Mode, MultitaskNetwork};
pub use train::{
    active_weight, scaled_steps, train, write_learning_curve, CurvePoint, Example, Minibatch, TrainReport,
    TrainingSet,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid network configuration: {0}")]
    Config(String),
    #[error("task {task} out of range for {n_tasks} heads")]
    TaskOutOfRange { task: usize, n_tasks: usize },
    #[error("input has length {got}, expected {expected}")]
    InputLength { got: usize, expected: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("top hidden layer output is all zero at step {step}; lower the learning rate")]
    DeadTopLayer { step: u64 },
    #[error("empty training pool")]
    EmptyPool,
    #[error("empty minibatch")]
    EmptyBatch,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
}

/// Which hidden layers get dropout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropoutPlacement {
    #[default]
    AllHidden,
    FirstOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub input_dim: usize,
    /// Empty means logistic regression on the raw input.
    pub hidden_sizes: Vec<usize>,
    pub n_tasks: usize,
    pub dropout_rate: f64,
    pub dropout: DropoutPlacement,
    pub learning_rate: f64,
    /// `(step, rate)` pairs; the rate of the last pair whose step has been
    /// reached replaces `learning_rate`.
    pub lr_schedule: Vec<(u64, f64)>,
    pub batch_size: usize,
    pub n_steps: u64,
    pub init_std: f64,
    pub init_bias: f64,
    pub seed: u64,
    /// Synchronous data-parallel shards per minibatch.
    pub workers: usize,
    /// Steps between learning-curve points and dead-layer checks.
    pub log_every: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            input_dim: crate::chem::DEFAULT_NBITS,
            hidden_sizes: vec![2000, 100],
            n_tasks: 1,
            dropout_rate: 0.25,
            dropout: DropoutPlacement::AllHidden,
            learning_rate: 0.0003,
            lr_schedule: Vec::new(),
            batch_size: 128,
            n_steps: 1000,
            init_std: 0.01,
            init_bias: 0.5,
            seed: seed::DEFAULT_SEED,
            workers: 1,
            log_every: 100,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        let bad = |m: &str| Err(NetError::Config(m.to_string()));
        if self.input_dim == 0 {
            return bad("input_dim must be positive");
        }
        if self.hidden_sizes.contains(&0) {
            return bad("hidden sizes must be positive");
        }
        if self.n_tasks == 0 {
            return bad("n_tasks must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must lie in [0, 1)");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and non-negative");
        }
        if self.lr_schedule.iter().any(|&(_, r)| !(r >= 0.0 && r.is_finite())) {
            return bad("scheduled learning rates must be finite and non-negative");
        }
        if self.lr_schedule.windows(2).any(|w| w[0].0 >= w[1].0) {
            return bad("lr_schedule steps must be strictly increasing");
        }
        if self.batch_size == 0 || self.workers == 0 || self.log_every == 0 {
            return bad("batch_size, workers and log_every must be positive");
        }
        if !(self.init_std >= 0.0 && self.init_std.is_finite() && self.init_bias.is_finite()) {
            return bad("init_std must be finite and non-negative");
        }
        Ok(())
    }

    pub fn learning_rate_at(&self, step: u64) -> f64 {
        self.lr_schedule.iter().rev().find(|&&(s, _)| s <= step).map_or(self.learning_rate, |&(_, r)| r)
    }

    /// Width of the representation the heads read.
    pub fn top_width(&self) -> usize {
        self.hidden_sizes.last().copied().unwrap_or(self.input_dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule() {
        let cfg = NetworkConfig { learning_rate: 0.3, lr_schedule: vec![(10, 0.1), (20, 0.05)], ..Default::default() };
        assert_eq!(cfg.learning_rate_at(0), 0.3);
        assert_eq!(cfg.learning_rate_at(10), 0.1);
        assert_eq!(cfg.learning_rate_at(19), 0.1);
        assert_eq!(cfg.learning_rate_at(500), 0.05);
    }

    #[test]
    fn validation() {
        assert!(NetworkConfig::default().validate().is_ok());
        assert!(NetworkConfig { dropout_rate: 1.0, ..Default::default() }.validate().is_err());
        assert!(NetworkConfig { n_tasks: 0, ..Default::default() }.validate().is_err());
        assert!(NetworkConfig { hidden_sizes: vec![], ..Default::default() }.validate().is_ok());
    }
}
