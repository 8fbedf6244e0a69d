use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;

use super::{AdamState, HybridModel, ModelError, DEFAULT_LEARNING_RATE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Drives the per-epoch shuffle.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 5,
            learning_rate: DEFAULT_LEARNING_RATE,
            seed: 0,
        }
    }
}

/// Training metrics are averaged over the epoch's batches as they were seen;
/// validation metrics are computed after the last step of the epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub steps: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub seed: u64,
    pub epochs: Vec<EpochMetrics>,
}

impl TrainingRecord {
    pub const CSV_HEADER: &'static str =
        "epoch,steps,train_loss,train_accuracy,val_loss,val_accuracy";

    pub fn final_metrics(&self) -> Option<&EpochMetrics> {
        self.epochs.last()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for e in &self.epochs {
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.6},{:.6},{:.6}",
                e.epoch, e.steps, e.train_loss, e.train_accuracy, e.val_loss, e.val_accuracy
            );
        }
        s
    }
}

/// Owns the optimizer and shuffle stream so training can be resumed.
#[derive(Debug, Clone)]
pub struct Trainer {
    config: TrainConfig,
    optimizer: AdamState,
    rng: ChaCha8Rng,
}

impl Trainer {
    pub fn new(model: &HybridModel, config: TrainConfig) -> Result<Self, ModelError> {
        if config.batch_size == 0 {
            return Err(ModelError::Contract("batch size must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(1);
        Ok(Self {
            config,
            optimizer: AdamState::new(model.params().len(), config.learning_rate),
            rng,
        })
    }

    pub fn optimizer(&self) -> &AdamState {
        &self.optimizer
    }

    pub fn fit(
        &mut self,
        model: &mut HybridModel,
        train: &Dataset,
        validation: &Dataset,
    ) -> Result<TrainingRecord, ModelError> {
        self.fit_with(model, train, validation, |_| {})
    }

    /// Runs `config.epochs` epochs, calling `on_epoch` after each one.
    pub fn fit_with(
        &mut self,
        model: &mut HybridModel,
        train: &Dataset,
        validation: &Dataset,
        mut on_epoch: impl FnMut(&EpochMetrics),
    ) -> Result<TrainingRecord, ModelError> {
        if train.is_empty() || validation.is_empty() {
            return Err(ModelError::Contract(
                "training and validation sets must be non-empty".into(),
            ));
        }
        let mut order: Vec<usize> = (0..train.len()).collect();
        let mut epochs = Vec::with_capacity(self.config.epochs);
        for epoch in 1..=self.config.epochs {
            order.shuffle(&mut self.rng);
            let mut loss_sum = 0.0;
            let mut correct = 0;
            let mut steps = 0;
            for chunk in order.chunks(self.config.batch_size) {
                let batch: Vec<&[f64]> = chunk.iter().map(|&i| train.sample(i)).collect();
                let labels: Vec<u8> = chunk.iter().map(|&i| train.label(i)).collect();
                let out = model.loss_and_grad(&batch, &labels)?;
                self.optimizer.step(model.params_mut(), &out.grad);
                loss_sum += out.loss * chunk.len() as f64;
                correct += out.correct;
                steps += 1;
            }
            let (val_loss, val_accuracy) = model.evaluate(validation)?;
            let n = train.len() as f64;
            let metrics = EpochMetrics {
                epoch,
                steps,
                train_loss: loss_sum / n,
                train_accuracy: correct as f64 / n,
                val_loss,
                val_accuracy,
            };
            on_epoch(&metrics);
            epochs.push(metrics);
        }
        Ok(TrainingRecord {
            seed: self.config.seed,
            epochs,
        })
    }
}

/// Trains `model` in place with a fresh optimizer.
pub fn train(
    model: &mut HybridModel,
    train: &Dataset,
    validation: &Dataset,
    config: &TrainConfig,
) -> Result<TrainingRecord, ModelError> {
    Trainer::new(model, *config)?.fit(model, train, validation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Split;
    use crate::hqnn::Architecture;
    use crate::simulator::Simulator;

    fn toy(n: usize, offset: usize) -> Dataset {
        let features = 4;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = ((i + offset) % 3) as u8;
            for f in 0..features {
                x.push(if f == label as usize { 0.9 } else { 0.1 * ((i + f) % 3) as f64 });
            }
            y.push(label);
        }
        Dataset::new(features, x, y, Split::Full).unwrap()
    }

    #[test]
    fn one_epoch_of_ten_samples_takes_two_steps() {
        let mut model = HybridModel::new(Architecture::new(4, 3, None), 1, Simulator::new()).unwrap();
        let cfg = TrainConfig {
            epochs: 1,
            batch_size: 5,
            learning_rate: 0.01,
            seed: 1,
        };
        let rec = train(&mut model, &toy(10, 0), &toy(4, 1), &cfg).unwrap();
        assert_eq!(rec.epochs.len(), 1);
        assert_eq!(rec.epochs[0].steps, 2);
        let csv = rec.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with(TrainingRecord::CSV_HEADER));
    }

    #[test]
    fn ragged_last_batch_counts_as_a_step() {
        let mut model = HybridModel::new(Architecture::new(4, 2, None), 1, Simulator::new()).unwrap();
        let cfg = TrainConfig {
            epochs: 2,
            batch_size: 4,
            learning_rate: 0.01,
            seed: 1,
        };
        let rec = train(&mut model, &toy(10, 0), &toy(3, 0), &cfg).unwrap();
        assert!(rec.epochs.iter().all(|e| e.steps == 3));
    }

    #[test]
    fn same_seed_same_record() {
        let run = |seed| {
            let arch = Architecture::new(4, 4, Some(2));
            let mut model = HybridModel::new(arch, seed, Simulator::new()).unwrap();
            let cfg = TrainConfig {
                epochs: 2,
                batch_size: 5,
                learning_rate: 0.02,
                seed,
            };
            let rec = train(&mut model, &toy(15, 0), &toy(6, 2), &cfg).unwrap();
            (rec.to_csv(), model.params().to_vec())
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3).1, run(4).1);
    }

    #[test]
    fn loss_decreases_on_a_separable_toy_set() {
        let mut model = HybridModel::new(Architecture::new(4, 3, None), 2, Simulator::new()).unwrap();
        let cfg = TrainConfig {
            epochs: 30,
            batch_size: 5,
            learning_rate: 0.05,
            seed: 2,
        };
        let data = toy(30, 0);
        let rec = train(&mut model, &data, &data, &cfg).unwrap();
        let first = rec.epochs[0].train_loss;
        let last = rec.final_metrics().unwrap().train_loss;
        assert!(last < first, "{first} -> {last}");
    }

    #[test]
    fn empty_sets_and_zero_batch_are_rejected() {
        let mut model = HybridModel::new(Architecture::new(4, 2, None), 1, Simulator::new()).unwrap();
        let cfg = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(Trainer::new(&model, cfg), Err(ModelError::Contract(_))));
        let empty = toy(3, 0).subset(&[], Split::Validation);
        let cfg = TrainConfig {
            epochs: 1,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train(&mut model, &toy(5, 0), &empty, &cfg),
            Err(ModelError::Contract(_))
        ));
    }
}
