//! Minibatch SGD with teacher-forced BPTT.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{EncodedExample, G2PModel, ModelError};
use crate::nn::{sgd_apply, Parameters};
use crate::Real;

/// Validation cross-entropy (nats per target) must drop by more than this to
/// count as an improvement.
pub const IMPROVEMENT_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum LrMode {
    /// Halve the rate whenever validation cross-entropy stops improving; stop
    /// once it falls below `initial / 1024` or after `max_epochs`.
    ValidationDriven { initial: f64, max_epochs: usize },
    /// Run `(epochs, rate)` segments in order.
    Piecewise { segments: Vec<(usize, f64)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSchedule {
    pub mode: LrMode,
    pub minibatch: usize,
    /// Bucket minibatches by word length.
    pub sort_by_length: bool,
    /// Elementwise bound on the summed minibatch gradient.
    pub clip: Option<f64>,
}

impl TrainSchedule {
    /// 10 epochs at 0.1, 2 at 0.05, then 70 at 0.01, minibatches of 100.
    pub fn nettalk() -> Self {
        Self {
            mode: LrMode::Piecewise { segments: alloc::vec![(10, 0.1), (2, 0.05), (70, 0.01)] },
            minibatch: 100,
            sort_by_length: true,
            clip: Some(1.0),
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.minibatch == 0 {
            return Err(TrainError::Config("minibatch size must be at least 1".into()));
        }
        if let Some(c) = self.clip {
            if !(c > 0.0 && c.is_finite()) {
                return Err(TrainError::Config("clip must be positive".into()));
            }
        }
        let rate_ok = |lr: f64| lr > 0.0 && lr.is_finite();
        match &self.mode {
            LrMode::ValidationDriven { initial, max_epochs } => {
                if !rate_ok(*initial) || *max_epochs == 0 {
                    return Err(TrainError::Config("learning rate and max epochs must be positive".into()));
                }
            }
            LrMode::Piecewise { segments } => {
                if segments.is_empty() || segments.iter().any(|&(e, lr)| e == 0 || !rate_ok(lr)) {
                    return Err(TrainError::Config("piecewise segments need positive epochs and rates".into()));
                }
            }
        }
        Ok(())
    }
}

/// Learning-rate state for the validation-driven schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct HalvingController {
    initial: f64,
    lr: f64,
    best: Option<f64>,
}

impl HalvingController {
    pub fn new(initial: f64) -> Self {
        Self { initial, lr: initial, best: None }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn best(&self) -> Option<f64> {
        self.best
    }

    /// Records one epoch's validation cross-entropy. Returns whether it
    /// improved; if not, the rate is halved for the next epoch.
    pub fn observe(&mut self, valid_ce: f64) -> bool {
        let improved = match self.best {
            None => true,
            Some(best) => valid_ce < best - IMPROVEMENT_THRESHOLD,
        };
        if improved {
            self.best = Some(valid_ce);
        } else {
            self.lr /= 2.0;
        }
        improved
    }

    pub fn exhausted(&self) -> bool {
        self.lr < self.initial / 1024.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean cross-entropy per target over the epoch's minibatches.
    pub train_ce: f64,
    pub valid_ce: Option<f64>,
    /// Rate used during this epoch.
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
}

/// Receives the model after every epoch.
pub trait CheckpointSink<R: Real> {
    fn epoch_end(&mut self, record: &EpochRecord, model: &G2PModel<R>, is_best: bool) -> Result<(), String>;
}

impl<R: Real> CheckpointSink<R> for () {
    fn epoch_end(&mut self, _: &EpochRecord, _: &G2PModel<R>, _: bool) -> Result<(), String> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("training configuration: {0}")]
    Config(String),
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("training diverged at epoch {epoch}, minibatch {minibatch}")]
    Divergence { epoch: usize, minibatch: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn minibatches(
    examples: &[EncodedExample],
    size: usize,
    sort_by_length: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(rng);
    if !sort_by_length {
        return order.chunks(size).map(<[usize]>::to_vec).collect();
    }
    let mut buckets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in order {
        buckets.entry(examples[i].letters.len()).or_default().push(i);
    }
    let mut batches: Vec<Vec<usize>> =
        buckets.values().flat_map(|b| b.chunks(size).map(<[usize]>::to_vec)).collect();
    batches.shuffle(rng);
    batches
}

/// Mean cross-entropy per target over `examples`.
pub fn mean_cross_entropy<R: Real>(model: &G2PModel<R>, examples: &[EncodedExample]) -> Result<f64, ModelError> {
    let (mut loss, mut steps) = (0.0, 0usize);
    for ex in examples {
        let (l, n) = model.loss(ex)?;
        loss += l;
        steps += n;
    }
    Ok(if steps == 0 { 0.0 } else { loss / steps as f64 })
}

/// Trains `model` in place.
///
/// Each epoch reshuffles the training examples from a stream derived from the
/// model seed, sums the gradients of each minibatch, clips them and applies
/// one update at the per-sample rate. Under the validation-driven schedule the
/// model is left at its best-validation parameters.
pub fn train<R: Real, S: CheckpointSink<R> + ?Sized>(
    model: &mut G2PModel<R>,
    train_set: &[EncodedExample],
    validation: &[EncodedExample],
    schedule: &TrainSchedule,
    sink: &mut S,
) -> Result<TrainOutcome, TrainError> {
    schedule.validate()?;
    if train_set.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    let plan: Vec<f64> = match &schedule.mode {
        LrMode::ValidationDriven { .. } if validation.is_empty() => {
            return Err(TrainError::Config("validation-driven schedule needs a validation set".into()))
        }
        LrMode::ValidationDriven { .. } => Vec::new(),
        LrMode::Piecewise { segments } => {
            segments.iter().flat_map(|&(n, lr)| core::iter::repeat_n(lr, n)).collect()
        }
    };
    let mut controller = match schedule.mode {
        LrMode::ValidationDriven { initial, .. } => Some(HalvingController::new(initial)),
        LrMode::Piecewise { .. } => None,
    };
    let max_epochs = match schedule.mode {
        LrMode::ValidationDriven { max_epochs, .. } => max_epochs,
        LrMode::Piecewise { .. } => plan.len(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(model.config().seed.0);
    rng.set_stream(1);
    let clip = schedule.clip.map(R::from_f64);
    let mut grads = model.params.zeros_like();
    let mut history = Vec::new();
    let mut best: Option<(f64, usize)> = None;
    let mut best_params = None;

    for epoch in 1..=max_epochs {
        let lr = match &controller {
            Some(c) => c.lr(),
            None => plan[epoch - 1],
        };
        let (mut loss_sum, mut steps) = (0.0, 0usize);
        for (b, batch) in minibatches(train_set, schedule.minibatch, schedule.sort_by_length, &mut rng)
            .into_iter()
            .enumerate()
        {
            grads.fill_zero();
            for &i in &batch {
                let (l, n) = model.loss_and_grad(&train_set[i], &mut grads)?;
                loss_sum += l;
                steps += n;
            }
            if !loss_sum.is_finite() || !grads.all_finite() {
                return Err(TrainError::Divergence { epoch, minibatch: b + 1 });
            }
            sgd_apply(&mut model.params, &grads, R::from_f64(lr), clip).map_err(ModelError::from)?;
            if !model.params.all_finite() {
                return Err(TrainError::Divergence { epoch, minibatch: b + 1 });
            }
        }
        let train_ce = loss_sum / steps as f64;
        let valid_ce = if validation.is_empty() { None } else { Some(mean_cross_entropy(model, validation)?) };
        let score = valid_ce.unwrap_or(train_ce);
        let is_best = best.is_none_or(|(b, _)| score < b);
        if is_best {
            best = Some((score, epoch));
            if controller.is_some() {
                best_params = Some(model.params.clone());
            }
        }
        let record = EpochRecord { epoch, train_ce, valid_ce, lr };
        sink.epoch_end(&record, model, is_best).map_err(TrainError::Checkpoint)?;
        history.push(record);
        if let (Some(c), Some(v)) = (controller.as_mut(), valid_ce) {
            c.observe(v);
            if c.exhausted() {
                break;
            }
        }
    }
    if let Some(p) = best_params {
        model.params = p;
    }
    Ok(TrainOutcome { history, best_epoch: best.map_or(0, |(_, e)| e) })
}
