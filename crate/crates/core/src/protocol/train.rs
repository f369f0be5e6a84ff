use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::splits::{SplitMode, SplitPlan};
use crate::data::{preprocess, Dataset, Modality, Sample};
use crate::error::{Error, Result};
use crate::eval::Probe;
use crate::models::argmax;
use crate::nn::{sgd_momentum_step, Hyperparams, InputShape, Network};
use crate::seeding;
use crate::tensor::Tensor;

/// Maps samples to training labels: `0`/`1` (real/fake) for open-set plans,
/// identity class or the fake class `N` for closed-set plans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelMap {
    pub mode: SplitMode,
    pub num_classes: usize,
}

impl LabelMap {
    pub fn new(mode: SplitMode, d: &Dataset) -> Self {
        LabelMap {
            mode,
            num_classes: d.num_classes(),
        }
    }

    pub fn num_outputs(&self) -> usize {
        self.fake_index() + 1
    }

    pub fn fake_index(&self) -> usize {
        match self.mode {
            SplitMode::OpenSet => 1,
            SplitMode::ClosedSet => self.num_classes,
        }
    }

    pub fn label(&self, s: &Sample) -> usize {
        match (self.mode, s.class_id) {
            (_, None) => self.fake_index(),
            (SplitMode::OpenSet, Some(_)) => 0,
            (SplitMode::ClosedSet, Some(c)) => c,
        }
    }
}

/// Preprocessed images of one modality, keyed by sample id.
pub struct Prepared<'a> {
    pub modality: Modality,
    pub labels: LabelMap,
    samples: Vec<&'a Sample>,
    images: Vec<Tensor>,
    index: HashMap<&'a str, usize>,
}

impl<'a> Prepared<'a> {
    pub fn new(d: &'a Dataset, modality: Modality, labels: LabelMap, target: (usize, usize)) -> Self {
        let samples: Vec<&Sample> = d.samples().iter().filter(|s| s.modality == modality).collect();
        let images = samples.iter().map(|s| preprocess(s, target)).collect();
        let index = samples
            .iter()
            .enumerate()
            .map(|(i, s)| (s.sample_id.as_str(), i))
            .collect();
        Prepared {
            modality,
            labels,
            samples,
            images,
            index,
        }
    }

    pub fn input_shape(&self) -> Option<InputShape> {
        self.images
            .first()
            .map(|t| InputShape::new(t.shape()[0], t.shape()[1], t.shape()[2]))
    }

    /// Positions of the ids that belong to this modality, in list order.
    pub fn select(&self, ids: &[String]) -> Vec<usize> {
        ids.iter()
            .filter_map(|id| self.index.get(id.as_str()).copied())
            .collect()
    }

    pub fn batch(&self, rows: &[usize]) -> Result<(Tensor, Vec<usize>)> {
        let images: Vec<&Tensor> = rows.iter().map(|&i| &self.images[i]).collect();
        let labels = rows.iter().map(|&i| self.labels.label(self.samples[i])).collect();
        Ok((Tensor::stack(&images)?, labels))
    }

    pub fn probes(&self, ids: &[String]) -> Vec<Probe> {
        self.select(ids)
            .into_iter()
            .map(|i| {
                let s = self.samples[i];
                Probe {
                    sample_id: s.sample_id.clone(),
                    pair_id: s.pair_id.clone(),
                    modality: s.modality,
                    true_label: self.labels.label(s),
                    image: self.images[i].clone(),
                }
            })
            .collect()
    }

    pub fn accuracy(&self, net: &Network, rows: &[usize]) -> Result<f64> {
        if rows.is_empty() {
            return Err(Error::Protocol("accuracy over an empty subset".into()));
        }
        let mut correct = 0;
        for chunk in rows.chunks(EVAL_BATCH) {
            let (batch, labels) = self.batch(chunk)?;
            let probs = net.forward(&batch)?;
            correct += labels
                .iter()
                .enumerate()
                .filter(|(i, &l)| argmax(probs.row(*i)) == l)
                .count();
        }
        Ok(correct as f64 / rows.len() as f64)
    }
}

const EVAL_BATCH: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
    pub stopped_epoch: usize,
    pub best_epoch: usize,
}

impl TrainingHistory {
    pub fn best_val_acc(&self) -> f64 {
        self.epochs
            .iter()
            .find(|e| e.epoch == self.best_epoch)
            .map_or(0.0, |e| e.val_acc)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["epoch", "train_loss", "train_acc", "val_acc"])?;
        for e in &self.epochs {
            w.write_record([
                e.epoch.to_string(),
                e.train_loss.to_string(),
                e.train_acc.to_string(),
                e.val_acc.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Protocol(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Progress {
    Improved,
    Stalled,
    Stop,
}

/// Patience counter on validation accuracy. Only a strict improvement over
/// the best value so far resets the counter.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<f64>,
    best_epoch: usize,
    epoch: usize,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: None,
            best_epoch: 0,
            epoch: 0,
            stale: 0,
        }
    }

    /// Feeds the next epoch's validation accuracy (epochs count from 1).
    pub fn update(&mut self, val_acc: f64) -> Progress {
        self.epoch += 1;
        if self.best.map_or(true, |b| val_acc > b) {
            self.best = Some(val_acc);
            self.best_epoch = self.epoch;
            self.stale = 0;
            Progress::Improved
        } else {
            self.stale += 1;
            if self.stale >= self.patience {
                Progress::Stop
            } else {
                Progress::Stalled
            }
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }
}

/// Trains `net` on the plan's training subset for one modality, with
/// per-epoch shuffling, momentum SGD and early stopping on validation
/// accuracy. Returns the network from the best validation epoch.
pub fn train(
    net: Network,
    plan: &SplitPlan,
    d: &Dataset,
    modality: Modality,
    hp: &Hyperparams,
) -> Result<(Network, TrainingHistory)> {
    let shape = net.input_shape();
    let prepared = Prepared::new(d, modality, LabelMap::new(plan.mode, d), (shape.height, shape.width));
    train_prepared(net, plan, &prepared, hp)
}

pub fn train_prepared(
    mut net: Network,
    plan: &SplitPlan,
    data: &Prepared,
    hp: &Hyperparams,
) -> Result<(Network, TrainingHistory)> {
    hp.validate()?;
    let train_rows = data.select(&plan.train);
    let val_rows = data.select(&plan.val);
    if train_rows.is_empty() || val_rows.is_empty() {
        return Err(Error::Protocol(format!(
            "split {} has an empty {} subset for {}",
            plan.split_id,
            if train_rows.is_empty() { "train" } else { "validation" },
            data.modality
        )));
    }
    if net.num_outputs() != data.labels.num_outputs() {
        return Err(Error::Protocol(format!(
            "network has {} outputs, labels need {}",
            net.num_outputs(),
            data.labels.num_outputs()
        )));
    }

    let mut rng = seeding::rng(hp.rng_seed, &[30]);
    let mut stopper = EarlyStopping::new(hp.patience);
    let mut best = net.clone();
    let mut epochs = Vec::new();
    let mut order = train_rows.clone();
    for epoch in 1..=hp.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(hp.batch_size) {
            let (batch, labels) = data.batch(chunk)?;
            let (loss, grads, probs) = net.loss_gradients_probs(&batch, &labels)?;
            let k = net.num_outputs();
            correct += labels
                .iter()
                .enumerate()
                .filter(|(i, &l)| argmax(&probs[i * k..(i + 1) * k]) == l)
                .count();
            loss_sum += loss * chunk.len() as f64;
            sgd_momentum_step(&mut net, &grads, hp)?;
        }
        let val_acc = data.accuracy(&net, &val_rows)?;
        epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / order.len() as f64,
            train_acc: correct as f64 / order.len() as f64,
            val_acc,
        });
        match stopper.update(val_acc) {
            Progress::Improved => best = net.clone(),
            Progress::Stalled => {}
            Progress::Stop => break,
        }
    }
    let history = TrainingHistory {
        stopped_epoch: stopper.epoch(),
        best_epoch: stopper.best_epoch(),
        epochs,
    };
    Ok((best, history))
}
