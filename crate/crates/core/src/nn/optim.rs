use serde::{Deserialize, Serialize};

use super::network::{Gradients, Network};
use crate::error::{Error, Result};

/// Training hyperparameters. Defaults follow the published protocol:
/// SGD with momentum 0.9, learning rate 1e-4, mini-batches of 16 and
/// early-stopping patience of 10 epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub rng_seed: u64,
    /// Keep convolutional layers fixed and train only the classifier stage.
    pub freeze_features: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 0.0001,
            momentum: 0.9,
            batch_size: 16,
            patience: 10,
            max_epochs: 200,
            rng_seed: 0,
            freeze_features: false,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Parameter("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Parameter("momentum must lie in [0, 1)".into()));
        }
        if self.batch_size == 0 || self.patience == 0 || self.max_epochs == 0 {
            return Err(Error::Parameter(
                "batch_size, patience and max_epochs must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn update(p: &mut [f64], v: &mut [f64], g: &[f64], lr: f64, momentum: f64) {
    for ((p, v), g) in p.iter_mut().zip(v.iter_mut()).zip(g) {
        *v = momentum * *v + g;
        *p -= lr * *v;
    }
}

/// Heavy-ball momentum step: `v <- momentum * v + g`, `p <- p - lr * v`.
pub fn sgd_momentum_step(net: &mut Network, grads: &Gradients, hp: &Hyperparams) -> Result<()> {
    let (layers, params, velocity) = net.parts_mut();
    if grads.layers.len() != params.len() {
        return Err(Error::GradientShape(format!(
            "{} gradient slots for {} layers",
            grads.layers.len(),
            params.len()
        )));
    }
    for (i, (spec, (p, v))) in layers
        .iter()
        .zip(params.iter_mut().zip(velocity.iter_mut()))
        .enumerate()
    {
        let (Some(p), Some(v)) = (p.as_mut(), v.as_mut()) else {
            continue;
        };
        if hp.freeze_features && spec.is_conv() {
            continue;
        }
        let Some(g) = grads.layers[i].as_ref() else {
            continue;
        };
        if g.weight.shape() != p.weight.shape() || g.bias.shape() != p.bias.shape() {
            return Err(Error::GradientShape(format!(
                "layer {i}: gradient {:?}/{:?} vs parameter {:?}/{:?}",
                g.weight.shape(),
                g.bias.shape(),
                p.weight.shape(),
                p.bias.shape()
            )));
        }
        update(
            p.weight.data_mut(),
            v.weight.data_mut(),
            g.weight.data(),
            hp.learning_rate,
            hp.momentum,
        );
        update(
            p.bias.data_mut(),
            v.bias.data_mut(),
            g.bias.data(),
            hp.learning_rate,
            hp.momentum,
        );
    }
    Ok(())
}
